use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vharm::scenarios::{
    catalogue, load_registry_file, run_flow_spec, run_scenario, FlowSpec, Registry, ResidualReport,
    RunOptions,
};

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "vharm",
    version,
    about = "Run seeded numerical checks of V-harmonic map geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// List registered scenarios.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// JSON file with additional scenarios.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Run one scenario and write its report.
    Check {
        name: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        points: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the tolerance of every positive check.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path (default ./reports/<name>.json).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Run a heat flow described by a JSON config.
    Flow {
        config: PathBuf,
        /// Trace path (default ./reports/flow.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every built-in scenario.
    All {
        /// Report directory (default ./reports).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List { format, registry } => cmd_list(format, registry.as_deref()),
        Command::Check {
            name,
            points,
            seed,
            tol,
            out,
            format,
            registry,
        } => {
            let opts = RunOptions {
                points: points.map(|p| p as usize),
                seed,
                tol,
            };
            cmd_check(&name, &opts, out, format, registry.as_deref())
        }
        Command::Flow { config, out } => cmd_flow(&config, out),
        Command::All { out } => cmd_all(out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn registry(path: Option<&Path>) -> Result<Registry, String> {
    match path {
        None => Ok(Registry::builtin()),
        Some(p) => {
            let custom = load_registry_file(p).map_err(|e| e.to_string())?;
            Registry::with_custom(custom).map_err(|e| e.to_string())
        }
    }
}

fn cmd_list(format: Format, reg_path: Option<&Path>) -> Result<ExitCode, String> {
    let reg = registry(reg_path)?;
    match format {
        Format::Json => println!("{}", to_json(reg.scenarios())?),
        Format::Text => {
            for s in reg.scenarios() {
                println!("{:<4} {:<20} {}", s.name, s.title, s.claim);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(
    name: &str,
    opts: &RunOptions,
    out: Option<PathBuf>,
    format: Format,
    reg_path: Option<&Path>,
) -> Result<ExitCode, String> {
    opts.validate().map_err(|e| e.to_string())?;
    let reg = registry(reg_path)?;
    let spec = reg.find(name).map_err(|e| e.to_string())?;
    let report = run_scenario(catalogue(), spec, opts).map_err(|e| e.to_string())?;
    let out = out.unwrap_or_else(|| PathBuf::from("reports").join(format!("{}.json", spec.name)));
    write_atomic(&out, &to_json(&report)?)?;
    match format {
        Format::Json => println!("{}", to_json(&report)?),
        Format::Text => print_summary(&report),
    }
    Ok(verdict(report.passed))
}

fn cmd_flow(config: &Path, out: Option<PathBuf>) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
    let spec: FlowSpec = serde_json::from_str(&text)
        .map_err(|e| format!("cannot parse flow config {}: {e}", config.display()))?;
    let outcome = run_flow_spec(catalogue(), &spec).map_err(|e| e.to_string())?;
    let out = out.unwrap_or_else(|| PathBuf::from("reports").join("flow.json"));
    write_atomic(&out, &to_json(&outcome)?)?;
    let t = &outcome.trace;
    println!(
        "flow: {} after {} iterations, final residual {:.3e}",
        if t.converged {
            "converged"
        } else {
            "did not converge"
        },
        t.iterations_used,
        t.final_residual
    );
    if t.non_convergence_warning {
        eprintln!(
            "warning: max_iters reached before the residual fell below {:e}",
            spec.tol
        );
    }
    Ok(verdict(t.converged))
}

fn cmd_all(out: Option<PathBuf>) -> Result<ExitCode, String> {
    let dir = out.unwrap_or_else(|| PathBuf::from("reports"));
    let reg = Registry::builtin();
    let mut all_passed = true;
    for spec in reg.scenarios() {
        let report =
            run_scenario(catalogue(), spec, &RunOptions::default()).map_err(|e| e.to_string())?;
        write_atomic(&dir.join(format!("{}.json", spec.name)), &to_json(&report)?)?;
        print_summary(&report);
        all_passed &= report.passed;
    }
    Ok(verdict(all_passed))
}

fn verdict(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn print_summary(r: &ResidualReport) {
    println!(
        "{} {} (points {}, seed {}): {}",
        r.scenario,
        r.title,
        r.config.points,
        r.config.seed,
        if r.passed { "PASS" } else { "FAIL" }
    );
    for c in &r.checks {
        println!(
            "  {} {:<60} sup {:.3e}  mean {:.3e}  n {}  excluded {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.label,
            c.sup,
            c.mean,
            c.count,
            c.excluded
        );
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String, String> {
    serde_json::to_string_pretty(v).map_err(|e| e.to_string())
}

/// Write through a temporary file in the target directory, then rename over `path`.
fn write_atomic(path: &Path, contents: &str) -> Result<(), String> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| format!("cannot write in {}: {e}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.write_all(b"\n"))
        .map_err(|e| format!("cannot write report: {e}"))?;
    tmp.persist(path)
        .map_err(|e| format!("cannot move report into {}: {e}", path.display()))?;
    Ok(())
}
