//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use vharm::conformality::{
    holomorphic_pullback_residual, phh_residual_at, phh_residual_raw_at,
    phwc_commutator_residual_at, phwc_residual_at, PHWC_TOL,
};
use vharm::flow::{consistency_ratio, run_flow};
use vharm::geometry::metric_compat_residual_at;
use vharm::jetcalc::{fd_map_jet, jet_discrepancy, map_jet, DEFAULT_FD_STEP};
use vharm::linalg::g_norm;
use vharm::maptension::{
    composition_residual_at, differential_at, hwc_report_at, tension_at, two_imply_third_at,
    v_tension_at, RiemannianMap,
};
use vharm::scenarios::{
    catalogue, sample_points, Catalogue, Exclusion, FlowSpec, InitialData, SampleDomain,
};
use vharm::submanifolds::{
    lck_complex_submanifold_residual, mean_curvature_at, v_minimality_residual_at,
};

const SEED: u64 = 42;

type Criterion = fn(&Catalogue) -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn points(cat: &Catalogue, domain: &str, n: usize) -> Vec<Vec<f64>> {
    sample_points(cat.domain(domain).unwrap(), n, SEED).unwrap()
}

fn sup(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn target_norm(phi: &RiemannianMap, p: &[f64], v: &DVector<f64>) -> f64 {
    let img = phi.map().values(p).unwrap();
    g_norm(&phi.target().matrix_at(&img).unwrap(), v)
}

fn criterion_1(cat: &Catalogue) -> Outcome {
    let start = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut worst_name = String::new();
    let mut components = 0;
    for (name, expr, domain) in cat.jet_check_targets() {
        components += expr.codomain_dim();
        for p in sample_points(&domain, 100, SEED).unwrap() {
            let exact = map_jet(&expr, &p).unwrap();
            let fd = fd_map_jet(&expr, &p, DEFAULT_FD_STEP).unwrap();
            let r = jet_discrepancy(&exact, &fd);
            if r > worst_rel {
                worst_rel = r;
                worst_name = name.clone();
            }
            for h in &exact.hess {
                worst_sym = worst_sym.max((h - h.transpose()).amax());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_rel < 1e-6 && worst_sym < 1e-12 && elapsed < Duration::from_secs(5),
        format!(
            "{components} components x 100 points: max relative jet/FD error {worst_rel:.2e} ({worst_name}), \
             Hessian asymmetry {worst_sym:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2(cat: &Catalogue) -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (metric, domain) in [
        ("flat-r3", "flat-r3-box"),
        ("sphere-stereo", "sphere-chart"),
        ("s2xs2xh2", "s2xs2xh2-box"),
        ("hopf-c2", "hopf-c2-shell"),
        ("hopf-c3", "hopf-c3-shell"),
    ] {
        let g = cat.metric(metric).unwrap();
        let r = sup(points(cat, domain, 100)
            .iter()
            .map(|p| metric_compat_residual_at(g, p).unwrap()));
        ok &= r < 1e-9;
        parts.push(format!("{metric} {r:.1e}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    outcome(
        ok,
        format!(
            "compatibility sup: {}; {:.2} s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3(cat: &Catalogue) -> Outcome {
    let pts = points(cat, "hopf-c2-shell", 100);
    let hopf = cat.lck_structure("hopf-c2").unwrap();
    let wrong = cat.lck_structure("hopf-c2-wrong-sign").unwrap();
    let defect = sup(pts.iter().map(|p| hopf.lck_defect_at(p).unwrap()));
    let wrong_min = pts
        .iter()
        .map(|p| wrong.lck_defect_at(p).unwrap())
        .fold(f64::INFINITY, f64::min);
    // Lee field of δ/|z|² with ω = −2x/|z|² is B = −2x.
    let lee = sup(pts.iter().map(|p| {
        let b = hopf.lee_field_at(p).unwrap();
        b.iter()
            .zip(p)
            .map(|(bi, xi)| (bi + 2.0 * xi).abs())
            .fold(0.0, f64::max)
    }));
    outcome(
        defect < 1e-8 && wrong_min > 1e-4 && lee < 1e-12,
        format!("lcK defect sup {defect:.1e}, wrong-sign defect min {wrong_min:.2e}, |B + 2x| sup {lee:.1e}"),
    )
}

fn criterion_4(cat: &Catalogue) -> Outcome {
    let start = Instant::now();
    let line = cat.submanifold("hopf-line-z2-eq-1").unwrap();
    let hopf = cat.lck_structure("hopf-c2").unwrap();
    let pts = points(cat, "hopf-line-params", 200);
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    let mut oracle = 0.0f64;
    for q in &pts {
        let r = lck_complex_submanifold_residual(line, hopf, q).unwrap();
        r1 = r1.max(r.r1);
        r2 = r2.max(r.r2);
        // Conformal change of a flat-minimal plane: trace A = 2 x^⊥ = (0, 0, 2, 0) on {z2 = 1}.
        let h = mean_curvature_at(line, q).unwrap();
        oracle = oracle.max((h - DVector::from_vec(vec![0.0, 0.0, 2.0, 0.0])).amax());
    }
    let elapsed = start.elapsed();
    outcome(
        r1 < 1e-6 && r2 < 1e-6 && oracle < 1e-10 && elapsed < Duration::from_secs(30),
        format!(
            "200 points: ‖trace A + B^⊥‖ sup {r1:.1e}, (−B)-minimality sup {r2:.1e}, \
             closed-form trace A error {oracle:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5(cat: &Catalogue) -> Outcome {
    let phi = &cat.map("hopf-quotient").unwrap().riemannian;
    let minus_b = cat.field("minus-lee-c2").unwrap();
    let pts = points(cat, "hopf-quotient-box", 100);
    let tv = sup(pts
        .iter()
        .map(|p| target_norm(phi, p, &v_tension_at(phi, Some(minus_b), p).unwrap())));
    let taus: Vec<f64> = pts
        .iter()
        .map(|p| target_norm(phi, p, &tension_at(phi, p).unwrap()))
        .collect();
    let above = taus.iter().filter(|t| **t > 1e-4).count();
    // z1/z2 is constant along real rays and B = −2x is radial, so dφ(B) vanishes identically.
    let drift = sup(pts.iter().map(|p| {
        let b = DVector::from_iterator(p.len(), p.iter().map(|x| -2.0 * x));
        (differential_at(phi, p).unwrap() * b).amax()
    }));
    outcome(
        tv < 1e-6 && above >= 90,
        format!(
            "‖τ_V‖ (V = −B) sup {tv:.1e}; ‖τ‖ > 1e-4 at {above}/100 points (sup {:.1e}); |dφ(B)| sup {drift:.1e}",
            sup(taus.iter().copied())
        ),
    )
}

fn criterion_6(cat: &Catalogue) -> Outcome {
    let triples = [
        ("flat-pair-phi", "flat-pair-psi", "wavy-r2", "unit-square"),
        ("radial", "sphere-embedding", "rotation-lift-r3", "r3-lower"),
        (
            "hopf-quotient",
            "sphere-square",
            "minus-lee-c2",
            "hopf-quotient-box",
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (phi, psi, v, d) in triples {
        let phi_m = &cat.map(phi).unwrap().riemannian;
        let psi_m = &cat.map(psi).unwrap().riemannian;
        let v = cat.field(v).unwrap();
        let r = sup(points(cat, d, 100)
            .iter()
            .map(|p| composition_residual_at(phi_m, psi_m, Some(v), p).unwrap()));
        ok &= r < 1e-8;
        parts.push(format!("{psi}∘{phi} {r:.1e}"));
    }
    outcome(
        ok,
        format!("composition residual sup: {}", parts.join(", ")),
    )
}

fn criterion_7(cat: &Catalogue) -> Outcome {
    let phi = &cat.map("radial").unwrap().riemannian;
    let rot = cat.field("rotation-r3").unwrap();
    let pts = points(cat, "r3-lower", 100);
    let (mut r1, mut r2, mut r3, mut drift, mut lam) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut excluded = 0;
    for p in &pts {
        match two_imply_third_at(phi, None, p, PHWC_TOL).unwrap() {
            Some(t) => {
                r1 = r1.max(t.r1);
                r2 = r2.max(t.r2);
                r3 = r3.max(t.r3);
            }
            None => excluded += 1,
        }
        let v = rot.at(p).unwrap();
        let diff = v_tension_at(phi, Some(rot), p).unwrap() - differential_at(phi, p).unwrap() * v;
        drift = drift.max(target_norm(phi, p, &diff));
        // x ↦ x/|x| onto the unit sphere has dilation 1/|x|².
        let r2p: f64 = p.iter().map(|x| x * x).sum();
        lam = lam.max((hwc_report_at(phi, p, PHWC_TOL).unwrap().lambda2 - 1.0 / r2p).abs());
    }
    outcome(
        r1 < 1e-6 && r2 < 1e-8 && r3 < 1e-8 && drift < 1e-8 && lam < 1e-10 && excluded == 0,
        format!(
            "V = 0: R1 {r1:.1e}, R2 {r2:.1e}, R3 {r3:.1e}; horizontal V: ‖τ_V − dφ(V)‖ {drift:.1e}; \
             λ² vs 1/|x|² {lam:.1e}; excluded {excluded}"
        ),
    )
}

fn criterion_8(cat: &Catalogue) -> Outcome {
    let phi = &cat.map("product-projection-s2xs2").unwrap().riemannian;
    let pts = points(cat, "s2xs2xh2-box", 100);
    let fibres = cat.fibres("product-fibres-s2xs2xh2").unwrap();
    let residuals = |field: &str| -> Vec<(f64, f64)> {
        let v = cat.field(field).unwrap();
        pts.iter()
            .map(|p| {
                let tv = target_norm(phi, p, &v_tension_at(phi, Some(v), p).unwrap());
                let (fibre, q) = (fibres.0)(p).unwrap();
                (tv, v_minimality_residual_at(&fibre, Some(v), &q).unwrap())
            })
            .collect()
    };
    let vert = residuals("vertical-s2xs2xh2");
    let horiz = residuals("horizontal-s2xs2xh2");
    let vert_ok = vert.iter().all(|(a, b)| *a < 1e-8 && *b < 1e-8);
    let flip_ok = horiz.iter().all(|(a, b)| *a > 1e-4 && *b > 1e-4);
    let agree = vert
        .iter()
        .chain(&horiz)
        .all(|(a, b)| (*a < 1e-8) == (*b < 1e-8));
    outcome(
        vert_ok && flip_ok && agree,
        format!(
            "vertical V: ‖τ_V‖ sup {:.1e}, fibre residual sup {:.1e}; horizontal V: min {:.2e} / {:.2e}; verdicts agree at every point: {agree}",
            sup(vert.iter().map(|r| r.0)),
            sup(vert.iter().map(|r| r.1)),
            horiz.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
            horiz.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        ),
    )
}

fn criterion_9(cat: &Catalogue) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (sub, field, d) in [
        ("diagonal-times-h2", "vertical-s2xs2xh2", "product-params"),
        ("parabola-times-h2", "vertical-c2xh2", "parabola-params"),
    ] {
        let s = cat.submanifold(sub).unwrap();
        let v = cat.field(field).unwrap();
        let r = sup(points(cat, d, 100)
            .iter()
            .map(|q| v_minimality_residual_at(s, Some(v), q).unwrap()));
        ok &= r < 1e-6;
        parts.push(format!("{sub} {r:.1e}"));
    }
    outcome(ok, format!("V-minimality sup: {}", parts.join(", ")))
}

fn criterion_10(cat: &Catalogue) -> Outcome {
    let v = cat.field("minus-2lee-c3").unwrap();
    let pts = points(cat, "hopf-c3-shell", 100);
    let battery = cat.holomorphic_family("battery-c2").unwrap();
    let per_fn = |map: &str| -> Vec<(String, f64)> {
        let phi = cat.hermitian_map(map).unwrap();
        battery
            .iter()
            .map(|f| {
                let r = sup(pts
                    .iter()
                    .map(|p| holomorphic_pullback_residual(phi, Some(v), f, p).unwrap()));
                (f.name().to_string(), r)
            })
            .collect()
    };
    let good = per_fn("hopf3-projection");
    let bad = per_fn("hopf3-non-phwc");
    let good_ok = good.len() == 5 && good.iter().all(|(_, r)| *r < 1e-6);
    let bad_ok = bad.iter().any(|(_, r)| *r > 1e-4);
    let fmt = |xs: &[(String, f64)]| {
        xs.iter()
            .map(|(n, r)| format!("{n} {r:.1e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        good_ok && bad_ok,
        format!("V-PHM: {}; non-PHWC control: {}", fmt(&good), fmt(&bad)),
    )
}

fn criterion_11(cat: &Catalogue) -> Outcome {
    let mut mixed = Vec::new();
    let mut maps = 0;
    for (name, nm) in &cat.maps {
        let Some(phi) = &nm.hermitian else { continue };
        maps += 1;
        let d = phi.riemannian().map().domain();
        let shrink = |i: usize| {
            let w = 0.1 * (d.hi[i] - d.lo[i]);
            (d.lo[i] + w, d.hi[i] - w)
        };
        let mut dom = SampleDomain::new(vharm::jetcalc::DomainBox::new(
            (0..d.dim()).map(|i| shrink(i).0).collect(),
            (0..d.dim()).map(|i| shrink(i).1).collect(),
        ));
        if phi.riemannian().source().name().starts_with("hopf") {
            dom = dom.excluding(Exclusion::NormBelow {
                from: 0,
                to: d.dim(),
                radius: 0.5,
            });
        }
        for p in sample_points(&dom, 100, SEED).unwrap() {
            let a = phwc_residual_at(phi, &p).unwrap();
            let b = phwc_commutator_residual_at(phi, &p).unwrap();
            let both_small = a < 1e-8 && b < 1e-8;
            let both_large = a > 1e-4 && b > 1e-4;
            if !(both_small || both_large) {
                mixed.push(format!("{name} at {p:?}: {a:.1e} / {b:.1e}"));
            }
        }
    }
    let product = cat.hermitian_map("product-projection-s2xs2").unwrap();
    let phh_product = sup(points(cat, "s2xs2xh2-box", 100)
        .iter()
        .map(|p| phh_residual_at(product, p, PHWC_TOL).unwrap()));
    let warped = cat.hermitian_map("warped-projection").unwrap();
    let warped_pts = points(cat, "warped-box", 100);
    let phh_warped: Vec<f64> = warped_pts
        .iter()
        .map(|p| phh_residual_at(warped, p, PHWC_TOL).unwrap())
        .collect();
    let warped_sup = sup(phh_warped.iter().copied());
    // The literal e^s(x + iy) map: not PHWC on flat R³, and PHH on the chart where it is PHWC.
    let exp_flat = cat.hermitian_map("exp-s-flat").unwrap();
    let exp_flat_phwc_min = points(cat, "unit-cube-r3", 100)
        .iter()
        .map(|p| phwc_residual_at(exp_flat, p).unwrap())
        .fold(f64::INFINITY, f64::min);
    let exp_twisted = cat.hermitian_map("exp-s-twisted").unwrap();
    let exp_twisted_phh = sup(points(cat, "twisted-box", 100)
        .iter()
        .map(|p| phh_residual_raw_at(exp_twisted, p).unwrap()));
    outcome(
        mixed.is_empty() && phh_product < 1e-9 && warped_sup > 1e-4,
        format!(
            "{maps} Hermitian-target maps, {} mixed PHWC verdicts; PHH product sup {phh_product:.1e}; \
             PHH warped control sup {warped_sup:.2e}; e^s(x+iy): PHWC residual min on flat R³ {exp_flat_phwc_min:.1e}, \
             PHH residual sup on its PHWC chart {exp_twisted_phh:.1e}{}",
            mixed.len(),
            mixed.first().map(|m| format!("; first mixed: {m}")).unwrap_or_default()
        ),
    )
}

fn criterion_12(cat: &Catalogue) -> Outcome {
    let start = Instant::now();
    let spec = FlowSpec {
        grid: [32, 32],
        target: "sphere-stereo".into(),
        initial: InitialData::Perturbed {
            base: vec![0.3, -0.2],
            amplitude: 0.05,
        },
        step: None,
        max_iters: 10_000,
        tol: 1e-4,
        drift: None,
        record_every: 1,
    };
    let (_, trace) = run_flow(&spec.grid_map(cat).unwrap(), &spec.config(cat).unwrap()).unwrap();
    let increase = trace
        .recorded_iterations
        .iter()
        .zip(&trace.residual_history)
        .filter(|(k, _)| **k >= 10)
        .map(|(_, r)| *r)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = consistency_ratio(
        cat.metric("sphere-stereo").unwrap(),
        cat.torus_map("torus-wave").unwrap(),
        None,
        32,
    )
    .unwrap();
    let elapsed = start.elapsed();
    outcome(
        trace.converged
            && trace.final_residual < 1e-4
            && trace.iterations_used <= 10_000
            && increase <= 0.0
            && (3.5..=4.5).contains(&ratio)
            && elapsed < Duration::from_secs(60),
        format!(
            "converged {} after {} steps, final residual {:.2e}, largest increase after step 10 {increase:.1e}, \
             consistency ratio {ratio:.3}, {:.2} s",
            trace.converged,
            trace.iterations_used,
            trace.final_residual,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let cat = catalogue();
    let criteria: [(&str, Criterion); 12] = [
        ("jets against finite differences", criterion_1),
        ("metric compatibility", criterion_2),
        ("Hopf lcK structure", criterion_3),
        ("complex line in the Hopf chart", criterion_4),
        ("Hopf quotient onto the sphere", criterion_5),
        ("composition law", criterion_6),
        ("radial projection, two imply the third", criterion_7),
        ("PHH product submersion", criterion_8),
        ("preimage of a complex curve", criterion_9),
        ("holomorphic pullback battery", criterion_10),
        ("PHWC and PHH residuals", criterion_11),
        ("heat flow torus to sphere", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f(cat);
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} ({name}): {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
