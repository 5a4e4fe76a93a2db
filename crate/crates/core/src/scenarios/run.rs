use std::collections::HashMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catalogue::{Catalogue, SampleDomain};
use super::definition::{
    CheckSpec, Expectation, FlowSpec, LckQuantity, Operation, ScenarioSpec, Tolerances,
    TripleComponent, TOLERANCES,
};
use crate::conformality::{
    holomorphic_pullback_residual, phh_frame_identity_residual_at, phh_residual_at,
    phh_residual_raw_at, phwc_commutator_residual_at, phwc_residual_at, PHWC_TOL,
};
use crate::error::{Error, Result};
use crate::flow::{consistency_ratio, run_flow, FlowTrace, GridMap, GridSnapshot};
use crate::geometry::{christoffel_at, metric_compat_residual_at};
use crate::jetcalc::{fd_map_jet, jet2_eval, jet_discrepancy, map_jet, DEFAULT_FD_STEP};
use crate::linalg::g_norm;
use crate::maptension::{
    composition_residual_at, differential_at, dilation_identity_residual_at,
    fibre_mean_curvature_at, hwc_report_at, tension_at, two_imply_third_at, v_tension_at,
};
use crate::submanifolds::{
    j_invariance_defect_at, lck_complex_submanifold_residual, mean_curvature_at,
    v_minimality_residual_at, v_minimality_tangency_at,
};

/// Rejections allowed per requested point before sampling gives up.
pub const REJECTIONS_PER_POINT: usize = 100;

/// `count` points drawn uniformly from the domain with a seeded ChaCha8 stream.
pub fn sample_points(domain: &SampleDomain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = &domain.bounds;
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count {
        let p: Vec<f64> = (0..b.dim())
            .map(|i| rng.random_range(b.lo[i]..b.hi[i]))
            .collect();
        if domain.accepts(&p) {
            out.push(p);
        } else {
            rejected += 1;
            if rejected > REJECTIONS_PER_POINT * count.max(1) {
                return Err(Error::SamplingExhausted {
                    wanted: count,
                    rejected,
                });
            }
        }
    }
    Ok(out)
}

/// Overrides applied on top of a scenario's own sampler and tolerances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    /// Replaces the tolerance of every `below` expectation.
    pub tol: Option<f64>,
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.points == Some(0) {
            return Err(Error::InvalidConfig("points must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "tol must be positive and finite, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub points: usize,
    pub seed: u64,
    pub tol_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub label: String,
    pub operation: Operation,
    pub expect: Expectation,
    pub domain: Option<String>,
    pub count: usize,
    pub excluded: usize,
    pub sup: f64,
    pub mean: f64,
    pub min: f64,
    pub fraction_above: Option<f64>,
    pub negative_control: bool,
    pub passed: bool,
    pub residuals: Vec<f64>,
}

/// Outcome of one scenario run. Contains no timing data, so equal inputs give equal reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub scenario: String,
    pub title: String,
    pub claim: String,
    pub config: EffectiveConfig,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

impl ResidualReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run_scenario(
    cat: &Catalogue,
    spec: &ScenarioSpec,
    opts: &RunOptions,
) -> Result<ResidualReport> {
    opts.validate()?;
    let points = opts.points.unwrap_or(spec.sampler.points);
    let seed = opts.seed.unwrap_or(spec.sampler.seed);
    if points == 0 {
        return Err(Error::InvalidConfig(format!(
            "scenario {} samples zero points",
            spec.name
        )));
    }
    let mut flows = FlowCache::default();
    let mut checks = Vec::with_capacity(spec.checks.len());
    for check in &spec.checks {
        let expect = check.expect.with_tol_override(opts.tol);
        let (residuals, excluded) = if check.operation.is_global() {
            (
                global_residuals(cat, &check.operation, points, seed, &mut flows)?,
                0,
            )
        } else {
            point_residuals(cat, check, points, seed)?
        };
        let (passed, fraction_above) = expect.judge(&residuals);
        let count = residuals.len();
        let sup = residuals.iter().copied().fold(0.0, f64::max);
        let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = if count == 0 {
            0.0
        } else {
            residuals.iter().sum::<f64>() / count as f64
        };
        checks.push(CheckReport {
            label: check.label.clone(),
            operation: check.operation.clone(),
            expect,
            domain: check.domain.clone(),
            count,
            excluded,
            sup,
            mean,
            min: if count == 0 { 0.0 } else { min },
            fraction_above,
            negative_control: expect.is_negative_control(),
            passed,
            residuals,
        });
    }
    Ok(ResidualReport {
        scenario: spec.name.clone(),
        title: spec.title.clone(),
        claim: spec.claim.clone(),
        config: EffectiveConfig {
            points,
            seed,
            tol_override: opts.tol,
        },
        tolerances: TOLERANCES,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn point_residuals(
    cat: &Catalogue,
    check: &CheckSpec,
    points: usize,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let domain_name = check.domain.as_deref().ok_or_else(|| {
        Error::InvalidConfig(format!("check {} needs a sampling domain", check.label))
    })?;
    let pts = sample_points(cat.domain(domain_name)?, points, seed)?;
    let vals: Vec<Result<Option<f64>>> = pts
        .par_iter()
        .map(|p| match eval_point(cat, &check.operation, p) {
            Err(e) if check.allow_rank_loss && e.is_rank_failure() => Ok(None),
            r => r,
        })
        .collect();
    let mut residuals = Vec::with_capacity(points);
    let mut excluded = 0;
    for v in vals {
        match v? {
            Some(r) => residuals.push(r),
            None => excluded += 1,
        }
    }
    Ok((residuals, excluded))
}

/// Residual of a point operation; `None` marks an excluded point.
pub fn eval_point(cat: &Catalogue, op: &Operation, p: &[f64]) -> Result<Option<f64>> {
    let field = |f: &Option<String>| cat.optional_field(f.as_deref());
    let r = match op {
        Operation::MetricCompatibility { metric } => {
            metric_compat_residual_at(cat.metric(metric)?, p)?
        }
        Operation::ChristoffelSymmetry { metric } => {
            christoffel_at(cat.metric(metric)?, p)?.lower_asymmetry()
        }
        Operation::ChristoffelConformal { metric, log_factor } => {
            let gam = christoffel_at(cat.metric(metric)?, p)?;
            let df = jet2_eval(cat.scalar(log_factor)?, p)?.grad;
            let m = p.len();
            let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let mut worst = 0.0f64;
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let want = delta(i, k) * df[j] + delta(j, k) * df[i] - delta(i, j) * df[k];
                        worst = worst.max((gam.get(k, i, j) - want).abs());
                    }
                }
            }
            worst
        }
        Operation::StructureDefect { structure } => {
            let (a, b) = cat.complex_structure(structure)?.structure_defects_at(p)?;
            a.max(b)
        }
        Operation::KahlerDefect { structure } => {
            cat.complex_structure(structure)?.kahler_defect_at(p)?
        }
        Operation::LckDefect { lck } => cat.lck_structure(lck)?.lck_defect_at(p)?,
        Operation::LeeClosedness { lck } => cat.lck_structure(lck)?.lee_closedness_at(p)?,
        Operation::Tension { map } => {
            let phi = &cat.map(map)?.riemannian;
            target_norm(phi, p, &tension_at(phi, p)?)?
        }
        Operation::VTension { map, field: f } => {
            let phi = &cat.map(map)?.riemannian;
            target_norm(phi, p, &v_tension_at(phi, field(f)?, p)?)?
        }
        Operation::VTensionMinusDrift { map, field: f } => {
            let phi = &cat.map(map)?.riemannian;
            let v = cat.field(f)?;
            let diff = v_tension_at(phi, Some(v), p)? - differential_at(phi, p)? * v.at(p)?;
            target_norm(phi, p, &diff)?
        }
        Operation::Composition { phi, psi, field: f } => composition_residual_at(
            &cat.map(phi)?.riemannian,
            &cat.map(psi)?.riemannian,
            field(f)?,
            p,
        )?,
        Operation::HwcDeviation { map } => {
            hwc_report_at(&cat.map(map)?.riemannian, p, PHWC_TOL)?.deviation
        }
        Operation::FibreMeanCurvature { map } => {
            let phi = &cat.map(map)?.riemannian;
            let h = fibre_mean_curvature_at(phi, p)?;
            g_norm(&phi.source().matrix_at(p)?, &h)
        }
        Operation::TwoImplyThird {
            map,
            field: f,
            component,
        } => match two_imply_third_at(&cat.map(map)?.riemannian, field(f)?, p, PHWC_TOL)? {
            None => return Ok(None),
            Some(t) => match component {
                TripleComponent::R1 => t.r1,
                TripleComponent::R2 => t.r2,
                TripleComponent::R3 => t.r3,
            },
        },
        Operation::DilationIdentity {
            map,
            field: f,
            function,
        } => dilation_identity_residual_at(
            &cat.map(map)?.riemannian,
            field(f)?,
            cat.scalar(function)?,
            p,
        )?,
        Operation::Phwc { map } => phwc_residual_at(cat.hermitian_map(map)?, p)?,
        Operation::PhwcCommutator { map } => {
            phwc_commutator_residual_at(cat.hermitian_map(map)?, p)?
        }
        Operation::Phh { map } => phh_residual_at(cat.hermitian_map(map)?, p, PHWC_TOL)?,
        Operation::PhhRaw { map } => phh_residual_raw_at(cat.hermitian_map(map)?, p)?,
        Operation::PhhFrameIdentity { map } => {
            phh_frame_identity_residual_at(cat.hermitian_map(map)?, p)?
        }
        Operation::PhhTensionIdentity { map } => {
            let phi = &cat.map(map)?.riemannian;
            let h = fibre_mean_curvature_at(phi, p)?;
            let sum = tension_at(phi, p)? + differential_at(phi, p)? * h;
            target_norm(phi, p, &sum)?
        }
        Operation::HolomorphicPullback {
            map,
            field: f,
            family,
            member,
        } => {
            let phi = cat.hermitian_map(map)?;
            let v = field(f)?;
            let fam = cat.holomorphic_family(family)?;
            let chosen: Vec<_> = match member {
                Some(name) => vec![fam
                    .iter()
                    .find(|h| h.name() == name)
                    .ok_or_else(|| Error::not_found("holomorphic function", name))?],
                None => fam.iter().collect(),
            };
            let mut worst = 0.0f64;
            for h in chosen {
                worst = worst.max(holomorphic_pullback_residual(phi, v, h, p)?);
            }
            worst
        }
        Operation::LckSubmanifold {
            submanifold,
            lck,
            quantity,
        } => {
            let r = lck_complex_submanifold_residual(
                cat.submanifold(submanifold)?,
                cat.lck_structure(lck)?,
                p,
            )?;
            match quantity {
                LckQuantity::R1 => r.r1,
                LckQuantity::R2 => r.r2,
                LckQuantity::TraceNorm => r.trace_norm,
                LckQuantity::LeeNormalNorm => r.lee_normal_norm,
            }
        }
        Operation::JInvariance { submanifold, lck } => {
            j_invariance_defect_at(cat.submanifold(submanifold)?, cat.lck_structure(lck)?, p)?
        }
        Operation::VMinimality {
            submanifold,
            field: f,
        } => v_minimality_residual_at(cat.submanifold(submanifold)?, field(f)?, p)?,
        Operation::VMinimalityRoutes {
            submanifold,
            field: f,
        } => {
            let s = cat.submanifold(submanifold)?;
            let v = field(f)?;
            (v_minimality_residual_at(s, v, p)? - v_minimality_tangency_at(s, v, p)?).abs()
        }
        Operation::FibreVMinimality { fibres, field: f } => {
            let (fibre, q) = (cat.fibres(fibres)?.0)(p)?;
            v_minimality_residual_at(&fibre, field(f)?, &q)?
        }
        Operation::FibreCurvatureRoutes { map, fibres } => {
            let phi = &cat.map(map)?.riemannian;
            let from_map = fibre_mean_curvature_at(phi, p)?;
            let (fibre, q) = (cat.fibres(fibres)?.0)(p)?;
            let from_fibre = mean_curvature_at(&fibre, &q)?;
            g_norm(&phi.source().matrix_at(p)?, &(from_map - from_fibre))
        }
        Operation::JetConsistency
        | Operation::FlowFinalResidual { .. }
        | Operation::FlowMaxIncrease { .. }
        | Operation::FlowShiftEquivariance { .. }
        | Operation::FlowConsistency { .. } => {
            return Err(Error::InvalidConfig(
                "global operation evaluated at a point".into(),
            ))
        }
    };
    if !r.is_finite() {
        return Err(Error::NonFinite {
            what: format!("{op:?}"),
            point: p.to_vec(),
        });
    }
    Ok(Some(r))
}

fn target_norm(phi: &crate::maptension::RiemannianMap, p: &[f64], v: &DVector<f64>) -> Result<f64> {
    let img = phi.map().values(p)?;
    Ok(g_norm(&phi.target().matrix_at(&img)?, v))
}

/// Flow runs shared between the checks of one scenario.
#[derive(Default)]
struct FlowCache {
    runs: HashMap<String, (GridMap, FlowTrace)>,
}

impl FlowCache {
    fn get(
        &mut self,
        cat: &Catalogue,
        spec: &FlowSpec,
        shift: [usize; 2],
    ) -> Result<&(GridMap, FlowTrace)> {
        let key = format!(
            "{}|{:?}",
            serde_json::to_string(spec).expect("flow spec serializes"),
            shift
        );
        if !self.runs.contains_key(&key) {
            let init = spec.grid_map(cat)?.shifted(shift[0], shift[1]);
            let out = run_flow(&init, &spec.config(cat)?)?;
            self.runs.insert(key.clone(), out);
        }
        Ok(&self.runs[&key])
    }
}

fn global_residuals(
    cat: &Catalogue,
    op: &Operation,
    points: usize,
    seed: u64,
    flows: &mut FlowCache,
) -> Result<Vec<f64>> {
    match op {
        Operation::JetConsistency => {
            let mut out = Vec::new();
            for (_, expr, domain) in cat.jet_check_targets() {
                let pts = sample_points(&domain, points, seed)?;
                let vals: Vec<Result<f64>> = pts
                    .par_iter()
                    .map(|p| {
                        Ok(jet_discrepancy(
                            &map_jet(&expr, p)?,
                            &fd_map_jet(&expr, p, DEFAULT_FD_STEP)?,
                        ))
                    })
                    .collect();
                for v in vals {
                    out.push(v?);
                }
            }
            Ok(out)
        }
        Operation::FlowFinalResidual { flow } => {
            Ok(vec![flows.get(cat, flow, [0, 0])?.1.final_residual])
        }
        Operation::FlowMaxIncrease { flow, after } => {
            let trace = &flows.get(cat, flow, [0, 0])?.1;
            let mut worst = 0.0f64;
            let hist: Vec<(usize, f64)> = trace
                .recorded_iterations
                .iter()
                .copied()
                .zip(trace.residual_history.iter().copied())
                .filter(|(k, _)| *k >= *after)
                .collect();
            for w in hist.windows(2) {
                worst = worst.max(w[1].1 - w[0].1);
            }
            Ok(vec![worst])
        }
        Operation::FlowShiftEquivariance { flow, shift } => {
            let base = flows.get(cat, flow, [0, 0])?.0.shifted(shift[0], shift[1]);
            let moved = &flows.get(cat, flow, *shift)?.0;
            let diff = base
                .values()
                .iter()
                .zip(moved.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(vec![diff])
        }
        Operation::FlowConsistency {
            target,
            map,
            field,
            coarse,
        } => Ok(vec![consistency_ratio(
            cat.metric(target)?,
            cat.torus_map(map)?,
            cat.optional_field(field.as_deref())?,
            *coarse,
        )?]),
        _ => Err(Error::InvalidConfig(
            "point operation evaluated globally".into(),
        )),
    }
}

/// Result of a stand-alone flow run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowOutcome {
    pub spec: FlowSpec,
    pub step: f64,
    pub trace: FlowTrace,
    pub final_map: GridSnapshot,
}

pub fn run_flow_spec(cat: &Catalogue, spec: &FlowSpec) -> Result<FlowOutcome> {
    let init = spec.grid_map(cat)?;
    let cfg = spec.config(cat)?;
    let (fin, trace) = run_flow(&init, &cfg)?;
    Ok(FlowOutcome {
        spec: spec.clone(),
        step: cfg.step,
        trace,
        final_map: fin.snapshot(),
    })
}
