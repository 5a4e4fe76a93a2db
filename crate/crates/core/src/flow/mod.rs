//! Explicit V-harmonic map heat flow `∂φ/∂t = τ_V(φ)` from the flat unit
//! torus into a chart, on a periodic grid.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel_from_jet, metric_jet, MetricField, VectorFieldExpr};
use crate::jetcalc::{DomainBox, MapExpr};
use crate::linalg::g_norm;
use crate::maptension::{v_tension_at, RiemannianMap};

/// Halvings tried for a node whose update would leave the target box.
pub const MAX_RETRACTIONS: usize = 20;

/// Chart box that drift fields on the torus must cover.
pub fn torus_chart() -> DomainBox {
    DomainBox::cube(2, -0.5, 1.5)
}

/// Node values of a map from the periodic `n1 × n2` grid on `[0, 1)²`.
#[derive(Clone, Debug)]
pub struct GridMap {
    n1: usize,
    n2: usize,
    dim: usize,
    values: Vec<f64>,
    target: MetricField,
}

/// Serializable copy of a grid map's data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSnapshot {
    pub n1: usize,
    pub n2: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl GridMap {
    pub fn new(n1: usize, n2: usize, target: MetricField, values: Vec<f64>) -> Result<Self> {
        let dim = target.dim();
        if n1 < 3 || n2 < 3 {
            return Err(Error::InvalidConfig(format!("grid {n1}×{n2} is too small")));
        }
        if values.len() != n1 * n2 * dim {
            return Err(Error::Dimension(format!(
                "grid {n1}×{n2} into dimension {dim} needs {} values, got {}",
                n1 * n2 * dim,
                values.len()
            )));
        }
        let gm = Self {
            n1,
            n2,
            dim,
            values,
            target,
        };
        for i in 0..n1 {
            for j in 0..n2 {
                if !gm.target.domain().contains(gm.node(i, j)) {
                    return Err(Error::DomainEscape { i, j });
                }
            }
        }
        Ok(gm)
    }

    /// Sample `f(x, y)` at the nodes `(i/n1, j/n2)`.
    pub fn from_fn(
        n1: usize,
        n2: usize,
        target: MetricField,
        f: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(n1 * n2 * target.dim());
        for i in 0..n1 {
            for j in 0..n2 {
                values.extend(f(i as f64 / n1 as f64, j as f64 / n2 as f64));
            }
        }
        Self::new(n1, n2, target, values)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (1.0 / self.n1 as f64, 1.0 / self.n2 as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self) -> &MetricField {
        &self.target
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `(i mod n1, j mod n2)`.
    pub fn node(&self, i: usize, j: usize) -> &[f64] {
        let (i, j) = (i % self.n1, j % self.n2);
        let k = (i * self.n2 + j) * self.dim;
        &self.values[k..k + self.dim]
    }

    fn node_wrapped(&self, i: isize, j: isize) -> &[f64] {
        let i = i.rem_euclid(self.n1 as isize) as usize;
        let j = j.rem_euclid(self.n2 as isize) as usize;
        self.node(i, j)
    }

    /// Cyclic shift by `(di, dj)` nodes.
    pub fn shifted(&self, di: usize, dj: usize) -> GridMap {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                values.extend_from_slice(
                    self.node(i + self.n1 - di % self.n1, j + self.n2 - dj % self.n2),
                );
            }
        }
        GridMap {
            values,
            ..self.clone()
        }
    }

    pub fn snapshot(&self) -> GridSnapshot {
        GridSnapshot {
            n1: self.n1,
            n2: self.n2,
            dim: self.dim,
            values: self.values.clone(),
        }
    }
}

/// Discrete `τ_V` per node, plus its `h`-norm.
struct NodeTension {
    tau: Vec<f64>,
    norm: f64,
}

fn node_tension(
    gm: &GridMap,
    v: Option<&VectorFieldExpr>,
    i: usize,
    j: usize,
) -> Result<NodeTension> {
    let (h1, h2) = gm.spacing();
    let n = gm.dim;
    let (ii, jj) = (i as isize, j as isize);
    let c = gm.node(i, j);
    let (e, w) = (gm.node_wrapped(ii + 1, jj), gm.node_wrapped(ii - 1, jj));
    let (nn, s) = (gm.node_wrapped(ii, jj + 1), gm.node_wrapped(ii, jj - 1));
    let mj = match metric_jet(&gm.target, c) {
        Ok(mj) => mj,
        Err(Error::Domain { .. }) => return Err(Error::DomainEscape { i, j }),
        Err(err) => return Err(err),
    };
    let gam = christoffel_from_jet(&mj);
    let d1: Vec<f64> = (0..n).map(|a| (e[a] - w[a]) / (2.0 * h1)).collect();
    let d2: Vec<f64> = (0..n).map(|a| (nn[a] - s[a]) / (2.0 * h2)).collect();
    let quad = gam.contract(&d1, &d1) + gam.contract(&d2, &d2);
    let drift = match v {
        Some(v) => v.at(&[i as f64 * h1, j as f64 * h2])?,
        None => DVector::zeros(2),
    };
    let tau: Vec<f64> = (0..n)
        .map(|a| {
            let lap =
                (e[a] - 2.0 * c[a] + w[a]) / (h1 * h1) + (nn[a] - 2.0 * c[a] + s[a]) / (h2 * h2);
            lap + quad[a] + drift[0] * d1[a] + drift[1] * d2[a]
        })
        .collect();
    let norm = g_norm(&mj.g, &DVector::from_vec(tau.clone()));
    Ok(NodeTension { tau, norm })
}

fn all_tensions(gm: &GridMap, v: Option<&VectorFieldExpr>) -> Result<Vec<NodeTension>> {
    let rows: Vec<Result<Vec<NodeTension>>> = (0..gm.n1)
        .into_par_iter()
        .map(|i| (0..gm.n2).map(|j| node_tension(gm, v, i, j)).collect())
        .collect();
    let mut out = Vec::with_capacity(gm.n1 * gm.n2);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Central-difference `τ_V` at every node, flattened like the grid values.
pub fn discrete_v_tension(gm: &GridMap, v: Option<&VectorFieldExpr>) -> Result<Vec<f64>> {
    Ok(all_tensions(gm, v)?
        .into_iter()
        .flat_map(|t| t.tau)
        .collect())
}

/// `sup_nodes ‖τ_V‖_h`.
pub fn sup_residual(gm: &GridMap, v: Option<&VectorFieldExpr>) -> Result<f64> {
    Ok(all_tensions(gm, v)?.iter().fold(0.0, |a, t| a.max(t.norm)))
}

/// `sup_nodes ‖discrete τ_V − τ_V‖_h` for a smooth periodic map sampled on an `n × n` grid.
pub fn continuum_gap(
    target: &MetricField,
    map: &MapExpr,
    v: Option<&VectorFieldExpr>,
    n: usize,
) -> Result<f64> {
    let phi = RiemannianMap::new(
        MetricField::flat(2, torus_chart()),
        target.clone(),
        map.clone(),
    )?;
    let mut values = Vec::with_capacity(n * n * target.dim());
    for i in 0..n {
        for j in 0..n {
            values.extend(map.values(&[i as f64 / n as f64, j as f64 / n as f64])?);
        }
    }
    let gm = GridMap::new(n, n, target.clone(), values)?;
    let disc = discrete_v_tension(&gm, v)?;
    let h = 1.0 / n as f64;
    let dim = gm.dim;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let p = [i as f64 * h, j as f64 * h];
            let exact = v_tension_at(&phi, v, &p)?;
            let k = (i * n + j) * dim;
            let diff = DVector::from_fn(dim, |a, _| disc[k + a] - exact[a]);
            worst = worst.max(g_norm(&target.matrix_at(gm.node(i, j))?, &diff));
        }
    }
    Ok(worst)
}

/// `gap(n) / gap(2n)`; close to 4 for a second-order scheme.
pub fn consistency_ratio(
    target: &MetricField,
    map: &MapExpr,
    v: Option<&VectorFieldExpr>,
    n: usize,
) -> Result<f64> {
    Ok(continuum_gap(target, map, v, n)? / continuum_gap(target, map, v, 2 * n)?)
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub step: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub drift: Option<VectorFieldExpr>,
    pub record_every: usize,
}

impl FlowConfig {
    /// `Δt = 0.2 · min(h₁, h₂)²`.
    pub fn default_step(n1: usize, n2: usize) -> f64 {
        let h = (1.0 / n1 as f64).min(1.0 / n2 as f64);
        0.2 * h * h
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step >= 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step must be non-negative, got {}",
                self.step
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if let Some(v) = &self.drift {
            if v.dim() != 2 {
                return Err(Error::Dimension(format!(
                    "drift {} is not a field on the torus",
                    v.name()
                )));
            }
        }
        Ok(())
    }
}

fn advance(gm: &GridMap, tensions: &[NodeTension], dt: f64) -> Result<GridMap> {
    let n = gm.dim;
    let dom = gm.target.domain();
    let rows: Vec<Result<Vec<f64>>> = (0..gm.n1)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(gm.n2 * n);
            for j in 0..gm.n2 {
                let c = gm.node(i, j);
                let t = &tensions[i * gm.n2 + j].tau;
                let mut step = dt;
                let mut tries = 0;
                let next = loop {
                    let cand: Vec<f64> = (0..n).map(|a| c[a] + step * t[a]).collect();
                    if dom.contains(&cand) {
                        break cand;
                    }
                    tries += 1;
                    if tries > MAX_RETRACTIONS {
                        return Err(Error::DomainEscape { i, j });
                    }
                    step *= 0.5;
                };
                row.extend(next);
            }
            Ok(row)
        })
        .collect();
    let mut values = Vec::with_capacity(gm.values.len());
    for r in rows {
        values.extend(r?);
    }
    Ok(GridMap {
        values,
        ..gm.clone()
    })
}

/// One explicit Euler step.
pub fn flow_step(gm: &GridMap, cfg: &FlowConfig) -> Result<GridMap> {
    cfg.validate()?;
    let t = all_tensions(gm, cfg.drift.as_ref())?;
    advance(gm, &t, cfg.step)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowTrace {
    /// Iteration numbers at which residuals were recorded.
    pub recorded_iterations: Vec<usize>,
    /// `sup ‖τ_V‖` at each recorded iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_residual: f64,
    /// Set when `max_iters` was reached first.
    pub non_convergence_warning: bool,
}

/// Iterate until `sup ‖τ_V‖ < tol` or `max_iters` steps.
pub fn run_flow(gm: &GridMap, cfg: &FlowConfig) -> Result<(GridMap, FlowTrace)> {
    cfg.validate()?;
    let v = cfg.drift.as_ref();
    let mut cur = gm.clone();
    let mut trace = FlowTrace {
        recorded_iterations: Vec::new(),
        residual_history: Vec::new(),
        converged: false,
        iterations_used: 0,
        final_residual: f64::INFINITY,
        non_convergence_warning: false,
    };
    let mut iter = 0;
    loop {
        let t = all_tensions(&cur, v)?;
        let r = t.iter().fold(0.0, |a: f64, n| a.max(n.norm));
        let done = r < cfg.tol;
        if iter % cfg.record_every == 0 || done || iter == cfg.max_iters {
            trace.recorded_iterations.push(iter);
            trace.residual_history.push(r);
        }
        trace.final_residual = r;
        trace.iterations_used = iter;
        if done {
            trace.converged = true;
            break;
        }
        if iter == cfg.max_iters {
            trace.non_convergence_warning = true;
            break;
        }
        cur = advance(&cur, &t, cfg.step)?;
        iter += 1;
    }
    Ok((cur, trace))
}
