use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::catalogue::Catalogue;
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, GridMap};

/// Tolerance tiers used by the built-in scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub structural: f64,
    pub theorem: f64,
    pub flow: f64,
    pub negative_floor: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    structural: 1e-8,
    theorem: 1e-6,
    flow: 1e-4,
    negative_floor: 1e-4,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleComponent {
    R1,
    R2,
    R3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LckQuantity {
    /// `‖trace A + n B^⊥‖`
    R1,
    /// V-minimality residual for `V = −n B`
    R2,
    TraceNorm,
    LeeNormalNorm,
}

/// A residual evaluated by a check. Names refer to catalogue entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    /// Jets against finite differences for every catalogue expression (global).
    JetConsistency,
    MetricCompatibility {
        metric: String,
    },
    ChristoffelSymmetry {
        metric: String,
    },
    /// Christoffel symbols against the conformal closed form built from `log_factor`.
    ChristoffelConformal {
        metric: String,
        log_factor: String,
    },
    /// `max(‖J² + I‖, ‖JᵀgJ − g‖)`
    StructureDefect {
        structure: String,
    },
    KahlerDefect {
        structure: String,
    },
    LckDefect {
        lck: String,
    },
    LeeClosedness {
        lck: String,
    },
    Tension {
        map: String,
    },
    VTension {
        map: String,
        #[serde(default)]
        field: Option<String>,
    },
    /// `‖τ_V − dφ(V)‖`
    VTensionMinusDrift {
        map: String,
        field: String,
    },
    Composition {
        phi: String,
        psi: String,
        #[serde(default)]
        field: Option<String>,
    },
    HwcDeviation {
        map: String,
    },
    FibreMeanCurvature {
        map: String,
    },
    TwoImplyThird {
        map: String,
        #[serde(default)]
        field: Option<String>,
        component: TripleComponent,
    },
    DilationIdentity {
        map: String,
        #[serde(default)]
        field: Option<String>,
        function: String,
    },
    Phwc {
        map: String,
    },
    PhwcCommutator {
        map: String,
    },
    /// Requires the map to pass the PHWC check at the point.
    Phh {
        map: String,
    },
    PhhRaw {
        map: String,
    },
    PhhFrameIdentity {
        map: String,
    },
    /// `‖τ + dφ(Σ ∇_{u_j} u_j)‖` over a vertical orthonormal frame.
    PhhTensionIdentity {
        map: String,
    },
    /// Largest pullback residual over a holomorphic family (or one named member).
    HolomorphicPullback {
        map: String,
        #[serde(default)]
        field: Option<String>,
        family: String,
        #[serde(default)]
        member: Option<String>,
    },
    LckSubmanifold {
        submanifold: String,
        lck: String,
        quantity: LckQuantity,
    },
    JInvariance {
        submanifold: String,
        lck: String,
    },
    VMinimality {
        submanifold: String,
        #[serde(default)]
        field: Option<String>,
    },
    /// Difference between the normal-projection and least-squares V-minimality residuals.
    VMinimalityRoutes {
        submanifold: String,
        #[serde(default)]
        field: Option<String>,
    },
    /// V-minimality of the explicit fibre through each sample point.
    FibreVMinimality {
        fibres: String,
        #[serde(default)]
        field: Option<String>,
    },
    /// Fibre mean curvature from the submersion against the explicit fibre parametrization.
    FibreCurvatureRoutes {
        map: String,
        fibres: String,
    },
    /// Final `sup ‖τ_V‖` of a flow run (global).
    FlowFinalResidual {
        flow: FlowSpec,
    },
    /// Largest increase of the recorded residual after iteration `after` (global).
    FlowMaxIncrease {
        flow: FlowSpec,
        after: usize,
    },
    /// Largest value difference between the flow of a shifted grid and the shifted flow (global).
    FlowShiftEquivariance {
        flow: FlowSpec,
        shift: [usize; 2],
    },
    /// `gap(n) / gap(2n)` between discrete and exact `τ_V` (global).
    FlowConsistency {
        target: String,
        map: String,
        #[serde(default)]
        field: Option<String>,
        coarse: usize,
    },
}

impl Operation {
    /// Global operations produce their residuals without sample points.
    pub fn is_global(&self) -> bool {
        matches!(
            self,
            Operation::JetConsistency
                | Operation::FlowFinalResidual { .. }
                | Operation::FlowMaxIncrease { .. }
                | Operation::FlowShiftEquivariance { .. }
                | Operation::FlowConsistency { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// `sup < tol`
    Below { tol: f64 },
    /// `sup > floor`
    Above { floor: f64 },
    /// At least `fraction` of the residuals exceed `floor`.
    AboveAtFraction { floor: f64, fraction: f64 },
    /// `sup ≤ bound`
    AtMost { bound: f64 },
    /// Every residual lies in `[lo, hi]`.
    Within { lo: f64, hi: f64 },
}

impl Expectation {
    /// Negative controls expect a residual to stay away from zero.
    pub fn is_negative_control(&self) -> bool {
        matches!(
            self,
            Expectation::Above { .. } | Expectation::AboveAtFraction { .. }
        )
    }

    pub fn with_tol_override(self, tol: Option<f64>) -> Self {
        match (self, tol) {
            (Expectation::Below { .. }, Some(t)) => Expectation::Below { tol: t },
            (e, _) => e,
        }
    }

    /// Verdict and, for fraction checks, the observed fraction.
    pub fn judge(&self, residuals: &[f64]) -> (bool, Option<f64>) {
        if residuals.is_empty() {
            return (false, None);
        }
        let sup = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match *self {
            Expectation::Below { tol } => (sup < tol, None),
            Expectation::Above { floor } => (sup > floor, None),
            Expectation::AboveAtFraction { floor, fraction } => {
                let frac = residuals.iter().filter(|r| **r > floor).count() as f64
                    / residuals.len() as f64;
                (frac >= fraction, Some(frac))
            }
            Expectation::AtMost { bound } => (sup <= bound, None),
            Expectation::Within { lo, hi } => {
                (residuals.iter().all(|r| *r >= lo && *r <= hi), None)
            }
        }
    }
}

fn default_false() -> bool {
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub label: String,
    pub operation: Operation,
    pub expect: Expectation,
    /// Sampling domain name; unused by global operations.
    #[serde(default)]
    pub domain: Option<String>,
    /// Count rank-deficient points as excluded instead of failing.
    #[serde(default = "default_false")]
    pub allow_rank_loss: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampler {
    pub points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub title: String,
    /// The statement the scenario exercises.
    pub claim: String,
    pub sampler: Sampler,
    pub checks: Vec<CheckSpec>,
}

/// Initial data on the torus grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant {
        value: Vec<f64>,
    },
    /// `base + amplitude · (smooth periodic bump)` in each component.
    Perturbed {
        base: Vec<f64>,
        amplitude: f64,
    },
    /// A catalogue torus map sampled at the nodes.
    Map {
        name: String,
    },
}

fn one() -> usize {
    1
}

/// Serializable flow run description, as read by the `flow` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub grid: [usize; 2],
    /// Target metric name.
    pub target: String,
    pub initial: InitialData,
    /// Defaults to `0.2 · h²`.
    #[serde(default)]
    pub step: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    #[serde(default)]
    pub drift: Option<String>,
    #[serde(default = "one")]
    pub record_every: usize,
}

impl FlowSpec {
    pub fn grid_map(&self, cat: &Catalogue) -> Result<GridMap> {
        let [n1, n2] = self.grid;
        if n1 < 3 || n2 < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid {n1}x{n2} is too small, need at least 3x3"
            )));
        }
        let target = cat.metric(&self.target)?.clone();
        let dim = target.dim();
        let mut values = Vec::with_capacity(n1 * n2 * dim);
        for i in 0..n1 {
            for j in 0..n2 {
                let (x, y) = (i as f64 / n1 as f64, j as f64 / n2 as f64);
                match &self.initial {
                    InitialData::Constant { value } => {
                        check_len(value.len(), dim)?;
                        values.extend_from_slice(value);
                    }
                    InitialData::Perturbed { base, amplitude } => {
                        check_len(base.len(), dim)?;
                        values.extend(base.iter().enumerate().map(|(a, b)| {
                            let a = a as f64;
                            let bump = (2.0 * PI * (x + 0.3 * a)).sin() * (2.0 * PI * y).cos()
                                + 0.5 * (4.0 * PI * y + a).sin();
                            b + amplitude * bump
                        }));
                    }
                    InitialData::Map { name } => {
                        let m = cat.torus_map(name)?;
                        check_len(m.codomain_dim(), dim)?;
                        values.extend(m.values(&[x, y])?);
                    }
                }
            }
        }
        GridMap::new(n1, n2, target, values)
    }

    pub fn config(&self, cat: &Catalogue) -> Result<FlowConfig> {
        let cfg = FlowConfig {
            step: self
                .step
                .unwrap_or_else(|| FlowConfig::default_step(self.grid[0], self.grid[1])),
            max_iters: self.max_iters,
            tol: self.tol,
            drift: cat.optional_field(self.drift.as_deref())?.cloned(),
            record_every: self.record_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "initial value of length {got}, target has dimension {want}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations_judge_as_documented() {
        assert!(Expectation::Below { tol: 1.0 }.judge(&[0.5, 0.9]).0);
        assert!(!Expectation::Below { tol: 1.0 }.judge(&[]).0);
        assert!(Expectation::Above { floor: 1.0 }.judge(&[0.5, 2.0]).0);
        let (ok, frac) = Expectation::AboveAtFraction {
            floor: 1.0,
            fraction: 0.9,
        }
        .judge(&[0.5, 2.0]);
        assert!(!ok);
        assert_eq!(frac, Some(0.5));
        assert!(Expectation::Within { lo: 3.5, hi: 4.5 }.judge(&[4.0]).0);
    }

    #[test]
    fn operations_round_trip_through_json() {
        let op = Operation::TwoImplyThird {
            map: "radial".into(),
            field: None,
            component: TripleComponent::R3,
        };
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(serde_json::from_str::<Operation>(&s).unwrap(), op);
    }
}
