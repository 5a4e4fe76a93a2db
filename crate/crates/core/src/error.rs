use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain box of {what}")]
    Domain { what: String, point: Vec<f64> },

    #[error("evaluation of {what} produced a non-finite value at {point:?}")]
    NonFinite { what: String, point: Vec<f64> },

    #[error("metric is singular or ill-conditioned (condition number {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("differential has rank {rank}, expected {expected}")]
    RankDeficiency { rank: usize, expected: usize },

    #[error("map is not horizontally weakly conformal here (deviation {deviation:e})")]
    NotHwc { deviation: f64 },

    #[error("map is not pseudo-horizontally weakly conformal here (residual {residual:e})")]
    NotPhwc { residual: f64 },

    #[error("submanifold is not J-invariant (defect {defect:e})")]
    NotComplexSubmanifold { defect: f64 },

    #[error("grid node ({i}, {j}) escaped the target domain")]
    DomainEscape { i: usize, j: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown {kind} `{name}`")]
    NotFound { kind: String, name: String },

    #[error("sampler rejected too many candidates ({rejected} rejections for {wanted} points)")]
    SamplingExhausted { wanted: usize, rejected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn not_found(kind: &str, name: &str) -> Self {
        Error::NotFound {
            kind: kind.to_string(),
            name: name.to_string(),
        }
    }

    /// Rank failures are the only errors a scenario may convert into excluded points.
    pub fn is_rank_failure(&self) -> bool {
        matches!(self, Error::RankDeficiency { .. })
    }
}
