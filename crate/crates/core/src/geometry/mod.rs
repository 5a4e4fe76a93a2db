//! Metrics, connections and complex structures on coordinate charts.

mod complex;
mod lck;
mod metric;

pub use complex::{standard_j, ComplexStructureField};
pub use lck::{hopf_structure, LckStructure};
pub use metric::{
    christoffel_at, laplacian_at, metric_compat_residual_at, v_laplacian_at, ChristoffelTensor,
    MetricCheck, MetricField, VectorFieldExpr,
};
pub(crate) use metric::{christoffel_from_jet, metric_jet};
