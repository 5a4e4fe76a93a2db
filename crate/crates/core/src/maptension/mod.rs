//! Differentials, tension fields and the vertical/horizontal geometry of maps.

mod map;
mod split;

pub use crate::geometry::VectorFieldExpr;
pub use map::{
    adjoint_differential_at, composition_residual_at, differential_at, second_fundamental_form_at,
    tension_at, v_tension_at, RiemannianMap,
};
pub(crate) use map::{covariant_derivative, MapJet1Fields, MapPoint};
pub(crate) use split::split_from;
pub use split::{
    dilation_identity_residual_at, fibre_mean_curvature_at, hwc_report_at, rescaled_metric,
    two_imply_third_at, two_imply_third_report, vertical_horizontal_split_at, HwcReport, Split,
    TripleResiduals, TwoImplyThirdReport, CRITICAL_DILATION, RANK_CUTOFF,
};
