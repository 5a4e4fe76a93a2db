//! Parametrised submanifolds: induced metric, second fundamental form, mean
//! curvature, V-minimality and the complex-submanifold identity in lcK charts.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    christoffel_at, ChristoffelTensor, LckStructure, MetricField, VectorFieldExpr,
};
use crate::jetcalc::{map_jet, MapExpr};
use crate::linalg::{g_norm, gram_schmidt, metric_inverse, tangent_projector};
use crate::maptension::RANK_CUTOFF;

/// Tolerance of the J-invariance check for complex submanifolds.
pub const COMPLEX_SUBMANIFOLD_TOL: f64 = 1e-8;

/// An immersion `ι: K → M` given on a parameter box.
#[derive(Clone, Debug)]
pub struct ParamSubmanifold {
    ambient: MetricField,
    immersion: MapExpr,
}

impl ParamSubmanifold {
    pub fn new(ambient: MetricField, immersion: MapExpr) -> Result<Self> {
        if immersion.codomain_dim() != ambient.dim() || immersion.domain_dim() > ambient.dim() {
            return Err(Error::Dimension(format!(
                "immersion {} is {}→{}, ambient has dimension {}",
                immersion.name(),
                immersion.domain_dim(),
                immersion.codomain_dim(),
                ambient.dim()
            )));
        }
        Ok(Self { ambient, immersion })
    }

    pub fn ambient(&self) -> &MetricField {
        &self.ambient
    }

    pub fn immersion(&self) -> &MapExpr {
        &self.immersion
    }

    pub fn name(&self) -> &str {
        self.immersion.name()
    }

    pub fn dim(&self) -> usize {
        self.immersion.domain_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }
}

/// Jets of the immersion and ambient geometry at one parameter.
struct SubPoint {
    image: Vec<f64>,
    /// `m × k`
    d: DMatrix<f64>,
    hess: Vec<DMatrix<f64>>,
    g: DMatrix<f64>,
    gam: ChristoffelTensor,
    /// `g`-orthogonal projector onto the tangent space.
    pt: DMatrix<f64>,
}

impl SubPoint {
    fn new(s: &ParamSubmanifold, q: &[f64]) -> Result<Self> {
        let jet = map_jet(&s.immersion, q)?;
        let image: Vec<f64> = jet.value.iter().copied().collect();
        let g = s.ambient.matrix_at(&image)?;
        metric_inverse(&g)?;
        let gam = christoffel_at(&s.ambient, &image)?;
        let d = jet.jac;
        let k = d.ncols();
        let l = g.clone().cholesky().ok_or(Error::SingularMetric {
            condition: f64::INFINITY,
        })?;
        let sv = (l.l().transpose() * &d).singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|&&v| v > RANK_CUTOFF * smax).count();
        if smax == 0.0 || rank < k {
            return Err(Error::RankDeficiency { rank, expected: k });
        }
        let pt = tangent_projector(&g, &d).ok_or(Error::RankDeficiency { rank, expected: k })?;
        Ok(Self {
            image,
            d,
            hess: jet.hess,
            g,
            gam,
            pt,
        })
    }

    fn m(&self) -> usize {
        self.d.nrows()
    }

    fn normal(&self, w: &DVector<f64>) -> DVector<f64> {
        w - &self.pt * w
    }

    /// `A(X, Y)` for parameter vectors `X`, `Y`.
    fn sff(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let m = self.m();
        let k = self.d.ncols();
        let dx = &self.d * x;
        let dy = &self.d * y;
        let mut w = self.gam.contract(dx.as_slice(), dy.as_slice());
        for i in 0..m {
            let mut s = 0.0;
            for a in 0..k {
                for b in 0..k {
                    s += self.hess[i][(a, b)] * x[a] * y[b];
                }
            }
            w[i] += s;
        }
        self.normal(&w)
    }

    fn induced(&self) -> DMatrix<f64> {
        self.d.transpose() * &self.g * &self.d
    }

    fn mean_curvature_with(&self, frame: &[DVector<f64>]) -> DVector<f64> {
        frame
            .iter()
            .fold(DVector::zeros(self.m()), |acc, e| acc + self.sff(e, e))
    }

    fn orthonormal_frame(&self) -> Vec<DVector<f64>> {
        let k = self.d.ncols();
        let ind = self.induced();
        let basis: Vec<DVector<f64>> = (0..k)
            .map(|a| DVector::from_fn(k, |i, _| if i == a { 1.0 } else { 0.0 }))
            .collect();
        gram_schmidt(&ind, &basis, 1e-12, k)
    }
}

pub fn induced_metric_at(s: &ParamSubmanifold, q: &[f64]) -> Result<DMatrix<f64>> {
    Ok(SubPoint::new(s, q)?.induced())
}

/// Normal part of `∇^M_{dιX} dιY`.
pub fn second_fundamental_form_a_at(
    s: &ParamSubmanifold,
    q: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let sp = SubPoint::new(s, q)?;
    if x.len() != s.dim() || y.len() != s.dim() {
        return Err(Error::Dimension(format!(
            "tangent vectors must have length {}",
            s.dim()
        )));
    }
    Ok(sp.sff(x, y))
}

/// `trace A` over an induced-orthonormal frame built in index order.
pub fn mean_curvature_at(s: &ParamSubmanifold, q: &[f64]) -> Result<DVector<f64>> {
    let sp = SubPoint::new(s, q)?;
    let frame = sp.orthonormal_frame();
    Ok(sp.mean_curvature_with(&frame))
}

/// `trace A` over a caller-supplied frame, which should be orthonormal for the induced metric.
pub fn mean_curvature_with_frame(
    s: &ParamSubmanifold,
    q: &[f64],
    frame: &[DVector<f64>],
) -> Result<DVector<f64>> {
    Ok(SubPoint::new(s, q)?.mean_curvature_with(frame))
}

/// Induced-orthonormal frame in parameter coordinates (Gram–Schmidt, index order).
pub fn induced_frame_at(s: &ParamSubmanifold, q: &[f64]) -> Result<Vec<DVector<f64>>> {
    Ok(SubPoint::new(s, q)?.orthonormal_frame())
}

fn ambient_field(v: Option<&VectorFieldExpr>, at: &[f64], m: usize) -> Result<DVector<f64>> {
    match v {
        Some(v) => v.at(at),
        None => Ok(DVector::zeros(m)),
    }
}

/// `‖(trace A − V)^⊥‖_g`.
pub fn v_minimality_residual_at(
    s: &ParamSubmanifold,
    v: Option<&VectorFieldExpr>,
    q: &[f64],
) -> Result<f64> {
    let sp = SubPoint::new(s, q)?;
    let h = sp.mean_curvature_with(&sp.orthonormal_frame());
    let vv = ambient_field(v, &sp.image, sp.m())?;
    Ok(g_norm(&sp.g, &sp.normal(&(h - vv))))
}

/// Distance from `trace A − V` to the tangent space, by least squares in
/// `g`-orthonormal coordinates. Agrees with [`v_minimality_residual_at`].
pub fn v_minimality_tangency_at(
    s: &ParamSubmanifold,
    v: Option<&VectorFieldExpr>,
    q: &[f64],
) -> Result<f64> {
    let sp = SubPoint::new(s, q)?;
    let h = sp.mean_curvature_with(&sp.orthonormal_frame());
    let w = h - ambient_field(v, &sp.image, sp.m())?;
    let lt =
        sp.g.clone()
            .cholesky()
            .ok_or(Error::SingularMetric {
                condition: f64::INFINITY,
            })?
            .l()
            .transpose();
    let a = &lt * &sp.d;
    let b = &lt * &w;
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, RANK_CUTOFF * svd.singular_values.max())
        .map_err(|e| Error::Dimension(e.to_string()))?;
    Ok((a * c - b).norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LckSubmanifoldResiduals {
    /// `‖trace A + n B^⊥‖_g`
    pub r1: f64,
    /// V-minimality residual for `V = −n B`
    pub r2: f64,
    pub trace_norm: f64,
    pub lee_normal_norm: f64,
}

/// `max_a ‖(J dι e_a)^⊥‖_g`.
pub fn j_invariance_defect_at(s: &ParamSubmanifold, l: &LckStructure, q: &[f64]) -> Result<f64> {
    let sp = SubPoint::new(s, q)?;
    let j = l.complex().j_at(&sp.image)?;
    let jd = &j * &sp.d;
    Ok((0..jd.ncols())
        .map(|a| g_norm(&sp.g, &sp.normal(&jd.column(a).into_owned())))
        .fold(0.0, f64::max))
}

/// Residuals of `trace A = −n B^⊥` for a complex submanifold of complex dimension `n`.
pub fn lck_complex_submanifold_residual(
    s: &ParamSubmanifold,
    l: &LckStructure,
    q: &[f64],
) -> Result<LckSubmanifoldResiduals> {
    if l.dim() != s.ambient_dim() {
        return Err(Error::Dimension(format!(
            "lcK structure {} does not live on the ambient chart of {}",
            l.name(),
            s.name()
        )));
    }
    let defect = j_invariance_defect_at(s, l, q)?;
    if !(defect < COMPLEX_SUBMANIFOLD_TOL) || !s.dim().is_multiple_of(2) {
        return Err(Error::NotComplexSubmanifold { defect });
    }
    let n = (s.dim() / 2) as f64;
    let sp = SubPoint::new(s, q)?;
    let h = sp.mean_curvature_with(&sp.orthonormal_frame());
    let b_perp = sp.normal(&l.lee_field_at(&sp.image)?);
    let r1 = g_norm(&sp.g, &(&h + &b_perp * n));
    let r2 = v_minimality_residual_at(s, Some(&l.lee_field_expr(-n)), q)?;
    Ok(LckSubmanifoldResiduals {
        r1,
        r2,
        trace_norm: g_norm(&sp.g, &h),
        lee_normal_norm: g_norm(&sp.g, &b_perp),
    })
}
