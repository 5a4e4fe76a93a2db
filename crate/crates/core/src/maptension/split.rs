use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{laplacian_at, v_laplacian_at, MetricField, VectorFieldExpr};
use crate::jetcalc::{Jet1, Real, ScalarExprField};
use crate::linalg::{g_inner, g_norm, gram_schmidt, Mat};

use super::map::{covariant_derivative, v_tension_from, MapJet1Fields, MapPoint, RiemannianMap};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-9;
/// Dilations below this mark a critical point.
pub const CRITICAL_DILATION: f64 = 1e-12;

/// Orthonormal vertical and horizontal frames of a map at a point.
#[derive(Clone, Debug)]
pub struct Split {
    pub rank: usize,
    pub vertical: Vec<DVector<f64>>,
    pub horizontal: Vec<DVector<f64>>,
    /// `g`-orthogonal projector onto the horizontal space.
    pub horizontal_projector: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Set when the rank is below the target dimension.
    pub rank_deficient: bool,
}

/// Singular values are those of `dφ` between `g`- and Euclidean-orthonormal
/// coordinates; frames are Gram–Schmidt of projected coordinate fields taken
/// in order of descending projected length, ties by index.
pub fn vertical_horizontal_split_at(phi: &RiemannianMap, p: &[f64]) -> Result<Split> {
    let g = phi.source().matrix_at(p)?;
    let d = super::differential_at(phi, p)?;
    split_from(&g, &d)
}

pub(crate) fn split_from(g: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<Split> {
    let (n, m) = (d.nrows(), d.ncols());
    crate::linalg::metric_inverse(g)?;
    let chol = g.clone().cholesky().ok_or(Error::SingularMetric {
        condition: f64::INFINITY,
    })?;
    let l = chol.l();
    let l_inv_t = l.transpose().try_inverse().ok_or(Error::SingularMetric {
        condition: f64::INFINITY,
    })?;
    // dφ in g-orthonormal source coordinates y = Lᵀx.
    let dt = (d * &l_inv_t).transpose();
    let svd = dt.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = if smax > 0.0 {
        singular_values
            .iter()
            .filter(|&&s| s > RANK_CUTOFF * smax)
            .count()
    } else {
        0
    };
    let mut ph_y = DMatrix::zeros(m, m);
    for &k in order.iter().take(rank) {
        let c = u.column(k);
        ph_y += c * c.transpose();
    }
    let ph = l_inv_t * ph_y * l.transpose();
    let pv = DMatrix::identity(m, m) - &ph;
    let frame = |proj: &DMatrix<f64>, count: usize| {
        let mut cands: Vec<(usize, DVector<f64>)> =
            (0..m).map(|i| (i, proj.column(i).into_owned())).collect();
        let norms: Vec<f64> = cands.iter().map(|(_, c)| g_norm(g, c)).collect();
        cands.sort_by(|a, b| norms[b.0].total_cmp(&norms[a.0]).then(a.0.cmp(&b.0)));
        let vs: Vec<DVector<f64>> = cands.into_iter().map(|(_, c)| c).collect();
        gram_schmidt(g, &vs, 1e-8, count)
    };
    let horizontal = frame(&ph, rank);
    let vertical = frame(&pv, m - rank);
    Ok(Split {
        rank,
        vertical,
        horizontal,
        horizontal_projector: ph,
        singular_values,
        rank_deficient: rank < n,
    })
}

#[derive(Clone, Debug)]
pub struct HwcReport {
    pub is_hwc: bool,
    pub lambda2: f64,
    /// `max |h(dφE_a, dφE_b) − λ² δ_ab|` over the horizontal frame.
    pub deviation: f64,
    pub rank: usize,
}

pub fn hwc_report_at(phi: &RiemannianMap, p: &[f64], tol: f64) -> Result<HwcReport> {
    let mp = MapPoint::new(phi, p)?;
    hwc_from(&mp, tol)
}

pub(crate) fn hwc_from(mp: &MapPoint, tol: f64) -> Result<HwcReport> {
    let split = split_from(&mp.g, &mp.d)?;
    let n = mp.n();
    let r = split.horizontal.len();
    let images: Vec<DVector<f64>> = split.horizontal.iter().map(|e| &mp.d * e).collect();
    let gram = DMatrix::from_fn(r, r, |a, b| g_inner(&mp.h, &images[a], &images[b]));
    let lambda2 = if n == 0 { 0.0 } else { gram.trace() / n as f64 };
    let deviation = (gram - DMatrix::identity(r, r) * lambda2).amax();
    let is_hwc = (split.rank == 0 || split.rank == n) && deviation < tol;
    Ok(HwcReport {
        is_hwc,
        lambda2,
        deviation,
        rank: split.rank,
    })
}

/// Horizontal part of `Σ_j ∇_{u_j} u_j` for an orthonormal vertical frame `{u_j}`
/// built smoothly around `p`; the trace of the fibre's second fundamental form.
pub fn fibre_mean_curvature_at(phi: &RiemannianMap, p: &[f64]) -> Result<DVector<f64>> {
    let mp = MapPoint::new(phi, p)?;
    fibre_mean_curvature_from(phi, &mp, p)
}

pub(crate) fn fibre_mean_curvature_from(
    phi: &RiemannianMap,
    mp: &MapPoint,
    p: &[f64],
) -> Result<DVector<f64>> {
    let (n, m) = (mp.n(), mp.m());
    let split = split_from(&mp.g, &mp.d)?;
    if split.rank < n {
        return Err(Error::RankDeficiency {
            rank: split.rank,
            expected: n,
        });
    }
    let frame = vertical_frame_jet1(phi, p, m - n)?;
    let mut sum = DVector::zeros(m);
    for u in &frame {
        let x = DVector::from_iterator(m, u.iter().map(|c| c.re));
        sum += covariant_derivative(&mp.gam_m, &x, u);
    }
    Ok(&split.horizontal_projector * sum)
}

/// Orthonormal vertical frame with first derivatives: Gram–Schmidt of the
/// coordinate fields projected onto `ker dφ`.
pub(crate) fn vertical_frame_jet1(
    phi: &RiemannianMap,
    p: &[f64],
    count: usize,
) -> Result<Vec<Vec<Jet1>>> {
    let f = MapJet1Fields::new(phi, p)?;
    let m = phi.source_dim();
    let singular = || Error::SingularMetric {
        condition: f64::INFINITY,
    };
    let ginv = f.g.inverse().ok_or_else(singular)?;
    let ginv_dt = ginv.matmul(&f.d.transpose());
    let a = f.d.matmul(&ginv_dt);
    let rank_err = || Error::RankDeficiency {
        rank: 0,
        expected: phi.target_dim(),
    };
    let ph = ginv_dt.matmul(&a.solve(&f.d).ok_or_else(rank_err)?);
    let pv = Mat::<Jet1>::identity(m).sub(&ph);
    let norm_of = |v: &[Jet1]| crate::linalg::inner(&f.g, v, v).re.max(0.0).sqrt();
    let mut cands: Vec<(usize, Vec<Jet1>, f64)> = (0..m)
        .map(|i| {
            let c = pv.col(i);
            let nv = norm_of(&c);
            (i, c, nv)
        })
        .collect();
    cands.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let mut out: Vec<Vec<Jet1>> = Vec::new();
    for (_, c, n0) in cands {
        if out.len() == count {
            break;
        }
        if n0 == 0.0 {
            continue;
        }
        let mut v = c;
        for e in &out {
            let k = crate::linalg::inner(&f.g, e, &v);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= k * *ei;
            }
        }
        let nrm = crate::linalg::inner(&f.g, &v, &v);
        if nrm.re.max(0.0).sqrt() > 1e-6 * n0 {
            let inv = Real::recip(Real::sqrt(nrm));
            out.push(v.into_iter().map(|c| c * inv).collect());
        }
    }
    if out.len() < count {
        return Err(Error::RankDeficiency {
            rank: m - out.len(),
            expected: phi.target_dim(),
        });
    }
    Ok(out)
}

/// The three residuals of the two-imply-third statement at one point.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TripleResiduals {
    /// `‖τ_V(φ)‖_h`
    pub r1: f64,
    /// `‖(V + ∇ log λ^{2−n})^H‖_g`
    pub r2: f64,
    /// `‖fibre mean curvature‖_g`
    pub r3: f64,
    pub lambda2: f64,
}

/// `Ok(None)` at critical points (`λ²` below [`CRITICAL_DILATION`] or rank loss).
pub fn two_imply_third_at(
    phi: &RiemannianMap,
    v: Option<&VectorFieldExpr>,
    p: &[f64],
    hwc_tol: f64,
) -> Result<Option<TripleResiduals>> {
    let mp = MapPoint::new(phi, p)?;
    let hwc = hwc_from(&mp, hwc_tol)?;
    if !hwc.is_hwc {
        return Err(Error::NotHwc {
            deviation: hwc.deviation,
        });
    }
    if hwc.lambda2 < CRITICAL_DILATION || hwc.rank < mp.n() {
        return Ok(None);
    }
    let n = mp.n();
    let m = mp.m();
    let tv = v_tension_from(&mp, v, p)?;
    let r1 = g_norm(&mp.h, &tv);

    let f = MapJet1Fields::new(phi, p)?;
    let ginv = f.g.inverse().ok_or(Error::SingularMetric {
        condition: f64::INFINITY,
    })?;
    let dd = f.d.matmul(&ginv).matmul(&f.d.transpose()).matmul(&f.h);
    let mut tr = Jet1::constant(0.0);
    for a in 0..n {
        tr += dd.at(a, a);
    }
    let lambda2 = tr / n as f64;
    let dlog = DVector::from_fn(m, |i, _| lambda2.eps[i] / lambda2.re);
    let mut w = &mp.ginv * dlog * ((2.0 - n as f64) / 2.0);
    if let Some(v) = v {
        w += v.at(p)?;
    }
    let split = split_from(&mp.g, &mp.d)?;
    let r2 = g_norm(&mp.g, &(&split.horizontal_projector * w));

    let r3 = match fibre_mean_curvature_from(phi, &mp, p) {
        Ok(h) => g_norm(&mp.g, &h),
        Err(e) if e.is_rank_failure() => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(TripleResiduals {
        r1,
        r2,
        r3,
        lambda2: hwc.lambda2,
    }))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TwoImplyThirdReport {
    pub points: Vec<TripleResiduals>,
    pub excluded: usize,
    pub sup: [f64; 3],
    /// Whether each residual stays below `tol` on the whole sample.
    pub vanishes: [bool; 3],
    /// False only when two conditions hold and the third fails.
    pub consistent: bool,
}

pub fn two_imply_third_report(
    phi: &RiemannianMap,
    v: Option<&VectorFieldExpr>,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<TwoImplyThirdReport> {
    let mut out = Vec::with_capacity(points.len());
    let mut excluded = 0;
    for p in points {
        match two_imply_third_at(phi, v, p, tol)? {
            Some(r) => out.push(r),
            None => excluded += 1,
        }
    }
    let sup = out.iter().fold([0.0f64; 3], |s, r| {
        [s[0].max(r.r1), s[1].max(r.r2), s[2].max(r.r3)]
    });
    let vanishes = [sup[0] < tol, sup[1] < tol, sup[2] < tol];
    let held = vanishes.iter().filter(|&&b| b).count();
    Ok(TwoImplyThirdReport {
        points: out,
        excluded,
        sup,
        vanishes,
        consistent: held != 2,
    })
}

/// `|Δ_V(f∘φ) − λ² (Δf)∘φ|` for a scalar `f` on the target chart.
pub fn dilation_identity_residual_at(
    phi: &RiemannianMap,
    v: Option<&VectorFieldExpr>,
    f: &ScalarExprField,
    p: &[f64],
) -> Result<f64> {
    let mp = MapPoint::new(phi, p)?;
    let n = mp.n();
    let lambda2 = (&mp.d * &mp.ginv * mp.d.transpose() * &mp.h).trace() / n as f64;
    let pulled = f.pullback(phi.map());
    let lhs = v_laplacian_at(&pulled, phi.source(), v, p)?;
    let rhs = lambda2 * laplacian_at(f, phi.target(), &mp.value)?;
    Ok((lhs - rhs).abs())
}

/// Metric of a chart rescaled by `x ↦ c·x`, for tensoriality checks.
pub fn rescaled_metric(g: &MetricField, c: f64) -> MetricField {
    let inner = g.clone();
    let m = g.dim();
    let lo: Vec<f64> = g.domain().lo.iter().map(|v| v * c).collect();
    let hi: Vec<f64> = g.domain().hi.iter().map(|v| v * c).collect();
    let (lo, hi) = if c > 0.0 { (lo, hi) } else { (hi, lo) };
    MetricField::new(
        &format!("{}@{c}", g.name()),
        crate::jetcalc::DomainBox::new(lo, hi),
        move |y| {
            let x: Vec<_> = y.iter().map(|v| *v / c).collect();
            match inner.hyper_matrix(&x) {
                Ok(mat) => mat.data.into_iter().map(|e| e / (c * c)).collect(),
                Err(_) => vec![crate::jetcalc::Hyper::lift(f64::NAN); m * m],
            }
        },
    )
}
