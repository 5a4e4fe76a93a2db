//! Pseudo-horizontal conformality and homothety of maps into Hermitian targets,
//! and the holomorphic-pullback characterisation of V-pseudo harmonic morphisms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{v_laplacian_at, ComplexStructureField, MetricField, VectorFieldExpr};
use crate::jetcalc::{DomainBox, Hyper, Jet1, MapExpr, ScalarExprField};
use crate::linalg::{g_norm, metric_inverse, Mat};
use crate::maptension::{covariant_derivative, split_from, MapJet1Fields, MapPoint, RiemannianMap};

/// Default PHWC precondition tolerance for the PHH residual.
pub const PHWC_TOL: f64 = 1e-8;

/// A map into a Hermitian chart with interleaved complex coordinates.
#[derive(Clone, Debug)]
pub struct HermitianTargetMap {
    inner: RiemannianMap,
    target: ComplexStructureField,
}

impl HermitianTargetMap {
    pub fn new(source: MetricField, target: ComplexStructureField, map: MapExpr) -> Result<Self> {
        let inner = RiemannianMap::new(source, target.metric().clone(), map)?;
        Ok(Self { inner, target })
    }

    pub fn riemannian(&self) -> &RiemannianMap {
        &self.inner
    }

    pub fn target(&self) -> &ComplexStructureField {
        &self.target
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    /// Complex dimension of the target.
    pub fn complex_dim(&self) -> usize {
        self.target.dim() / 2
    }
}

/// `max |∇J|` of a complex structure; zero exactly for Kähler charts.
pub fn kahler_defect_at(n: &ComplexStructureField, p: &[f64]) -> Result<f64> {
    n.kahler_defect_at(p)
}

/// Complex component derivatives `∂_iφ^α = ∂_i u_α + i ∂_i v_α`, shape `n × m`.
fn complex_jacobian(d: &DMatrix<f64>) -> Vec<Vec<Complex64>> {
    let n = d.nrows() / 2;
    (0..n)
        .map(|a| {
            (0..d.ncols())
                .map(|i| Complex64::new(d[(2 * a, i)], d[(2 * a + 1, i)]))
                .collect()
        })
        .collect()
}

/// `max_{α,β} |g^{ij} ∂_iφ^α ∂_jφ^β|`, without conjugation.
pub fn phwc_residual_at(phi: &HermitianTargetMap, p: &[f64]) -> Result<f64> {
    let d = crate::maptension::differential_at(&phi.inner, p)?;
    let ginv = metric_inverse(&phi.inner.source().matrix_at(p)?)?;
    Ok(phwc_from(&d, &ginv))
}

fn phwc_from(d: &DMatrix<f64>, ginv: &DMatrix<f64>) -> f64 {
    let cj = complex_jacobian(d);
    let m = d.ncols();
    let mut worst: f64 = 0.0;
    for a in 0..cj.len() {
        for b in a..cj.len() {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    s += cj[a][i] * cj[b][j] * ginv[(i, j)];
                }
            }
            worst = worst.max(s.norm());
        }
    }
    worst
}

/// `max |[dφ∘dφ*, J]|` at `φ(p)`.
pub fn phwc_commutator_residual_at(phi: &HermitianTargetMap, p: &[f64]) -> Result<f64> {
    let mp = MapPoint::new(&phi.inner, p)?;
    let j = phi.target.j_at(&mp.value)?;
    let c = &mp.d * mp.adjoint();
    Ok((&c * &j - &j * &c).amax())
}

/// PHH residual: `max ‖dφ(∇_{X_a} dφ*(JY_b)) − J dφ(∇_{X_a} dφ*(Y_b))‖_h` over a
/// horizontal orthonormal basis `X_a` and the coordinate sections `Y_b`.
pub fn phh_residual_at(phi: &HermitianTargetMap, p: &[f64], phwc_tol: f64) -> Result<f64> {
    let residual = phwc_residual_at(phi, p)?;
    if !(residual < phwc_tol) {
        return Err(Error::NotPhwc { residual });
    }
    phh_residual_raw_at(phi, p)
}

/// [`phh_residual_at`] without the PHWC precondition.
pub fn phh_residual_raw_at(phi: &HermitianTargetMap, p: &[f64]) -> Result<f64> {
    let mp = MapPoint::new(&phi.inner, p)?;
    let split = split_from(&mp.g, &mp.d)?;
    let fields = MapJet1Fields::new(&phi.inner, p)?;
    let jm = image_j(phi, &fields)?;
    let j0 = jm.values();
    let n2 = mp.n();
    let mut worst: f64 = 0.0;
    for b in 0..n2 {
        let y: Vec<Jet1> = (0..n2)
            .map(|k| Jet1::constant(if k == b { 1.0 } else { 0.0 }))
            .collect();
        let jy = jm.mul_vec(&y);
        let e_y = fields.adjoint_apply(&y)?;
        let e_jy = fields.adjoint_apply(&jy)?;
        for x in &split.horizontal {
            let a = &mp.d * covariant_derivative(&mp.gam_m, x, &e_jy);
            let c = &j0 * (&mp.d * covariant_derivative(&mp.gam_m, x, &e_y));
            worst = worst.max(g_norm(&mp.h, &(a - c)));
        }
    }
    Ok(worst)
}

/// `J` at the image point as a first-order jet in the source coordinates.
fn image_j(phi: &HermitianTargetMap, fields: &MapJet1Fields) -> Result<Mat<Jet1>> {
    let jh = phi.target.j_hyper(&fields.image)?;
    let n2 = phi.target.dim();
    Ok(Mat::from_fn(n2, n2, |a, b| jh.at(a, b).re))
}

/// `max_e ‖dφ(∇_{E'}E') + dφ(∇_E E) − J dφ([E', E])‖_h` with `E = dφ*(e)`,
/// `E' = dφ*(Je)` over the coordinate sections `e`.
pub fn phh_frame_identity_residual_at(phi: &HermitianTargetMap, p: &[f64]) -> Result<f64> {
    let mp = MapPoint::new(&phi.inner, p)?;
    let n2 = mp.n();
    let split = split_from(&mp.g, &mp.d)?;
    if split.rank < n2 {
        return Err(Error::RankDeficiency {
            rank: split.rank,
            expected: n2,
        });
    }
    let fields = MapJet1Fields::new(&phi.inner, p)?;
    let jm = image_j(phi, &fields)?;
    let j0 = jm.values();
    let m = mp.m();
    let mut worst: f64 = 0.0;
    for b in 0..n2 {
        let e: Vec<Jet1> = (0..n2)
            .map(|k| Jet1::constant(if k == b { 1.0 } else { 0.0 }))
            .collect();
        let je = jm.mul_vec(&e);
        let ee = fields.adjoint_apply(&e)?;
        let ep = fields.adjoint_apply(&je)?;
        let val = |w: &[Jet1]| DVector::from_iterator(m, w.iter().map(|c| c.re));
        let (xe, xp) = (val(&ee), val(&ep));
        let nabla_ee = covariant_derivative(&mp.gam_m, &xe, &ee);
        let nabla_pp = covariant_derivative(&mp.gam_m, &xp, &ep);
        let bracket = DVector::from_fn(m, |k, _| {
            let mut s = 0.0;
            for i in 0..m {
                s += xp[i] * ee[k].eps[i] - xe[i] * ep[k].eps[i];
            }
            s
        });
        let r = &mp.d * (nabla_pp + nabla_ee) - &j0 * (&mp.d * bracket);
        worst = worst.max(g_norm(&mp.h, &r));
    }
    Ok(worst)
}

/// A holomorphic function on a complex chart, as real and imaginary parts.
#[derive(Clone, Debug)]
pub struct HolomorphicFunctionExpr {
    re: ScalarExprField,
    im: ScalarExprField,
}

impl HolomorphicFunctionExpr {
    /// `f` returns `(Re, Im)` from interleaved coordinates.
    pub fn new<F>(name: &str, domain: DomainBox, f: F) -> Self
    where
        F: Fn(&[Hyper]) -> (Hyper, Hyper) + Send + Sync + 'static,
    {
        let map = MapExpr::new(name, domain, 2, move |x| {
            let (a, b) = f(x);
            vec![a, b]
        });
        Self {
            re: map.component(0),
            im: map.component(1),
        }
    }

    pub fn name(&self) -> &str {
        self.re.as_map().name()
    }

    pub fn re(&self) -> &ScalarExprField {
        &self.re
    }

    pub fn im(&self) -> &ScalarExprField {
        &self.im
    }

    /// `max_k |∂f/∂z̄_k|` with `∂/∂z̄ = ½(∂_x + i∂_y)`.
    pub fn cr_residual_at(&self, q: &[f64]) -> Result<f64> {
        let u = self.re.as_map().jet1(q)?;
        let v = self.im.as_map().jet1(q)?;
        let (u, v) = (u[0], v[0]);
        let mut worst: f64 = 0.0;
        for k in 0..q.len() / 2 {
            let (x, y) = (2 * k, 2 * k + 1);
            let dzbar = Complex64::new(u.eps[x] - v.eps[y], v.eps[x] + u.eps[y]) * 0.5;
            worst = worst.max(dzbar.norm());
        }
        Ok(worst)
    }
}

/// `|Δ_V(Re f∘φ) + i Δ_V(Im f∘φ)|`.
pub fn holomorphic_pullback_residual(
    phi: &HermitianTargetMap,
    v: Option<&VectorFieldExpr>,
    f: &HolomorphicFunctionExpr,
    p: &[f64],
) -> Result<f64> {
    let map = phi.inner.map();
    let src = phi.inner.source();
    let a = v_laplacian_at(&f.re.pullback(map), src, v, p)?;
    let b = v_laplacian_at(&f.im.pullback(map), src, v, p)?;
    Ok(a.hypot(b))
}

fn cmul(a: (Hyper, Hyper), b: (Hyper, Hyper)) -> (Hyper, Hyper) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// The test family `{z_k} ∪ {z_α z_β : α ≤ β}` on a chart of complex dimension `n`.
pub fn holomorphic_battery(domain: &DomainBox) -> Vec<HolomorphicFunctionExpr> {
    let n = domain.dim() / 2;
    let mut out = Vec::new();
    for k in 0..n {
        out.push(HolomorphicFunctionExpr::new(
            &format!("z{}", k + 1),
            domain.clone(),
            move |x| (x[2 * k], x[2 * k + 1]),
        ));
    }
    for a in 0..n {
        for b in a..n {
            out.push(HolomorphicFunctionExpr::new(
                &format!("z{}z{}", a + 1, b + 1),
                domain.clone(),
                move |x| cmul((x[2 * a], x[2 * a + 1]), (x[2 * b], x[2 * b + 1])),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_c(n: usize, r: f64) -> ComplexStructureField {
        ComplexStructureField::standard(MetricField::flat(2 * n, DomainBox::cube(2 * n, -r, r)))
            .unwrap()
    }

    fn from_flat_plane(
        name: &str,
        f: impl Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync + 'static,
    ) -> HermitianTargetMap {
        let b = DomainBox::cube(2, -1.0, 1.0);
        HermitianTargetMap::new(
            MetricField::flat(2, b.clone()),
            flat_c(1, 10.0),
            MapExpr::new(name, b, 2, f),
        )
        .unwrap()
    }

    #[test]
    fn holomorphic_square_is_phwc() {
        let z2 = from_flat_plane("z2", |x| vec![x[0] * x[0] - x[1] * x[1], x[0] * x[1] * 2.0]);
        let p = [0.3, -0.6];
        assert!(phwc_residual_at(&z2, &p).unwrap() < 1e-12);
        assert!(phwc_commutator_residual_at(&z2, &p).unwrap() < 1e-12);
        assert!(phh_residual_at(&z2, &p, PHWC_TOL).unwrap() < 1e-9);
    }

    #[test]
    fn real_linear_control_gives_three() {
        let f = from_flat_plane("x+2iy", |x| vec![x[0], x[1] * 2.0]);
        let p = [0.1, 0.2];
        // Direct evaluation: (∂_xφ)² + (∂_yφ)² with ∂_xφ = 1, ∂_yφ = 2i.
        let direct = Complex64::new(1.0, 0.0).powi(2) + Complex64::new(0.0, 2.0).powi(2);
        assert!((phwc_residual_at(&f, &p).unwrap() - direct.norm()).abs() < 1e-14);
        assert!((phwc_residual_at(&f, &p).unwrap() - 3.0).abs() < 1e-14);
        assert!(phwc_commutator_residual_at(&f, &p).unwrap() > 1e-3);
        assert!(matches!(
            phh_residual_at(&f, &p, PHWC_TOL),
            Err(Error::NotPhwc { .. })
        ));
    }

    #[test]
    fn constant_map_is_trivially_phwc() {
        let c = from_flat_plane("c", |_| vec![Hyper::lift(0.5), Hyper::lift(0.25)]);
        assert_eq!(phwc_residual_at(&c, &[0.2, 0.2]).unwrap(), 0.0);
        assert_eq!(phwc_commutator_residual_at(&c, &[0.2, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn flat_holomorphic_submersion_frame_identity() {
        let b = DomainBox::cube(4, -1.0, 1.0);
        let map = MapExpr::new("z1+z2^2", b.clone(), 2, |x| {
            let (a, c) = cmul((x[2], x[3]), (x[2], x[3]));
            vec![x[0] + a, x[1] + c]
        });
        let phi = HermitianTargetMap::new(MetricField::flat(4, b), flat_c(1, 10.0), map).unwrap();
        let p = [0.1, 0.2, 0.3, -0.4];
        assert!(phwc_residual_at(&phi, &p).unwrap() < 1e-12);
        assert!(phh_frame_identity_residual_at(&phi, &p).unwrap() < 1e-10);
    }

    #[test]
    fn battery_is_holomorphic() {
        let b = DomainBox::cube(4, -2.0, 2.0);
        let bat = holomorphic_battery(&b);
        assert_eq!(bat.len(), 5);
        for f in &bat {
            assert!(f.cr_residual_at(&[0.3, -0.2, 0.5, 0.9]).unwrap() < 1e-10);
        }
        assert_eq!(holomorphic_battery(&DomainBox::cube(2, -1.0, 1.0)).len(), 2);
        let bad = HolomorphicFunctionExpr::new("zbar", b, |x| (x[0], -x[1]));
        assert!(bad.cr_residual_at(&[0.3, -0.2, 0.5, 0.9]).unwrap() > 0.9);
    }
}
