use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    christoffel_at, christoffel_from_jet, metric_jet, ChristoffelTensor, MetricField,
    VectorFieldExpr,
};
use crate::jetcalc::{map_jet, Hyper, Jet1, MapExpr};
use crate::linalg::{g_norm, Mat};

/// A smooth map between two Riemannian charts.
#[derive(Clone, Debug)]
pub struct RiemannianMap {
    source: MetricField,
    target: MetricField,
    map: MapExpr,
}

impl RiemannianMap {
    pub fn new(source: MetricField, target: MetricField, map: MapExpr) -> Result<Self> {
        if map.domain_dim() != source.dim() || map.codomain_dim() != target.dim() {
            return Err(Error::Dimension(format!(
                "map {} is {}→{}, charts are {}→{}",
                map.name(),
                map.domain_dim(),
                map.codomain_dim(),
                source.dim(),
                target.dim()
            )));
        }
        Ok(Self {
            source,
            target,
            map,
        })
    }

    pub fn source(&self) -> &MetricField {
        &self.source
    }

    pub fn target(&self) -> &MetricField {
        &self.target
    }

    pub fn map(&self) -> &MapExpr {
        &self.map
    }

    pub fn name(&self) -> &str {
        self.map.name()
    }

    pub fn source_dim(&self) -> usize {
        self.source.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.target.dim()
    }

    /// `ψ ∘ φ` as a map from `φ`'s source to `ψ`'s target.
    pub fn compose(psi: &RiemannianMap, phi: &RiemannianMap) -> Result<RiemannianMap> {
        if psi.source_dim() != phi.target_dim() {
            return Err(Error::Dimension(format!(
                "cannot compose {} after {}",
                psi.name(),
                phi.name()
            )));
        }
        RiemannianMap::new(
            phi.source.clone(),
            psi.target.clone(),
            MapExpr::compose(&psi.map, &phi.map),
        )
    }
}

/// Everything needed for second-order quantities of a map at one point.
pub(crate) struct MapPoint {
    pub value: Vec<f64>,
    /// `n × m` Jacobian
    pub d: DMatrix<f64>,
    /// `hess[α][(i, j)] = ∂_i∂_j φ^α`
    pub hess: Vec<DMatrix<f64>>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub gam_m: ChristoffelTensor,
    pub h: DMatrix<f64>,
    pub gam_n: ChristoffelTensor,
}

impl MapPoint {
    pub fn new(phi: &RiemannianMap, p: &[f64]) -> Result<Self> {
        let mj = metric_jet(&phi.source, p)?;
        let gam_m = christoffel_from_jet(&mj);
        let jet = map_jet(&phi.map, p)?;
        let value: Vec<f64> = jet.value.iter().copied().collect();
        let gam_n = christoffel_at(&phi.target, &value)?;
        let h = phi.target.matrix_at(&value)?;
        Ok(Self {
            value,
            d: jet.jac,
            hess: jet.hess,
            g: mj.g,
            ginv: mj.ginv,
            gam_m,
            h,
            gam_n,
        })
    }

    pub fn m(&self) -> usize {
        self.d.ncols()
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn nabla_dphi(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.m(), self.n());
        let dx = &self.d * x;
        let dy = &self.d * y;
        let geo = self.gam_m.contract(x.as_slice(), y.as_slice());
        DVector::from_fn(n, |a, _| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += self.hess[a][(i, j)] * x[i] * y[j];
                }
            }
            for k in 0..m {
                s -= geo[k] * self.d[(a, k)];
            }
            s
        }) + self.gam_n.contract(dx.as_slice(), dy.as_slice())
    }

    /// `g^{ij} ∇dφ(∂_i, ∂_j)`.
    pub fn tension(&self) -> DVector<f64> {
        let (m, n) = (self.m(), self.n());
        let dgd = &self.d * &self.ginv * self.d.transpose();
        DVector::from_fn(n, |a, _| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let gij = self.ginv[(i, j)];
                    if gij == 0.0 {
                        continue;
                    }
                    let mut t = self.hess[a][(i, j)];
                    for k in 0..m {
                        t -= self.gam_m.get(k, i, j) * self.d[(a, k)];
                    }
                    s += gij * t;
                }
            }
            for b in 0..n {
                for c in 0..n {
                    s += self.gam_n.get(a, b, c) * dgd[(b, c)];
                }
            }
            s
        })
    }

    pub fn adjoint(&self) -> DMatrix<f64> {
        &self.ginv * self.d.transpose() * &self.h
    }
}

pub fn differential_at(phi: &RiemannianMap, p: &[f64]) -> Result<DMatrix<f64>> {
    Ok(map_jet(&phi.map, p)?.jac)
}

/// `dφ* = g⁻¹ dφᵀ h`, the `g`/`h` adjoint of the differential.
pub fn adjoint_differential_at(phi: &RiemannianMap, p: &[f64]) -> Result<DMatrix<f64>> {
    let d = differential_at(phi, p)?;
    let g = phi.source.matrix_at(p)?;
    let ginv = crate::linalg::metric_inverse(&g)?;
    let value = phi.map.values(p)?;
    let h = phi.target.matrix_at(&value)?;
    Ok(ginv * d.transpose() * h)
}

/// `(∇dφ)(X, Y)`.
pub fn second_fundamental_form_at(
    phi: &RiemannianMap,
    p: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mp = MapPoint::new(phi, p)?;
    check_len(x.len(), mp.m())?;
    check_len(y.len(), mp.m())?;
    Ok(mp.nabla_dphi(x, y))
}

pub fn tension_at(phi: &RiemannianMap, p: &[f64]) -> Result<DVector<f64>> {
    Ok(MapPoint::new(phi, p)?.tension())
}

/// `τ(φ) + dφ(V)`.
pub fn v_tension_at(
    phi: &RiemannianMap,
    v: Option<&VectorFieldExpr>,
    p: &[f64],
) -> Result<DVector<f64>> {
    let mp = MapPoint::new(phi, p)?;
    v_tension_from(&mp, v, p)
}

pub(crate) fn v_tension_from(
    mp: &MapPoint,
    v: Option<&VectorFieldExpr>,
    p: &[f64],
) -> Result<DVector<f64>> {
    let mut t = mp.tension();
    if let Some(v) = v {
        let vp = v.at(p)?;
        check_len(vp.len(), mp.m())?;
        t += &mp.d * vp;
    }
    Ok(t)
}

/// `‖τ_V(ψ∘φ) − dψ(τ_V(φ)) − g^{ij} ∇dψ(dφ ∂_i, dφ ∂_j)‖` in the metric of `ψ`'s target.
pub fn composition_residual_at(
    phi: &RiemannianMap,
    psi: &RiemannianMap,
    v: Option<&VectorFieldExpr>,
    p: &[f64],
) -> Result<f64> {
    let comp = RiemannianMap::compose(psi, phi)?;
    let lhs = v_tension_at(&comp, v, p)?;
    let mp_phi = MapPoint::new(phi, p)?;
    let tv_phi = v_tension_from(&mp_phi, v, p)?;
    let mp_psi = MapPoint::new(psi, &mp_phi.value)?;
    let mut rhs = &mp_psi.d * tv_phi;
    let m = mp_phi.m();
    for i in 0..m {
        for j in 0..m {
            let gij = mp_phi.ginv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let a = mp_phi.d.column(i).into_owned();
            let b = mp_phi.d.column(j).into_owned();
            rhs += mp_psi.nabla_dphi(&a, &b) * gij;
        }
    }
    let comp_value = comp.map.values(p)?;
    let hp = psi.target.matrix_at(&comp_value)?;
    Ok(g_norm(&hp, &(lhs - rhs)))
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "vector of length {got}, expected {want}"
        )))
    }
}

/// First-order jets of `dφ`, `g` and `h∘φ` around `p`, for building smooth
/// frames such as `dφ*(Y)` whose covariant derivatives are needed.
pub(crate) struct MapJet1Fields {
    pub d: Mat<Jet1>,
    pub g: Mat<Jet1>,
    pub h: Mat<Jet1>,
    /// Image point jets (value and first derivatives).
    pub image: Vec<Hyper>,
}

impl MapJet1Fields {
    pub fn new(phi: &RiemannianMap, p: &[f64]) -> Result<Self> {
        let (m, n) = (phi.source_dim(), phi.target_dim());
        let out = phi.map.hyper_at(p)?;
        let d = Mat::from_fn(n, m, |a, i| out[a].eps[i]);
        let g = phi.source.jet1_matrix(p)?;
        // Feed first-order image jets into the target metric.
        let image: Vec<Hyper> = out.iter().map(|o| Hyper::from_jet1(o.re)).collect();
        let hh = phi.target.hyper_matrix(&image)?;
        let h = Mat::from_fn(n, n, |a, b| hh.at(a, b).re);
        Ok(Self { d, g, h, image })
    }

    /// `dφ*(Y)` as a first-order jet field, for `Y` given by its jet components.
    pub fn adjoint_apply(&self, y: &[Jet1]) -> Result<Vec<Jet1>> {
        let hy = self.h.mul_vec(y);
        let dt = self.d.transpose().mul_vec(&hy);
        let sol = self
            .g
            .solve(&Mat::column(&dt))
            .ok_or(Error::SingularMetric {
                condition: f64::INFINITY,
            })?;
        Ok(sol.data)
    }
}

/// `(∇_X W)^k = X^i ∂_i W^k + Γ^k_ij X^i W^j` for a jet-evaluated field `W`.
pub(crate) fn covariant_derivative(
    gam: &ChristoffelTensor,
    x: &DVector<f64>,
    w: &[Jet1],
) -> DVector<f64> {
    let m = w.len();
    let wv: Vec<f64> = w.iter().map(|c| c.re).collect();
    let geo = gam.contract(x.as_slice(), &wv);
    DVector::from_fn(m, |k, _| {
        let mut s = geo[k];
        for i in 0..m {
            s += x[i] * w[k].eps[i];
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::{DomainBox, Real};

    fn flat(m: usize, r: f64) -> MetricField {
        MetricField::flat(m, DomainBox::cube(m, -r, r))
    }

    fn sphere() -> MetricField {
        MetricField::conformal("sphere", DomainBox::cube(2, -4.0, 4.0), |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            4.0 / ((r2 + 1.0) * (r2 + 1.0))
        })
    }

    #[test]
    fn basic_differentials() {
        let b = DomainBox::cube(3, -1.0, 1.0);
        let id = RiemannianMap::new(
            flat(3, 1.0),
            flat(3, 2.0),
            MapExpr::new("id", b.clone(), 3, |x| x.to_vec()),
        )
        .unwrap();
        let p = [0.1, 0.2, 0.3];
        assert_eq!(differential_at(&id, &p).unwrap(), DMatrix::identity(3, 3));
        let cst = RiemannianMap::new(
            flat(3, 1.0),
            flat(2, 2.0),
            MapExpr::new("c", b.clone(), 2, |_| vec![Hyper::lift(0.5); 2]),
        )
        .unwrap();
        assert_eq!(differential_at(&cst, &p).unwrap(), DMatrix::zeros(2, 3));
        let proj = RiemannianMap::new(
            flat(3, 1.0),
            flat(2, 2.0),
            MapExpr::new("pr", b, 2, |x| x[..2].to_vec()),
        )
        .unwrap();
        let d = differential_at(&proj, &p).unwrap();
        assert_eq!(
            d,
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert_eq!(adjoint_differential_at(&proj, &p).unwrap(), d.transpose());
    }

    #[test]
    fn tension_of_scalar_functions() {
        let b = DomainBox::cube(2, -2.0, 2.0);
        let harm = RiemannianMap::new(
            flat(2, 2.0),
            flat(1, 10.0),
            MapExpr::new("h", b.clone(), 1, |x| vec![x[0] * x[0] - x[1] * x[1]]),
        )
        .unwrap();
        assert_eq!(tension_at(&harm, &[0.3, 0.7]).unwrap()[0], 0.0);
        let sq = RiemannianMap::new(
            flat(2, 2.0),
            flat(1, 10.0),
            MapExpr::new("sq", b, 1, |x| vec![x[0] * x[0]]),
        )
        .unwrap();
        assert_eq!(tension_at(&sq, &[0.3, 0.7]).unwrap()[0], 2.0);
    }

    #[test]
    fn identity_of_curved_chart_is_harmonic_and_transports_v() {
        let s = sphere();
        let id = RiemannianMap::new(
            s.clone(),
            s,
            MapExpr::new("id", DomainBox::cube(2, -4.0, 4.0), 2, |x| x.to_vec()),
        )
        .unwrap();
        let p = [0.8, -1.1];
        assert!(tension_at(&id, &p).unwrap().amax() < 1e-13);
        let v = VectorFieldExpr::new("v", DomainBox::cube(2, -4.0, 4.0), |x| {
            vec![x[1], x[0] * 0.5]
        });
        let tv = v_tension_at(&id, Some(&v), &p).unwrap();
        assert!((tv - v.at(&p).unwrap()).amax() < 1e-13);
        assert_eq!(
            tension_at(&id, &p).unwrap(),
            v_tension_at(&id, None, &p).unwrap()
        );
    }

    #[test]
    fn great_circle_is_geodesic() {
        // The x-axis is a great circle of the stereographic sphere; arc length s ↦ tan(s/2).
        let curve = MapExpr::new("gc", DomainBox::cube(1, -2.0, 2.0), 2, |x| {
            vec![(x[0] * 0.5).tan(), Hyper::lift(0.0)]
        });
        let gamma = RiemannianMap::new(flat(1, 2.0), sphere(), curve).unwrap();
        let e = DVector::from_vec(vec![1.0]);
        let a = second_fundamental_form_at(&gamma, &[0.7], &e, &e).unwrap();
        assert!(a.amax() < 1e-14);
    }

    #[test]
    fn affine_composition_transports_tension() {
        let b = DomainBox::cube(2, -1.0, 1.0);
        let phi = RiemannianMap::new(
            flat(2, 1.0),
            flat(2, 5.0),
            MapExpr::new("phi", b, 2, |x| vec![x[0] * x[1] + x[0].sin(), x[1].exp()]),
        )
        .unwrap();
        let psi = RiemannianMap::new(
            flat(2, 5.0),
            flat(2, 50.0),
            MapExpr::new("A", DomainBox::cube(2, -5.0, 5.0), 2, |y| {
                vec![y[0] * 2.0 + y[1] + 1.0, y[1] * 3.0 - y[0]]
            }),
        )
        .unwrap();
        let v = VectorFieldExpr::constant("v", DomainBox::cube(2, -1.0, 1.0), vec![0.3, -0.2]);
        let p = [0.2, -0.4];
        assert!(composition_residual_at(&phi, &psi, Some(&v), &p).unwrap() < 1e-12);
        let id = RiemannianMap::new(
            flat(2, 5.0),
            flat(2, 5.0),
            MapExpr::new("id", DomainBox::cube(2, -5.0, 5.0), 2, |y| y.to_vec()),
        )
        .unwrap();
        assert_eq!(
            composition_residual_at(&phi, &id, Some(&v), &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn jet1_adjoint_matches_pointwise_adjoint() {
        let phi = RiemannianMap::new(
            sphere(),
            sphere(),
            MapExpr::new("z2", DomainBox::cube(2, -1.5, 1.5), 2, |x| {
                vec![x[0] * x[0] - x[1] * x[1], x[0] * x[1] * 2.0]
            }),
        )
        .unwrap();
        let p = [0.4, 0.3];
        let f = MapJet1Fields::new(&phi, &p).unwrap();
        let y = [Jet1::cst(1.0), Jet1::cst(-2.0)];
        let e = f.adjoint_apply(&y).unwrap();
        let adj = adjoint_differential_at(&phi, &p).unwrap();
        let want = adj * DVector::from_vec(vec![1.0, -2.0]);
        for k in 0..2 {
            assert!((e[k].re - want[k]).abs() < 1e-13);
        }
    }
}
