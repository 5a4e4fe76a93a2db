use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::jetcalc::{Hyper, MapExpr, Real};
use crate::linalg::{metric_inverse, Mat};

use super::complex::ComplexStructureField;
use super::metric::VectorFieldExpr;

/// Hermitian structure with a Lee form `ω`, locally conformally Kähler when
/// `dΩ = ω ∧ Ω` and `dω = 0`.
#[derive(Clone, Debug)]
pub struct LckStructure {
    complex: ComplexStructureField,
    lee: MapExpr,
}

impl LckStructure {
    pub fn new(complex: ComplexStructureField, lee: MapExpr) -> Result<Self> {
        let m = complex.dim();
        if lee.domain_dim() != m || lee.codomain_dim() != m {
            return Err(Error::Dimension(format!(
                "Lee form {} does not match structure {} of dimension {m}",
                lee.name(),
                complex.name()
            )));
        }
        Ok(Self { complex, lee })
    }

    pub fn complex(&self) -> &ComplexStructureField {
        &self.complex
    }

    pub fn lee_form(&self) -> &MapExpr {
        &self.lee
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn name(&self) -> &str {
        self.complex.name()
    }

    /// Lee vector field `B = g⁻¹ ω` at a point.
    pub fn lee_field_at(&self, p: &[f64]) -> Result<DVector<f64>> {
        let g = self.complex.metric().matrix_at(p)?;
        let ginv = metric_inverse(&g)?;
        let w = DVector::from_vec(self.lee.values(p)?);
        Ok(ginv * w)
    }

    /// `scale · B` as a differentiable field.
    pub fn lee_field_expr(&self, scale: f64) -> VectorFieldExpr {
        let metric = self.complex.metric().clone();
        let lee = self.lee.clone();
        let m = self.dim();
        VectorFieldExpr::new(
            &format!("{scale}*B[{}]", self.name()),
            metric.domain().clone(),
            move |x| {
                let solved = (|| -> Option<Vec<Hyper>> {
                    let g = metric.hyper_matrix(x).ok()?;
                    let w = lee.eval_hyper(x).ok()?;
                    let b = g.solve(&Mat::column(&w))?;
                    Some(b.data.into_iter().map(|v| v * scale).collect())
                })();
                solved.unwrap_or_else(|| vec![Hyper::lift(f64::NAN); m])
            },
        )
    }

    /// `max_{i<j<k} |(dΩ − ω ∧ Ω)_ijk|`.
    pub fn lck_defect_at(&self, p: &[f64]) -> Result<f64> {
        let m = self.dim();
        let om = self.complex.fundamental_form_jet1(p)?;
        let w = self.lee.values(p)?;
        let d = |i: usize, j: usize, k: usize| om.at(j, k).eps[i];
        let o = |i: usize, j: usize| om.at(i, j).re;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let d_omega = d(i, j, k) - d(j, i, k) + d(k, i, j);
                    let wedge = w[i] * o(j, k) - w[j] * o(i, k) + w[k] * o(i, j);
                    worst = worst.max((d_omega - wedge).abs());
                }
            }
        }
        Ok(worst)
    }

    /// `max |∂_i ω_j − ∂_j ω_i|`.
    pub fn lee_closedness_at(&self, p: &[f64]) -> Result<f64> {
        let m = self.dim();
        let w = self.lee.jet1(p)?;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                worst = worst.max((w[j].eps[i] - w[i].eps[j]).abs());
            }
        }
        Ok(worst)
    }
}

/// Hopf structure on `C^n \ {0}`: `g = δ/|z|²`, standard `J`, `ω = −d log |z|²`.
/// `lee_sign = 1` gives the genuine Lee form.
pub fn hopf_structure(n_complex: usize, radius: f64, lee_sign: f64) -> LckStructure {
    use super::metric::MetricField;
    use crate::jetcalc::DomainBox;
    let m = 2 * n_complex;
    let domain = DomainBox::cube(m, -radius, radius);
    let metric = MetricField::conformal(&format!("hopf{n_complex}"), domain.clone(), |x| {
        let r2 = x.iter().fold(Hyper::lift(0.0), |s, v| s + *v * *v);
        r2.recip()
    });
    let lee = MapExpr::new(&format!("lee{n_complex}"), domain, m, move |x| {
        let r2 = x.iter().fold(Hyper::lift(0.0), |s, v| s + *v * *v);
        x.iter().map(|v| *v * (-2.0 * lee_sign) / r2).collect()
    });
    let cs = ComplexStructureField::standard(metric).expect("even dimension");
    LckStructure::new(cs, lee).expect("matching dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_is_lck_with_radial_lee_field() {
        let s = hopf_structure(2, 2.0, 1.0);
        let p = [0.3, -0.5, 0.7, 0.2];
        assert!(s.lck_defect_at(&p).unwrap() < 1e-12);
        assert!(s.lee_closedness_at(&p).unwrap() < 1e-12);
        let b = s.lee_field_at(&p).unwrap();
        for i in 0..4 {
            assert!((b[i] + 2.0 * p[i]).abs() < 1e-12);
        }
        let be = s.lee_field_expr(-1.0).at(&p).unwrap();
        for i in 0..4 {
            assert!((be[i] - 2.0 * p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_sign_lee_form_fails() {
        let s = hopf_structure(2, 2.0, -1.0);
        assert!(s.lck_defect_at(&[0.3, -0.5, 0.7, 0.2]).unwrap() > 1e-4);
    }
}
