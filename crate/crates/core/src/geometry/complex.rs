use nalgebra::DMatrix;

use crate::error::{Error, Result};
#[cfg(test)]
use crate::jetcalc::Real;
use crate::jetcalc::{Hyper, Jet1, MapExpr};
use crate::linalg::Mat;

use super::metric::{christoffel_from_jet, metric_jet, MetricField};

/// The standard complex structure on interleaved coordinates `(x1, y1, x2, y2, …)`:
/// `J ∂x = ∂y`, `J ∂y = −∂x`.
pub fn standard_j(dim: usize) -> DMatrix<f64> {
    assert!(
        dim.is_multiple_of(2),
        "complex structure needs even dimension"
    );
    let mut j = DMatrix::zeros(dim, dim);
    for a in 0..dim / 2 {
        j[(2 * a + 1, 2 * a)] = 1.0;
        j[(2 * a, 2 * a + 1)] = -1.0;
    }
    j
}

/// Almost complex structure together with a compatible metric.
#[derive(Clone, Debug)]
pub struct ComplexStructureField {
    metric: MetricField,
    j: MapExpr,
}

impl ComplexStructureField {
    /// `j` returns the `dim²` entries of `J^a_b` in row-major order.
    pub fn new(metric: MetricField, j: MapExpr) -> Result<Self> {
        let m = metric.dim();
        if !m.is_multiple_of(2) || j.domain_dim() != m || j.codomain_dim() != m * m {
            return Err(Error::Dimension(format!(
                "complex structure {} does not match metric {} of dimension {m}",
                j.name(),
                metric.name()
            )));
        }
        Ok(Self { metric, j })
    }

    pub fn standard(metric: MetricField) -> Result<Self> {
        let m = metric.dim();
        if !m.is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "metric {} has odd dimension {m}",
                metric.name()
            )));
        }
        let jm = standard_j(m);
        let entries: Vec<f64> = (0..m * m).map(|k| jm[(k / m, k % m)]).collect();
        let j = MapExpr::new("J0", metric.domain().clone(), m * m, move |_| {
            entries.iter().map(|&v| Hyper::lift(v)).collect()
        });
        Self::new(metric, j)
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn name(&self) -> &str {
        self.metric.name()
    }

    pub fn j_expr(&self) -> &MapExpr {
        &self.j
    }

    pub fn j_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.dim();
        Ok(DMatrix::from_row_slice(m, m, &self.j.values(p)?))
    }

    pub fn j_hyper(&self, x: &[Hyper]) -> Result<Mat<Hyper>> {
        let m = self.dim();
        Ok(Mat::from_row_major(m, m, self.j.eval_hyper(x)?))
    }

    pub fn j_jet1(&self, p: &[f64]) -> Result<Mat<Jet1>> {
        let m = self.dim();
        Ok(Mat::from_row_major(m, m, self.j.jet1(p)?))
    }

    /// `(‖J² + I‖_max, ‖Jᵀ g J − g‖_max)`.
    pub fn structure_defects_at(&self, p: &[f64]) -> Result<(f64, f64)> {
        let j = self.j_at(p)?;
        let g = self.metric.matrix_at(p)?;
        let m = self.dim();
        let sq = (&j * &j + DMatrix::identity(m, m)).amax();
        let compat = (j.transpose() * &g * &j - g).amax();
        Ok((sq, compat))
    }

    /// `max |(∇_k J)^a_b|`; zero exactly when the structure is Kähler.
    pub fn kahler_defect_at(&self, p: &[f64]) -> Result<f64> {
        let m = self.dim();
        let mj = metric_jet(&self.metric, p)?;
        let gam = christoffel_from_jet(&mj);
        let jj = self.j_jet1(p)?;
        let mut worst: f64 = 0.0;
        for k in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut r = jj.at(a, b).eps[k];
                    for c in 0..m {
                        r += gam.get(a, k, c) * jj.at(c, b).re - jj.at(a, c).re * gam.get(c, k, b);
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    }

    /// Fundamental 2-form `Ω_ab = g_ac J^c_b` with first derivatives.
    pub fn fundamental_form_jet1(&self, p: &[f64]) -> Result<Mat<Jet1>> {
        let g = self.metric.jet1_matrix(p)?;
        let j = self.j_jet1(p)?;
        Ok(g.matmul(&j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::DomainBox;

    #[test]
    fn standard_j_squares_to_minus_one() {
        let j = standard_j(4);
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(4, 4));
        // J ∂x1 = ∂y1
        assert_eq!(j[(1, 0)], 1.0);
    }

    #[test]
    fn flat_and_conformal_structures() {
        let flat =
            ComplexStructureField::standard(MetricField::flat(4, DomainBox::cube(4, -1.0, 1.0)))
                .unwrap();
        let p = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(flat.structure_defects_at(&p).unwrap(), (0.0, 0.0));
        assert_eq!(flat.kahler_defect_at(&p).unwrap(), 0.0);

        // Complex dimension one: every conformal metric is Kähler.
        let sph = MetricField::conformal("sphere", DomainBox::cube(2, -4.0, 4.0), |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            4.0 / ((r2 + 1.0) * (r2 + 1.0))
        });
        let cs = ComplexStructureField::standard(sph).unwrap();
        assert!(cs.kahler_defect_at(&[0.7, -1.3]).unwrap() < 1e-14);

        // Complex dimension two with a non-constant factor: not Kähler.
        let hopf = MetricField::conformal("hopf", DomainBox::cube(4, -2.0, 2.0), |x| {
            let r2 = x.iter().fold(Hyper::lift(0.0), |s, v| s + *v * *v);
            r2.recip()
        });
        let cs = ComplexStructureField::standard(hopf).unwrap();
        assert!(cs.kahler_defect_at(&p).unwrap() > 1e-2);
    }
}
