use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jetcalc::{DomainBox, Hyper, Jet1, MapExpr, MapFn, ScalarExprField};
use crate::linalg::{metric_inverse, sym_eigenvalues, Mat};

/// Symmetric positive-definite matrix field on a chart.
#[derive(Clone, Debug)]
pub struct MetricField {
    dim: usize,
    expr: MapExpr,
}

impl MetricField {
    /// `f` returns all `dim²` entries in row-major order.
    pub fn new<F>(name: &str, domain: DomainBox, f: F) -> Self
    where
        F: Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync + 'static,
    {
        let dim = domain.dim();
        Self {
            dim,
            expr: MapExpr::new(name, domain, dim * dim, f),
        }
    }

    pub fn flat(dim: usize, domain: DomainBox) -> Self {
        assert_eq!(domain.dim(), dim);
        Self::new(&format!("flat{dim}"), domain, move |_| {
            let mut v = vec![Hyper::lift(0.0); dim * dim];
            for i in 0..dim {
                v[i * dim + i] = Hyper::lift(1.0);
            }
            v
        })
    }

    /// `factor(x) · δ`.
    pub fn conformal<F>(name: &str, domain: DomainBox, factor: F) -> Self
    where
        F: Fn(&[Hyper]) -> Hyper + Send + Sync + 'static,
    {
        let dim = domain.dim();
        Self::new(name, domain, move |x| {
            let c = factor(x);
            let mut v = vec![Hyper::lift(0.0); dim * dim];
            for i in 0..dim {
                v[i * dim + i] = c;
            }
            v
        })
    }

    /// Diagonal metric from per-axis coefficients.
    pub fn diagonal<F>(name: &str, domain: DomainBox, diag: F) -> Self
    where
        F: Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync + 'static,
    {
        let dim = domain.dim();
        Self::new(name, domain, move |x| {
            let d = diag(x);
            let mut v = vec![Hyper::lift(0.0); dim * dim];
            for i in 0..dim {
                v[i * dim + i] = d[i];
            }
            v
        })
    }

    /// Block-diagonal `a ⊕ b` on the product chart.
    pub fn product(name: &str, a: &MetricField, b: &MetricField) -> Self {
        let (da, db) = (a.dim, b.dim);
        let dim = da + db;
        let (ea, eb) = (a.expr.clone(), b.expr.clone());
        let domain = a.domain().product(b.domain());
        let fa: Arc<MapFn> = Arc::new(move |x| {
            ea.eval_hyper(x)
                .unwrap_or_else(|_| vec![Hyper::lift(f64::NAN); da * da])
        });
        let fb: Arc<MapFn> = Arc::new(move |x| {
            eb.eval_hyper(x)
                .unwrap_or_else(|_| vec![Hyper::lift(f64::NAN); db * db])
        });
        Self::new(name, domain, move |x| {
            let ga = fa(&x[..da]);
            let gb = fb(&x[da..]);
            let mut v = vec![Hyper::lift(0.0); dim * dim];
            for i in 0..da {
                for j in 0..da {
                    v[i * dim + j] = ga[i * da + j];
                }
            }
            for i in 0..db {
                for j in 0..db {
                    v[(da + i) * dim + da + j] = gb[i * db + j];
                }
            }
            v
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        self.expr.name()
    }

    pub fn domain(&self) -> &DomainBox {
        self.expr.domain()
    }

    pub fn expr(&self) -> &MapExpr {
        &self.expr
    }

    pub fn matrix_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let v = self.expr.values(p)?;
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &v))
    }

    /// Metric evaluated on jet inputs (for instance at the image of a map).
    pub fn hyper_matrix(&self, x: &[Hyper]) -> Result<Mat<Hyper>> {
        let v = self.expr.eval_hyper(x)?;
        Ok(Mat::from_row_major(self.dim, self.dim, v))
    }

    /// Metric with first derivatives in the chart's own coordinates.
    pub fn jet1_matrix(&self, p: &[f64]) -> Result<Mat<Jet1>> {
        let v = self.expr.jet1(p)?;
        Ok(Mat::from_row_major(self.dim, self.dim, v))
    }

    /// Symmetry defect and smallest eigenvalue at `p`.
    pub fn check_at(&self, p: &[f64]) -> Result<MetricCheck> {
        let g = self.matrix_at(p)?;
        let asym = (&g - g.transpose()).amax();
        let min_eigenvalue = sym_eigenvalues(&(0.5 * (&g + g.transpose())))[0];
        Ok(MetricCheck {
            asymmetry: asym,
            min_eigenvalue,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MetricCheck {
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
}

impl MetricCheck {
    pub fn is_valid(&self) -> bool {
        self.asymmetry <= 1e-12 && self.min_eigenvalue > 1e-10
    }
}

/// Christoffel symbols `Γ^k_ij` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelTensor {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ij`.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Γ(X, Y)^k = Γ^k_ij X^i Y^j`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn lower_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Metric value, inverse and first derivatives `∂_k g_ij` at a point.
pub(crate) struct MetricJet {
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `dg[k][(i, j)] = ∂_k g_ij`
    pub dg: Vec<DMatrix<f64>>,
}

pub(crate) fn metric_jet(metric: &MetricField, p: &[f64]) -> Result<MetricJet> {
    let m = metric.dim();
    if p.len() != m {
        return Err(Error::Dimension(format!(
            "metric {} has dimension {m}, point has {}",
            metric.name(),
            p.len()
        )));
    }
    let jm = metric.jet1_matrix(p)?;
    let g = jm.values();
    let ginv = metric_inverse(&g)?;
    let dg = (0..m)
        .map(|k| DMatrix::from_fn(m, m, |i, j| jm.at(i, j).eps[k]))
        .collect();
    Ok(MetricJet { g, ginv, dg })
}

pub(crate) fn christoffel_from_jet(mj: &MetricJet) -> ChristoffelTensor {
    let m = mj.g.nrows();
    let mut gam = ChristoffelTensor::zeros(m);
    for k in 0..m {
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for l in 0..m {
                    let gkl = mj.ginv[(k, l)];
                    if gkl == 0.0 {
                        continue;
                    }
                    s += gkl * (mj.dg[i][(j, l)] + mj.dg[j][(i, l)] - mj.dg[l][(i, j)]);
                }
                gam.set(k, i, j, 0.5 * s);
                gam.set(k, j, i, 0.5 * s);
            }
        }
    }
    gam
}

/// Levi-Civita Christoffel symbols from the jets of `g`.
pub fn christoffel_at(metric: &MetricField, p: &[f64]) -> Result<ChristoffelTensor> {
    Ok(christoffel_from_jet(&metric_jet(metric, p)?))
}

/// `max |∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il|`, zero for a metric-compatible connection.
pub fn metric_compat_residual_at(metric: &MetricField, p: &[f64]) -> Result<f64> {
    let mj = metric_jet(metric, p)?;
    let gam = christoffel_from_jet(&mj);
    let m = metric.dim();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut r = mj.dg[k][(i, j)];
                for l in 0..m {
                    r -= gam.get(l, k, i) * mj.g[(l, j)] + gam.get(l, k, j) * mj.g[(i, l)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

/// A tangent vector field on a chart.
#[derive(Clone, Debug)]
pub struct VectorFieldExpr(MapExpr);

impl VectorFieldExpr {
    pub fn new<F>(name: &str, domain: DomainBox, f: F) -> Self
    where
        F: Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync + 'static,
    {
        let m = domain.dim();
        Self(MapExpr::new(name, domain, m, f))
    }

    pub fn from_map(map: MapExpr) -> Self {
        assert_eq!(map.domain_dim(), map.codomain_dim());
        Self(map)
    }

    pub fn zero(domain: DomainBox) -> Self {
        let m = domain.dim();
        Self::new("zero", domain, move |_| vec![Hyper::lift(0.0); m])
    }

    pub fn constant(name: &str, domain: DomainBox, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), domain.dim());
        Self::new(name, domain, move |_| {
            v.iter().map(|c| Hyper::lift(*c)).collect()
        })
    }

    /// `c · self`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.0.clone();
        let m = self.dim();
        Self::new(
            &format!("{c}*{}", self.name()),
            self.0.domain().clone(),
            move |x| match inner.eval_hyper(x) {
                Ok(v) => v.into_iter().map(|e| e * c).collect(),
                Err(_) => vec![Hyper::lift(f64::NAN); m],
            },
        )
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }

    pub fn dim(&self) -> usize {
        self.0.domain_dim()
    }

    pub fn expr(&self) -> &MapExpr {
        &self.0
    }

    pub fn at(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.0.values(p)?))
    }
}

/// Laplace–Beltrami `g^{ij}(∂_i∂_j f − Γ^k_ij ∂_k f)`.
pub fn laplacian_at(f: &ScalarExprField, metric: &MetricField, p: &[f64]) -> Result<f64> {
    v_laplacian_at(f, metric, None, p)
}

/// Drifted Laplacian `Δf + g(V, ∇f) = Δf + V^i ∂_i f`.
pub fn v_laplacian_at(
    f: &ScalarExprField,
    metric: &MetricField,
    v: Option<&VectorFieldExpr>,
    p: &[f64],
) -> Result<f64> {
    let jf = crate::jetcalc::jet2_eval(f, p)?;
    let mj = metric_jet(metric, p)?;
    let gam = christoffel_from_jet(&mj);
    let m = p.len();
    let mut lap = 0.0;
    for i in 0..m {
        for j in 0..m {
            let gij = mj.ginv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let mut t = jf.hess[(i, j)];
            for k in 0..m {
                t -= gam.get(k, i, j) * jf.grad[k];
            }
            lap += gij * t;
        }
    }
    if let Some(v) = v {
        let vp = v.at(p)?;
        lap += vp.dot(&jf.grad);
    }
    Ok(lap)
}
