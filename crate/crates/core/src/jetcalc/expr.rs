//! Coordinate expressions and their order-2 jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dual::{Hyper, Jet1, Real, MAX_VARS};
use crate::error::{Error, Result};

/// Open axis-aligned box `lo_i < x_i < hi_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds must have equal length");
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "empty box");
        Self { lo, hi }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *a < *x && *x < *b)
    }

    /// `p ± margin` stays inside the box along every axis.
    pub fn contains_with_margin(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *a < *x - margin && *x + margin < *b)
    }

    /// Cartesian product with another box.
    pub fn product(&self, other: &DomainBox) -> DomainBox {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        DomainBox { lo, hi }
    }
}

pub type MapFn = dyn Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync;

/// A smooth map between coordinate charts, registered as a pure callable
/// over second-order jets.
#[derive(Clone)]
pub struct MapExpr {
    name: Arc<str>,
    domain: DomainBox,
    codomain_dim: usize,
    f: Arc<MapFn>,
}

impl fmt::Debug for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapExpr")
            .field("name", &self.name)
            .field("domain_dim", &self.domain_dim())
            .field("codomain_dim", &self.codomain_dim)
            .finish()
    }
}

/// Value, Jacobian (`n × m`) and per-component Hessians (`m × m`).
#[derive(Clone, Debug)]
pub struct MapJet {
    pub value: DVector<f64>,
    pub jac: DMatrix<f64>,
    pub hess: Vec<DMatrix<f64>>,
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn hessian_asymmetry(&self) -> f64 {
        let h = &self.hess;
        let mut worst: f64 = 0.0;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
            }
        }
        worst
    }
}

impl MapExpr {
    pub fn new<F>(name: &str, domain: DomainBox, codomain_dim: usize, f: F) -> Self
    where
        F: Fn(&[Hyper]) -> Vec<Hyper> + Send + Sync + 'static,
    {
        assert!(domain.dim() <= MAX_VARS, "at most {MAX_VARS} variables");
        Self {
            name: name.into(),
            domain,
            codomain_dim,
            f: Arc::new(f),
        }
    }

    /// Assemble a map from scalar component fields sharing one domain.
    pub fn from_components(
        name: &str,
        domain: DomainBox,
        components: Vec<ScalarExprField>,
    ) -> Self {
        let n = components.len();
        Self::new(name, domain, n, move |x| {
            components.iter().map(|c| (c.inner.f)(x)[0]).collect()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        assert_eq!(domain.dim(), self.domain.dim());
        self.domain = domain;
        self
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if !self.domain.contains(p) {
            return Err(Error::Domain {
                what: self.name.to_string(),
                point: p.to_vec(),
            });
        }
        Ok(())
    }

    /// Evaluate on arbitrary jet inputs; the domain is checked on the input values.
    pub fn eval_hyper(&self, x: &[Hyper]) -> Result<Vec<Hyper>> {
        if x.len() != self.domain_dim() {
            return Err(Error::Dimension(format!(
                "{} expects {} inputs, got {}",
                self.name,
                self.domain_dim(),
                x.len()
            )));
        }
        let vals: Vec<f64> = x.iter().map(|v| v.value()).collect();
        self.check_point(&vals)?;
        let out = (self.f)(x);
        if out.len() != self.codomain_dim {
            return Err(Error::Dimension(format!(
                "{} declared {} components but produced {}",
                self.name,
                self.codomain_dim,
                out.len()
            )));
        }
        Ok(out)
    }

    fn finite_or_err(&self, p: &[f64], out: &[Hyper]) -> Result<()> {
        let m = self.domain_dim();
        let finite = out.iter().all(|r| {
            r.re.re.is_finite()
                && (0..m).all(|i| r.re.eps[i].is_finite())
                && (0..m).all(|i| (0..m).all(|j| r.eps[i].eps[j].is_finite()))
        });
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: self.name.to_string(),
                point: p.to_vec(),
            })
        }
    }

    /// Plain values.
    pub fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        let x: Vec<Hyper> = p.iter().map(|&v| Hyper::lift(v)).collect();
        let out = self.eval_hyper(&x)?;
        let vals: Vec<f64> = out.iter().map(|r| r.re.re).collect();
        if vals.iter().all(|v| v.is_finite()) {
            Ok(vals)
        } else {
            Err(Error::NonFinite {
                what: self.name.to_string(),
                point: p.to_vec(),
            })
        }
    }

    /// First-order jets of every component (value and gradient).
    pub fn jet1(&self, p: &[f64]) -> Result<Vec<Jet1>> {
        let m = p.len();
        let x: Vec<Hyper> = (0..m).map(|i| Hyper::seed_first(p[i], i, m)).collect();
        let out = self.eval_hyper(&x)?;
        let res: Vec<Jet1> = out.iter().map(|r| r.re).collect();
        let finite = res
            .iter()
            .all(|j| j.re.is_finite() && (0..m).all(|i| j.eps[i].is_finite()));
        if finite {
            Ok(res)
        } else {
            Err(Error::NonFinite {
                what: self.name.to_string(),
                point: p.to_vec(),
            })
        }
    }

    /// Raw second-order jets of every component, seeded at `p`.
    pub fn hyper_at(&self, p: &[f64]) -> Result<Vec<Hyper>> {
        let m = p.len();
        let x: Vec<Hyper> = (0..m).map(|i| Hyper::seed(p[i], i, m)).collect();
        let out = self.eval_hyper(&x)?;
        self.finite_or_err(p, &out)?;
        Ok(out)
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &MapExpr, inner: &MapExpr) -> MapExpr {
        assert_eq!(
            outer.domain_dim(),
            inner.codomain_dim(),
            "composition dimension mismatch"
        );
        let (o, i) = (outer.clone(), inner.clone());
        let name = format!("{}∘{}", outer.name, inner.name);
        MapExpr {
            name: name.into(),
            domain: inner.domain.clone(),
            codomain_dim: outer.codomain_dim,
            f: Arc::new(move |x| {
                let mid = (i.f)(x);
                (o.f)(&mid)
            }),
        }
    }

    /// Evaluate an inner map and then this one, checking both domains.
    pub fn eval_composed(&self, inner: &MapExpr, x: &[Hyper]) -> Result<Vec<Hyper>> {
        let mid = inner.eval_hyper(x)?;
        self.eval_hyper(&mid)
    }

    pub fn component(&self, index: usize) -> ScalarExprField {
        assert!(index < self.codomain_dim);
        let me = self.clone();
        ScalarExprField {
            inner: MapExpr {
                name: format!("{}[{}]", self.name, index).into(),
                domain: self.domain.clone(),
                codomain_dim: 1,
                f: Arc::new(move |x| vec![(me.f)(x)[index]]),
            },
        }
    }

    pub fn components(&self) -> Vec<ScalarExprField> {
        (0..self.codomain_dim).map(|i| self.component(i)).collect()
    }
}

/// A smooth real function on a coordinate box.
#[derive(Clone, Debug)]
pub struct ScalarExprField {
    inner: MapExpr,
}

impl ScalarExprField {
    pub fn new<F>(name: &str, domain: DomainBox, f: F) -> Self
    where
        F: Fn(&[Hyper]) -> Hyper + Send + Sync + 'static,
    {
        Self {
            inner: MapExpr::new(name, domain, 1, move |x| vec![f(x)]),
        }
    }

    pub fn constant(name: &str, domain: DomainBox, c: f64) -> Self {
        Self::new(name, domain, move |_| Hyper::lift(c))
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn arity(&self) -> usize {
        self.inner.domain_dim()
    }

    pub fn domain(&self) -> &DomainBox {
        self.inner.domain()
    }

    pub fn as_map(&self) -> &MapExpr {
        &self.inner
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        Ok(self.inner.values(p)?[0])
    }

    pub fn eval_hyper(&self, x: &[Hyper]) -> Result<Hyper> {
        Ok(self.inner.eval_hyper(x)?[0])
    }

    /// `self ∘ map`, a scalar field on the source of `map`.
    pub fn pullback(&self, map: &MapExpr) -> ScalarExprField {
        ScalarExprField {
            inner: MapExpr::compose(&self.inner, map),
        }
    }
}

fn jet_of(r: &Hyper, m: usize) -> Jet2 {
    Jet2 {
        value: r.re.re,
        grad: DVector::from_fn(m, |i, _| r.re.eps[i]),
        hess: DMatrix::from_fn(m, m, |i, j| r.eps[i].eps[j]),
    }
}

/// Exact value, gradient and Hessian of a scalar field.
pub fn jet2_eval(expr: &ScalarExprField, p: &[f64]) -> Result<Jet2> {
    let out = expr.inner.hyper_at(p)?;
    Ok(jet_of(&out[0], p.len()))
}

/// Componentwise order-2 jet of a map.
pub fn map_jet(expr: &MapExpr, p: &[f64]) -> Result<MapJet> {
    let m = p.len();
    let out = expr.hyper_at(p)?;
    Ok(MapJet::from_hyper(&out, m))
}

impl MapJet {
    pub fn from_hyper(out: &[Hyper], m: usize) -> Self {
        let n = out.len();
        MapJet {
            value: DVector::from_fn(n, |a, _| out[a].re.re),
            jac: DMatrix::from_fn(n, m, |a, i| out[a].re.eps[i]),
            hess: out.iter().map(|r| jet_of(r, m).hess).collect(),
        }
    }
}

/// Default central-difference step for the finite-difference oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Central differences with one Richardson step, for every component of a map.
pub fn fd_map_jet(expr: &MapExpr, p: &[f64], h: f64) -> Result<MapJet> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    if !expr.domain().contains_with_margin(p, 2.0 * h) {
        return Err(Error::Domain {
            what: format!("{} (with finite-difference stencil)", expr.name()),
            point: p.to_vec(),
        });
    }
    let m = p.len();
    let n = expr.codomain_dim();
    let eval = |offsets: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut q = p.to_vec();
        for &(i, d) in offsets {
            q[i] += d;
        }
        expr.values(&q)
    };
    let center = eval(&[])?;
    let mut jac = DMatrix::zeros(n, m);
    let mut hess = vec![DMatrix::zeros(m, m); n];

    let richardson = |fine: f64, coarse: f64| (4.0 * fine - coarse) / 3.0;

    for i in 0..m {
        let mut d = [Vec::new(), Vec::new()];
        let mut s = [Vec::new(), Vec::new()];
        for (k, step) in [h, 2.0 * h].into_iter().enumerate() {
            let fp = eval(&[(i, step)])?;
            let fm = eval(&[(i, -step)])?;
            d[k] = (0..n).map(|a| (fp[a] - fm[a]) / (2.0 * step)).collect();
            s[k] = (0..n)
                .map(|a| (fp[a] - 2.0 * center[a] + fm[a]) / (step * step))
                .collect();
        }
        for a in 0..n {
            jac[(a, i)] = richardson(d[0][a], d[1][a]);
            hess[a][(i, i)] = richardson(s[0][a], s[1][a]);
        }
        for j in 0..i {
            let mut mixed = [Vec::new(), Vec::new()];
            for (k, step) in [h, 2.0 * h].into_iter().enumerate() {
                let fpp = eval(&[(i, step), (j, step)])?;
                let fpm = eval(&[(i, step), (j, -step)])?;
                let fmp = eval(&[(i, -step), (j, step)])?;
                let fmm = eval(&[(i, -step), (j, -step)])?;
                mixed[k] = (0..n)
                    .map(|a| (fpp[a] - fpm[a] - fmp[a] + fmm[a]) / (4.0 * step * step))
                    .collect();
            }
            for a in 0..n {
                let v = richardson(mixed[0][a], mixed[1][a]);
                hess[a][(i, j)] = v;
                hess[a][(j, i)] = v;
            }
        }
    }
    Ok(MapJet {
        value: DVector::from_vec(center),
        jac,
        hess,
    })
}

/// Finite-difference counterpart of [`jet2_eval`].
pub fn fd_jet2(expr: &ScalarExprField, p: &[f64], h: f64) -> Result<Jet2> {
    let mj = fd_map_jet(expr.as_map(), p, h)?;
    Ok(Jet2 {
        value: mj.value[0],
        grad: mj.jac.row(0).transpose(),
        hess: mj.hess[0].clone(),
    })
}

/// Largest `|exact − fd| / (1 + |exact|)` over all first and second derivatives.
pub fn jet_discrepancy(exact: &MapJet, fd: &MapJet) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs());
    let mut worst: f64 = 0.0;
    for (a, b) in exact.value.iter().zip(fd.value.iter()) {
        worst = worst.max(rel(*a, *b));
    }
    for (a, b) in exact.jac.iter().zip(fd.jac.iter()) {
        worst = worst.max(rel(*a, *b));
    }
    for (ha, hb) in exact.hess.iter().zip(&fd.hess) {
        for (a, b) in ha.iter().zip(hb.iter()) {
            worst = worst.max(rel(*a, *b));
        }
    }
    worst
}
