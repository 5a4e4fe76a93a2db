//! Forward-mode dual numbers with inline storage.
//!
//! A [`Dual<T>`] carries a value and up to [`MAX_VARS`] first-order
//! perturbation components. Nesting `Dual<Dual<f64>>` gives exact second
//! derivatives: the outer layer differentiates the inner one.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest number of independent variables a jet can track.
pub const MAX_VARS: usize = 8;

/// Scalar arithmetic shared by `f64` and every level of dual number.
///
/// Expressions and the small dense linear algebra in [`crate::linalg`] are
/// written against this trait so the same code runs on plain values, on
/// first-order jets and on second-order jets.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Leading real part.
    fn value(&self) -> f64;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn atan(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn square(self) -> Self {
        self * self
    }
    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Value plus first-order perturbations `eps[0..n]`.
///
/// Components at index `>= n` are always zero, so binary operations only
/// need to loop up to the larger of the two active counts.
#[derive(Clone, Copy, Debug)]
pub struct Dual<T> {
    pub re: T,
    pub eps: [T; MAX_VARS],
    pub n: u8,
}

/// First-order jet: value and gradient.
pub type Jet1 = Dual<f64>;
/// Second-order jet: the outer perturbations are themselves first-order jets.
pub type Hyper = Dual<Dual<f64>>;

impl<T: Real> Dual<T> {
    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: [T::zero(); MAX_VARS],
            n: 0,
        }
    }

    /// Independent variable number `index` out of `nvars`.
    pub fn variable(re: T, index: usize, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS && index < nvars);
        let mut eps = [T::zero(); MAX_VARS];
        eps[index] = T::one();
        Self {
            re,
            eps,
            n: nvars as u8,
        }
    }

    pub fn nvars(&self) -> usize {
        self.n as usize
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        let mut eps = [T::zero(); MAX_VARS];
        for (o, e) in eps.iter_mut().zip(&self.eps).take(self.n as usize) {
            *o = df * *e;
        }
        Self {
            re: f,
            eps,
            n: self.n,
        }
    }
}

impl Hyper {
    /// Seed variable `index` of `nvars` for a full second-order evaluation.
    pub fn seed(value: f64, index: usize, nvars: usize) -> Self {
        let inner = Jet1::variable(value, index, nvars);
        let mut eps = [Jet1::constant(0.0); MAX_VARS];
        eps[index] = Jet1::constant(1.0);
        Self {
            re: inner,
            eps,
            n: nvars as u8,
        }
    }

    /// Seed variable `index` tracking first derivatives only.
    pub fn seed_first(value: f64, index: usize, nvars: usize) -> Self {
        Self::constant(Jet1::variable(value, index, nvars))
    }

    pub fn lift(v: f64) -> Self {
        Self::constant(Jet1::constant(v))
    }

    /// Promote a first-order jet to a second-order one with no outer perturbation.
    pub fn from_jet1(j: Jet1) -> Self {
        Self::constant(j)
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, t * t + 1.0)
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, -(t * t) + 1.0)
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), (self.re * self.re + 1.0).recip())
    }
    fn atan2(self, x: Self) -> Self {
        let y = self;
        let r2 = x.re * x.re + y.re * y.re;
        let n = y.n.max(x.n);
        let mut eps = [T::zero(); MAX_VARS];
        for (i, o) in eps.iter_mut().enumerate().take(n as usize) {
            *o = (x.re * y.eps[i] - y.re * x.eps[i]) / r2;
        }
        Self {
            re: y.re.atan2(x.re),
            eps,
            n,
        }
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::cst(1.0),
            1 => self,
            _ => self.chain(self.re.powi(k), self.re.powi(k - 1) * k as f64),
        }
    }
    fn powf(self, p: f64) -> Self {
        self.chain(self.re.powf(p), self.re.powf(p - 1.0) * p)
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let n = self.n.max(rhs.n);
        let mut eps = self.eps;
        for (o, r) in eps.iter_mut().zip(&rhs.eps).take(n as usize) {
            *o += *r;
        }
        Self {
            re: self.re + rhs.re,
            eps,
            n,
        }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let n = self.n.max(rhs.n);
        let mut eps = self.eps;
        for (o, r) in eps.iter_mut().zip(&rhs.eps).take(n as usize) {
            *o -= *r;
        }
        Self {
            re: self.re - rhs.re,
            eps,
            n,
        }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let n = self.n.max(rhs.n);
        let mut eps = [T::zero(); MAX_VARS];
        for (i, o) in eps.iter_mut().enumerate().take(n as usize) {
            *o = self.re * rhs.eps[i] + self.eps[i] * rhs.re;
        }
        Self {
            re: self.re * rhs.re,
            eps,
            n,
        }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let n = self.n.max(rhs.n);
        let inv = rhs.re.recip();
        let q = self.re * inv;
        let mut eps = [T::zero(); MAX_VARS];
        for (i, o) in eps.iter_mut().enumerate().take(n as usize) {
            *o = (self.eps[i] - q * rhs.eps[i]) * inv;
        }
        Self { re: q, eps, n }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut eps = self.eps;
        for o in eps.iter_mut().take(self.n as usize) {
            *o = -*o;
        }
        Self {
            re: -self.re,
            eps,
            n: self.n,
        }
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.re = self.re + rhs;
        self
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.re = self.re - rhs;
        self
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let mut eps = self.eps;
        for o in eps.iter_mut().take(self.n as usize) {
            *o = *o * rhs;
        }
        Self {
            re: self.re * rhs,
            eps,
            n: self.n,
        }
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<T: Real> Add<Dual<T>> for f64 {
    type Output = Dual<T>;
    fn add(self, rhs: Dual<T>) -> Dual<T> {
        rhs + self
    }
}

impl<T: Real> Sub<Dual<T>> for f64 {
    type Output = Dual<T>;
    fn sub(self, rhs: Dual<T>) -> Dual<T> {
        -rhs + self
    }
}

impl<T: Real> Mul<Dual<T>> for f64 {
    type Output = Dual<T>;
    fn mul(self, rhs: Dual<T>) -> Dual<T> {
        rhs * self
    }
}

impl<T: Real> Div<Dual<T>> for f64 {
    type Output = Dual<T>;
    fn div(self, rhs: Dual<T>) -> Dual<T> {
        Dual::<T>::cst(self) / rhs
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<T: Real> $tr for Dual<T> {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_first_order() {
        let x = Jet1::variable(2.0, 0, 2);
        let y = Jet1::variable(3.0, 1, 2);
        let f = x * x * y;
        assert_eq!(f.re, 12.0);
        assert_eq!(f.eps[0], 12.0);
        assert_eq!(f.eps[1], 4.0);
    }

    #[test]
    fn nested_gives_hessian() {
        let x = Hyper::seed(1.0, 0, 2);
        let y = Hyper::seed(1.0, 1, 2);
        let f = x * x * y;
        assert_eq!(f.re.re, 1.0);
        assert_eq!((f.re.eps[0], f.re.eps[1]), (2.0, 1.0));
        assert_eq!(f.eps[0].eps[0], 2.0);
        assert_eq!(f.eps[0].eps[1], 2.0);
        assert_eq!(f.eps[1].eps[0], 2.0);
        assert_eq!(f.eps[1].eps[1], 0.0);
    }

    #[test]
    fn constants_mix_with_variables() {
        let x = Jet1::variable(0.5, 0, 1);
        let c = Jet1::cst(3.0);
        let f = c * x.sin() + 1.0;
        assert!((f.eps[0] - 3.0 * 0.5f64.cos()).abs() < 1e-15);
        assert_eq!(f.n, 1);
    }

    #[test]
    fn atan2_derivative() {
        let y = Jet1::variable(1.0, 0, 2);
        let x = Jet1::variable(2.0, 1, 2);
        let t = y.atan2(x);
        assert!((t.eps[0] - 2.0 / 5.0).abs() < 1e-15);
        assert!((t.eps[1] + 1.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn first_only_seed_has_no_outer_perturbation() {
        let x = Hyper::seed_first(2.0, 0, 1);
        let f = x * x * x;
        assert_eq!(f.n, 0);
        assert_eq!(f.re.eps[0], 12.0);
    }
}
