//! Truncated-Taylor (jet) arithmetic.
//!
//! [`Jet2`] carries a value, gradient and Hessian with respect to up to
//! [`MAX_VARS`] chart variables; every arithmetic operation propagates the
//! derivatives exactly, so second derivatives of an immersion come out at
//! rounding accuracy instead of stencil accuracy. [`Jet1`] is the univariate
//! analogue carrying three derivatives, used for profile curves where third
//! derivatives of the mean curvature expression are needed.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of chart variables tracked by a [`Jet2`].
pub const MAX_VARS: usize = 4;

/// Scalar types that support the elementary functions the geometry kernels
/// need. Implemented by `f64`, [`Jet2`] and [`Jet1`], so formulas can be
/// written once and evaluated either plainly or with derivatives attached.
pub trait Analytic:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// The underlying value, with derivative information dropped.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan(self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn recip(self) -> Self {
        Self::from_f64(1.0) / self
    }
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::from_f64(1.0),
            1 => self,
            2 => self * self,
            _ if n < 0 => self.powi(-n).recip(),
            _ => {
                // exponentiation by squaring keeps jets exact for integer powers
                let half = self.powi(n / 2);
                if n % 2 == 0 {
                    half * half
                } else {
                    half * half * self
                }
            }
        }
    }
    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}

impl Analytic for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// Order-2 multivariate jet: value, gradient and (symmetric) Hessian in up to
/// four variables. Variables beyond the active chart dimension simply carry
/// zeros, which keeps the type `Copy` and free of dimension bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub grad: [f64; MAX_VARS],
    pub hess: [[f64; MAX_VARS]; MAX_VARS],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            val: v,
            grad: [0.0; MAX_VARS],
            hess: [[0.0; MAX_VARS]; MAX_VARS],
        }
    }

    /// Seed for the `i`-th chart variable at value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Jet2::constant(v);
        j.grad[i] = 1.0;
        j
    }

    /// Composition with a scalar function given value and first two
    /// derivatives at `self.val`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2::constant(f0);
        for i in 0..MAX_VARS {
            out.grad[i] = f1 * self.grad[i];
        }
        for i in 0..MAX_VARS {
            for j in 0..MAX_VARS {
                out.hess[i][j] = f1 * self.hess[i][j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().flatten().all(|h| h.is_finite())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let mut out = self;
        out.val += rhs.val;
        for i in 0..MAX_VARS {
            out.grad[i] += rhs.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] += rhs.hess[i][j];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        let mut out = self;
        out.val -= rhs.val;
        for i in 0..MAX_VARS {
            out.grad[i] -= rhs.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] -= rhs.hess[i][j];
            }
        }
        out
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        let mut out = self;
        out.val = -out.val;
        for i in 0..MAX_VARS {
            out.grad[i] = -out.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] = -out.hess[i][j];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.val * rhs.val);
        for i in 0..MAX_VARS {
            out.grad[i] = self.grad[i] * rhs.val + self.val * rhs.grad[i];
        }
        for i in 0..MAX_VARS {
            for j in 0..MAX_VARS {
                out.hess[i][j] = self.hess[i][j] * rhs.val
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.val * rhs.hess[i][j];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        let v = rhs.val;
        self * rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Analytic for Jet2 {
    fn from_f64(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.val;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }
    fn sinh(self) -> Self {
        self.chain(self.val.sinh(), self.val.cosh(), self.val.sinh())
    }
    fn cosh(self) -> Self {
        self.chain(self.val.cosh(), self.val.sinh(), self.val.cosh())
    }
    fn atan(self) -> Self {
        let v = self.val;
        let d = 1.0 + v * v;
        self.chain(v.atan(), 1.0 / d, -2.0 * v / (d * d))
    }
    fn powf(self, e: f64) -> Self {
        let v = self.val;
        self.chain(v.powf(e), e * v.powf(e - 1.0), e * (e - 1.0) * v.powf(e - 2.0))
    }
}

/// Order-3 univariate jet for profile curves: value and first three
/// derivatives with respect to the curve parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1 {
    pub val: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet1 {
    pub fn constant(v: f64) -> Self {
        Jet1 {
            val: v,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    pub fn variable(v: f64) -> Self {
        Jet1 {
            val: v,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    /// Faà di Bruno to third order.
    fn chain(self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        Jet1 {
            val: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
            d3: f3 * self.d1 * self.d1 * self.d1 + 3.0 * f2 * self.d1 * self.d2 + f1 * self.d3,
        }
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, r: Jet1) -> Jet1 {
        Jet1 {
            val: self.val + r.val,
            d1: self.d1 + r.d1,
            d2: self.d2 + r.d2,
            d3: self.d3 + r.d3,
        }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, r: Jet1) -> Jet1 {
        Jet1 {
            val: self.val - r.val,
            d1: self.d1 - r.d1,
            d2: self.d2 - r.d2,
            d3: self.d3 - r.d3,
        }
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            val: -self.val,
            d1: -self.d1,
            d2: -self.d2,
            d3: -self.d3,
        }
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, r: Jet1) -> Jet1 {
        Jet1 {
            val: self.val * r.val,
            d1: self.d1 * r.val + self.val * r.d1,
            d2: self.d2 * r.val + 2.0 * self.d1 * r.d1 + self.val * r.d2,
            d3: self.d3 * r.val + 3.0 * self.d2 * r.d1 + 3.0 * self.d1 * r.d2 + self.val * r.d3,
        }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, r: Jet1) -> Jet1 {
        let v = r.val;
        let v2 = v * v;
        self * r.chain(1.0 / v, -1.0 / v2, 2.0 / (v2 * v), -6.0 / (v2 * v2))
    }
}

impl Analytic for Jet1 {
    fn from_f64(v: f64) -> Self {
        Jet1::constant(v)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s, -c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c, s)
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.val;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        let v = self.val;
        self.chain(r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v))
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.chain(s, c, s, c)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.chain(c, s, c, s)
    }
    fn atan(self) -> Self {
        let v = self.val;
        let d = 1.0 + v * v;
        self.chain(
            v.atan(),
            1.0 / d,
            -2.0 * v / (d * d),
            (6.0 * v * v - 2.0) / (d * d * d),
        )
    }
    fn powf(self, e: f64) -> Self {
        let v = self.val;
        self.chain(
            v.powf(e),
            e * v.powf(e - 1.0),
            e * (e - 1.0) * v.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * v.powf(e - 3.0),
        )
    }
}
