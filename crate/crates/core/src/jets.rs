//! Truncated bivariate Taylor series ("jets") at a base point.
//!
//! A [`Jet2`] of order `m` stores the normalized Taylor coefficients
//! `c_ab = (d^(a+b) f / du^a dv^b) / (a! b!)` for every `a + b <= m`.
//! Coefficients are laid out in graded-lexicographic order: total degree
//! ascending, and within one degree the `u` exponent descending:
//!
//! ```text
//! index:  0    1    2    3    4    5    6 ...
//! (a,b): (0,0)(1,0)(0,1)(2,0)(1,1)(0,2)(3,0) ...
//! ```
//!
//! so that `index(a, b) = d (d + 1) / 2 + b` with `d = a + b`. Truncating a
//! jet to a lower order is a prefix of the coefficient vector.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

/// Default threshold below which a jet's value is treated as zero when dividing.
pub const DEFAULT_EPS_DIV: f64 = 1e-12;

/// Human-readable name of the coefficient layout, emitted with JSON dumps.
pub const COEFF_ORDERING: &str = "graded-lex: total degree ascending, then u-exponent descending";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("mismatched jets: order {0} at {1:?} vs order {2} at {3:?}")]
    MismatchedJets(usize, [f64; 2], usize, [f64; 2]),
    #[error("division by a jet whose value {0:e} is within the division threshold")]
    DivisionNearZero(f64),
    #[error("{kind} is undefined at {value:e}")]
    DomainError { kind: &'static str, value: f64 },
    #[error("cannot differentiate an order-0 jet")]
    OrderExhausted,
    #[error("coefficient vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("cannot raise jet order from {from} to {to}")]
    BadTruncation { from: usize, to: usize },
}

/// Parameter direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    U,
    V,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::U, Dir::V];

    pub fn from_index(i: usize) -> Dir {
        match i {
            0 => Dir::U,
            _ => Dir::V,
        }
    }
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Cosh,
    Sinh,
    Ln,
}

/// Number of coefficients of an order-`m` jet.
#[inline]
pub fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Position of `c_ab` in the coefficient vector.
#[inline]
pub fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jet2 {
    order: usize,
    base: [f64; 2],
    coeffs: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, base: [f64; 2], order: usize) -> Self {
        let mut coeffs = vec![0.0; coeff_count(order)];
        coeffs[0] = value;
        Jet2 {
            order,
            base,
            coeffs,
        }
    }

    pub fn zero(base: [f64; 2], order: usize) -> Self {
        Self::constant(0.0, base, order)
    }

    /// The coordinate function `u` or `v` itself.
    pub fn variable(dir: Dir, base: [f64; 2], order: usize) -> Self {
        let mut jet = Self::constant(
            match dir {
                Dir::U => base[0],
                Dir::V => base[1],
            },
            base,
            order,
        );
        if order >= 1 {
            match dir {
                Dir::U => jet.coeffs[index(1, 0)] = 1.0,
                Dir::V => jet.coeffs[index(0, 1)] = 1.0,
            }
        }
        jet
    }

    pub fn from_coeffs(base: [f64; 2], order: usize, coeffs: Vec<f64>) -> Result<Self, JetError> {
        let expected = coeff_count(order);
        if coeffs.len() != expected {
            return Err(JetError::BadLength {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(Jet2 {
            order,
            base,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized Taylor coefficient `c_ab`; zero above the jet order.
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            0.0
        } else {
            self.coeffs[index(a, b)]
        }
    }

    /// Raw partial derivative `d^(a+b) f / du^a dv^b` at the base point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.coeff(a, b) * factorial(a) * factorial(b)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Result<Self, JetError> {
        if order > self.order {
            return Err(JetError::BadTruncation {
                from: self.order,
                to: order,
            });
        }
        Ok(Jet2 {
            order,
            base: self.base,
            coeffs: self.coeffs[..coeff_count(order)].to_vec(),
        })
    }

    /// Truncate to `min(order, self.order)`.
    pub fn at_most(&self, order: usize) -> Self {
        if order >= self.order {
            self.clone()
        } else {
            Jet2 {
                order,
                base: self.base,
                coeffs: self.coeffs[..coeff_count(order)].to_vec(),
            }
        }
    }

    fn check_compatible(&self, other: &Jet2) -> Result<(), JetError> {
        if self.order != other.order || self.base != other.base {
            Err(JetError::MismatchedJets(
                self.order,
                self.base,
                other.order,
                other.base,
            ))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_compatible(other)?;
        let m = self.order;
        let p = &self.coeffs;
        let q = &other.coeffs;
        let mut out = vec![0.0; p.len()];
        for d in 0..=m {
            for b in 0..=d {
                let a = d - b;
                let mut s = 0.0;
                for i in 0..=a {
                    for j in 0..=b {
                        s += p[index(i, j)] * q[index(a - i, b - j)];
                    }
                }
                out[index(a, b)] = s;
            }
        }
        Ok(Jet2 {
            order: m,
            base: self.base,
            coeffs: out,
        })
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2 {
            order: self.order,
            base: self.base,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet2 {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn zip_with(&self, other: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        Jet2 {
            order: self.order,
            base: self.base,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Multiplicative inverse with the default division threshold.
    pub fn recip(&self) -> Result<Jet2, JetError> {
        self.recip_with(DEFAULT_EPS_DIV)
    }

    /// Multiplicative inverse by degree-graded recursion:
    /// `r_ab = -(1/c_00) * sum_{(i,j) != (0,0)} c_ij r_(a-i)(b-j)`.
    pub fn recip_with(&self, eps_div: f64) -> Result<Jet2, JetError> {
        let c = &self.coeffs;
        let c00 = c[0];
        if c00.abs() <= eps_div {
            return Err(JetError::DivisionNearZero(c00));
        }
        let inv = 1.0 / c00;
        let mut r = vec![0.0; c.len()];
        r[0] = inv;
        for d in 1..=self.order {
            for b in 0..=d {
                let a = d - b;
                let mut s = 0.0;
                for i in 0..=a {
                    for j in 0..=b {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        s += c[index(i, j)] * r[index(a - i, b - j)];
                    }
                }
                r[index(a, b)] = -s * inv;
            }
        }
        Ok(Jet2 {
            order: self.order,
            base: self.base,
            coeffs: r,
        })
    }

    pub fn try_div(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.try_mul(&other.recip()?)
    }

    /// Composes a univariate series `sum_k s_k t^k` with the nonconstant part
    /// `t = self - c_00` by Horner's rule.
    fn compose(&self, series: &[f64]) -> Jet2 {
        let mut t = self.clone();
        t.coeffs[0] = 0.0;
        let m = self.order;
        let mut acc = Jet2::constant(series[m], self.base, m);
        for k in (0..m).rev() {
            acc = (&acc * &t).add_scalar(series[k]);
        }
        acc
    }

    pub fn elementary(&self, kind: Elementary) -> Result<Jet2, JetError> {
        let m = self.order;
        let x = self.coeffs[0];
        // s[k] = f^(k)(x) / k!
        let mut s = vec![0.0; m + 1];
        match kind {
            Elementary::Sin | Elementary::Cos => {
                let (sn, cs) = x.sin_cos();
                let cycle = match kind {
                    Elementary::Sin => [sn, cs, -sn, -cs],
                    _ => [cs, -sn, -cs, sn],
                };
                for (k, sk) in s.iter_mut().enumerate() {
                    *sk = cycle[k % 4] / factorial(k);
                }
            }
            Elementary::Sinh | Elementary::Cosh => {
                let (sh, ch) = (x.sinh(), x.cosh());
                let cycle = match kind {
                    Elementary::Sinh => [sh, ch],
                    _ => [ch, sh],
                };
                for (k, sk) in s.iter_mut().enumerate() {
                    *sk = cycle[k % 2] / factorial(k);
                }
            }
            Elementary::Exp => {
                let e = x.exp();
                for (k, sk) in s.iter_mut().enumerate() {
                    *sk = e / factorial(k);
                }
            }
            Elementary::Sqrt => {
                if x <= DEFAULT_EPS_DIV {
                    return Err(JetError::DomainError {
                        kind: "sqrt",
                        value: x,
                    });
                }
                // generalized binomial coefficients of (x + t)^(1/2)
                let mut c = x.sqrt();
                for (k, sk) in s.iter_mut().enumerate() {
                    *sk = c;
                    c *= (0.5 - k as f64) / ((k + 1) as f64 * x);
                }
            }
            Elementary::Ln => {
                if x <= DEFAULT_EPS_DIV {
                    return Err(JetError::DomainError {
                        kind: "ln",
                        value: x,
                    });
                }
                s[0] = x.ln();
                for k in 1..=m {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    s[k] = sign / (k as f64 * x.powi(k as i32));
                }
            }
        }
        Ok(self.compose(&s))
    }

    pub fn sin(&self) -> Jet2 {
        self.elementary(Elementary::Sin).expect("sin is total")
    }

    pub fn cos(&self) -> Jet2 {
        self.elementary(Elementary::Cos).expect("cos is total")
    }

    pub fn exp(&self) -> Jet2 {
        self.elementary(Elementary::Exp).expect("exp is total")
    }

    pub fn sinh(&self) -> Jet2 {
        self.elementary(Elementary::Sinh).expect("sinh is total")
    }

    pub fn cosh(&self) -> Jet2 {
        self.elementary(Elementary::Cosh).expect("cosh is total")
    }

    pub fn sqrt(&self) -> Result<Jet2, JetError> {
        self.elementary(Elementary::Sqrt)
    }

    pub fn ln(&self) -> Result<Jet2, JetError> {
        self.elementary(Elementary::Ln)
    }

    pub fn powi(&self, n: u32) -> Jet2 {
        let mut acc = Jet2::constant(1.0, self.base, self.order);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in `dir`, one order lower.
    pub fn derive(&self, dir: Dir) -> Result<Jet2, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let m = self.order - 1;
        let mut out = vec![0.0; coeff_count(m)];
        for d in 0..=m {
            for b in 0..=d {
                let a = d - b;
                out[index(a, b)] = match dir {
                    Dir::U => (a + 1) as f64 * self.coeffs[index(a + 1, b)],
                    Dir::V => (b + 1) as f64 * self.coeffs[index(a, b + 1)],
                };
            }
        }
        Ok(Jet2 {
            order: m,
            base: self.base,
            coeffs: out,
        })
    }

    /// Debug dump with layout metadata.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "base": self.base,
            "ordering": COEFF_ORDERING,
            "coeffs": self.coeffs,
        })
    }
}

// Operator impls panic on mismatched jets; the `try_*` methods report them.

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Jet2> for Jet2 {
            type Output = Jet2;
            fn $f(self, rhs: Jet2) -> Jet2 {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $f(self, rhs: &Jet2) -> Jet2 {
                (&self).$f(rhs)
            }
        }
        impl $tr<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $f(self, rhs: Jet2) -> Jet2 {
                self.$f(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

/// Sum of jets sharing order and base; `None` for an empty iterator.
pub fn sum<'a>(jets: impl IntoIterator<Item = &'a Jet2>) -> Option<Jet2> {
    let mut it = jets.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, j| &acc + j))
}
