//! Exact arithmetic in the Laurent ring Q[s, 1/s] with s = sqrt(pi).
//!
//! Every closed-form expectation in the crate is a [`SqrtPiPoly`]. Values are
//! canonical (no zero coefficients are stored), so structural equality is
//! ring equality.

mod eval;
mod special;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use eval::{format_sig, pi_scaled, Decimal};
pub use special::{bernoulli, binomial, factorial, gamma_half, sphere_surface};

/// Shorthand for a rational `n/d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer as a rational.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Element of Q[s, 1/s], s = sqrt(pi): a finite map from s-exponent to coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SqrtPiPoly {
    terms: BTreeMap<i32, BigRational>,
}

impl SqrtPiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    /// `c * s^e`.
    pub fn monomial(c: BigRational, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn from_rational(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    /// `pi^j`.
    pub fn pi_pow(j: i32) -> Self {
        Self::monomial(BigRational::one(), 2 * j)
    }

    /// `s^e = pi^(e/2)`.
    pub fn s_pow(e: i32) -> Self {
        Self::monomial(BigRational::one(), e)
    }

    /// Builds a polynomial from `(s-exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (i32, BigRational)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending s-exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &BigRational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i32) -> BigRational {
        self.terms.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// The value as a rational, if the polynomial is constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// True when every exponent is even, i.e. the value lies in Q[pi, 1/pi].
    pub fn in_q_pi(&self) -> bool {
        self.terms.keys().all(|e| e % 2 == 0)
    }

    fn add_term(&mut self, e: i32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * q)).collect(),
        }
    }

    /// Multiplies by `s^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect(),
        }
    }

    /// Inverse of a monomial.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_monomial() {
            return Err(Error::Precondition(format!(
                "only monomials are invertible, got {self}"
            )));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        Ok(Self::monomial(c.recip(), -e))
    }

    /// Division by a monomial.
    pub fn div_monomial(&self, m: &Self) -> Result<Self> {
        Ok(self * &m.inverse()?)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Decimal evaluation with absolute error below `10^(1-digits)`.
    pub fn eval(&self, digits: u32) -> Decimal {
        eval::eval(self, digits)
    }

    /// Nearest double, obtained from a high-precision evaluation.
    pub fn to_f64(&self) -> f64 {
        eval::to_f64(self)
    }
}

impl fmt::Display for SqrtPiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format(self))
    }
}

impl FromStr for SqrtPiPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        text::parse(s)
    }
}

impl From<BigRational> for SqrtPiPoly {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for SqrtPiPoly {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Neg for &SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn neg(self) -> SqrtPiPoly {
        SqrtPiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn neg(mut self) -> SqrtPiPoly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl AddAssign<&SqrtPiPoly> for SqrtPiPoly {
    fn add_assign(&mut self, rhs: &SqrtPiPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl SubAssign<&SqrtPiPoly> for SqrtPiPoly {
    fn sub_assign(&mut self, rhs: &SqrtPiPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c);
        }
    }
}

impl MulAssign<&SqrtPiPoly> for SqrtPiPoly {
    fn mul_assign(&mut self, rhs: &SqrtPiPoly) {
        *self = &*self * rhs;
    }
}

impl Mul for &SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: &SqrtPiPoly) -> SqrtPiPoly {
        let mut out = SqrtPiPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign:ident) => {
        impl $tr for &SqrtPiPoly {
            type Output = SqrtPiPoly;
            fn $method(self, rhs: &SqrtPiPoly) -> SqrtPiPoly {
                let mut out = self.clone();
                out.$assign(rhs);
                out
            }
        }
        impl $tr<SqrtPiPoly> for SqrtPiPoly {
            type Output = SqrtPiPoly;
            fn $method(mut self, rhs: SqrtPiPoly) -> SqrtPiPoly {
                self.$assign(&rhs);
                self
            }
        }
        impl $tr<&SqrtPiPoly> for SqrtPiPoly {
            type Output = SqrtPiPoly;
            fn $method(mut self, rhs: &SqrtPiPoly) -> SqrtPiPoly {
                self.$assign(&rhs);
                self
            }
        }
        impl $tr<SqrtPiPoly> for &SqrtPiPoly {
            type Output = SqrtPiPoly;
            fn $method(self, rhs: SqrtPiPoly) -> SqrtPiPoly {
                let mut out = self.clone();
                out.$assign(&rhs);
                out
            }
        }
    };
}

forward_binop!(Add, add, add_assign);
forward_binop!(Sub, sub, sub_assign);

impl Mul<SqrtPiPoly> for SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: SqrtPiPoly) -> SqrtPiPoly {
        &self * &rhs
    }
}

impl Mul<&SqrtPiPoly> for SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: &SqrtPiPoly) -> SqrtPiPoly {
        &self * rhs
    }
}

impl Mul<SqrtPiPoly> for &SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: SqrtPiPoly) -> SqrtPiPoly {
        self * &rhs
    }
}

impl Mul<&BigRational> for &SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: &BigRational) -> SqrtPiPoly {
        self.scale(rhs)
    }
}

impl Mul<BigRational> for SqrtPiPoly {
    type Output = SqrtPiPoly;
    fn mul(self, rhs: BigRational) -> SqrtPiPoly {
        self.scale(&rhs)
    }
}

impl Sum for SqrtPiPoly {
    fn sum<I: Iterator<Item = SqrtPiPoly>>(iter: I) -> Self {
        iter.fold(SqrtPiPoly::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> Sum<&'a SqrtPiPoly> for SqrtPiPoly {
    fn sum<I: Iterator<Item = &'a SqrtPiPoly>>(iter: I) -> Self {
        iter.fold(SqrtPiPoly::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Product for SqrtPiPoly {
    fn product<I: Iterator<Item = SqrtPiPoly>>(iter: I) -> Self {
        iter.fold(SqrtPiPoly::one(), |acc, x| &acc * &x)
    }
}
