//! Memoized combinatorial constants and the special values used by the formulas.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{int, SqrtPiPoly};
use crate::error::{Error, Result};

static FACTORIALS: RwLock<Vec<BigInt>> = RwLock::new(Vec::new());
static BERNOULLI: RwLock<Vec<BigRational>> = RwLock::new(Vec::new());

/// `n!`.
pub fn factorial(n: u32) -> BigInt {
    let n = n as usize;
    if let Some(v) = FACTORIALS.read().unwrap().get(n) {
        return v.clone();
    }
    let mut table = FACTORIALS.write().unwrap();
    if table.is_empty() {
        table.push(BigInt::one());
    }
    while table.len() <= n {
        let next = table.last().unwrap() * BigInt::from(table.len());
        table.push(next);
    }
    table[n].clone()
}

/// Binomial coefficient, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Akiyama-Tanigawa table for B_0..=B_max (with B_1 = +1/2 before sign fix).
fn bernoulli_table(max: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(max + 1);
    let mut out = Vec::with_capacity(max + 1);
    for m in 0..=max {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * int(j as i64);
        }
        out.push(a[0].clone());
    }
    if max >= 1 {
        out[1] = -out[1].clone();
    }
    out
}

/// Bernoulli number `B_two_n` (convention B_1 = -1/2; only even indices accepted).
pub fn bernoulli(two_n: u32) -> Result<BigRational> {
    if two_n % 2 != 0 {
        return Err(Error::Precondition(format!(
            "Bernoulli index must be even, got {two_n}"
        )));
    }
    let n = two_n as usize;
    if let Some(v) = BERNOULLI.read().unwrap().get(n) {
        return Ok(v.clone());
    }
    let mut table = BERNOULLI.write().unwrap();
    if table.len() <= n {
        *table = bernoulli_table((2 * table.len()).max(n).max(32));
    }
    Ok(table[n].clone())
}

/// `Gamma(two_j / 2)` as `q * s^{0 or 1}`.
pub fn gamma_half(two_j: u32) -> Result<SqrtPiPoly> {
    if two_j == 0 {
        return Err(Error::Precondition("Gamma argument must be positive".into()));
    }
    if two_j % 2 == 0 {
        return Ok(SqrtPiPoly::from_rational(BigRational::from_integer(
            factorial(two_j / 2 - 1),
        )));
    }
    // Gamma(j + 1/2) = (2j)! / (4^j j!) * sqrt(pi)
    let j = (two_j - 1) / 2;
    let num = factorial(2 * j);
    let den = num_traits::pow(BigInt::from(4), j as usize) * factorial(j);
    Ok(SqrtPiPoly::monomial(BigRational::new(num, den), 1))
}

/// Hausdorff measure of the unit sphere S^k: `2 pi^{(k+1)/2} / Gamma((k+1)/2)`.
pub fn sphere_surface(k: u32) -> SqrtPiPoly {
    let g = gamma_half(k + 1).expect("k + 1 >= 1");
    SqrtPiPoly::monomial(int(2), k as i32 + 1)
        .div_monomial(&g)
        .expect("Gamma is a monomial")
}
