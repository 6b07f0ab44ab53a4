//! Cell and face counts of great-hypersphere arrangements and the coefficient
//! families `A[m, l]` (Laurent-series extraction) and `B{m, l}` (sine moments).

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{pre, Error, Result};
use crate::exactnum::{bernoulli, binomial, factorial, int, rat, SqrtPiPoly};

fn big(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// Number of cells `C(n, d)` cut out of S^d by `n` great hyperspheres in
/// general position; `C(0, d) = 1`.
pub fn cells_count(n: u32, d: u32) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let s: BigInt = (0..=d as i64).map(|r| binomial(n as i64 - 1, r)).sum();
    big(s * 2)
}

/// Number of `k`-faces `C(n, d, k) = binom(n, d-k) C(n-d+k, k)`.
pub fn faces_count(n: u32, d: u32, k: u32) -> Result<BigRational> {
    pre(k <= d, || format!("face dimension {k} exceeds {d}"))?;
    pre(n + k >= d, || format!("need n >= d - k, got n={n}, d={d}, k={k}"))?;
    Ok(big(binomial(n as i64, (d - k) as i64)) * cells_count(n + k - d, k))
}

/// Coefficients of `Q_m(x)` by power of `x` (odd entries are zero).
pub fn qpoly(m: u32) -> Vec<BigRational> {
    let mut poly = vec![BigRational::one()];
    let mut f = m as i64 - 1;
    while f >= 1 {
        let sq = int(f * f);
        let mut next = vec![BigRational::zero(); poly.len() + 2];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 2] += c * &sq;
        }
        poly = next;
        f -= 2;
    }
    poly
}

/// Which hyperbolic function of `pi/(2x)` to expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypKind {
    Tanh,
    Coth,
}

/// Truncated Laurent series in `x` with coefficients in the ring; coefficients
/// are exact for every exponent `>= low`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeriesX {
    terms: BTreeMap<i64, SqrtPiPoly>,
    low: i64,
}

impl LaurentSeriesX {
    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Coefficient of `x^e`; errors when `e` lies below the exact window.
    pub fn coeff(&self, e: i64) -> Result<SqrtPiPoly> {
        if e < self.low {
            return Err(Error::Precondition(format!(
                "exponent {e} below exact window {}",
                self.low
            )));
        }
        Ok(self.terms.get(&e).cloned().unwrap_or_default())
    }

    /// Product with a polynomial given by coefficients of `x^0, x^1, ...`.
    pub fn mul_poly(&self, poly: &[BigRational]) -> LaurentSeriesX {
        let mut terms: BTreeMap<i64, SqrtPiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            for (j, q) in poly.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                *terms.entry(e + j as i64).or_default() += &c.scale(q);
            }
        }
        terms.retain(|_, v| !v.is_zero());
        let deg = poly.iter().rposition(|q| !q.is_zero()).unwrap_or(0) as i64;
        LaurentSeriesX {
            terms,
            low: self.low + deg,
        }
    }
}

/// Laurent expansion of `tanh(pi/(2x))` or `coth(pi/(2x))`, exact for `|e| <= window`.
pub fn hyp_series(kind: HypKind, window: u32) -> LaurentSeriesX {
    let mut terms = BTreeMap::new();
    let first = match kind {
        HypKind::Tanh => 1,
        HypKind::Coth => 0,
    };
    let mut n: u32 = first;
    while 2 * n as i64 - 1 <= window as i64 {
        let b = bernoulli(2 * n).expect("even index");
        let four_n = BigInt::from(4).pow(n);
        let mut q = big(four_n.clone()) * b / big(factorial(2 * n));
        if kind == HypKind::Tanh {
            q *= big(four_n - 1);
        }
        // (pi/2)^(2n-1)
        let half_pow = 2 * n as i32 - 1;
        let q = if half_pow >= 0 {
            q / big(BigInt::from(2).pow(half_pow as u32))
        } else {
            q * int(2)
        };
        if !q.is_zero() {
            terms.insert(1 - 2 * n as i64, SqrtPiPoly::monomial(q, 2 * half_pow));
        }
        n += 1;
    }
    LaurentSeriesX {
        terms,
        low: -(window as i64),
    }
}

static A_CACHE: RwLock<Option<HashMap<(u32, i32), SqrtPiPoly>>> = RwLock::new(None);
static B_CACHE: RwLock<Option<HashMap<(u32, u32), SqrtPiPoly>>> = RwLock::new(None);

fn cached<K: std::hash::Hash + Eq + Copy>(
    cache: &RwLock<Option<HashMap<K, SqrtPiPoly>>>,
    key: K,
    compute: impl FnOnce() -> SqrtPiPoly,
) -> SqrtPiPoly {
    if let Some(map) = cache.read().unwrap().as_ref() {
        if let Some(v) = map.get(&key) {
            return v.clone();
        }
    }
    let v = compute();
    cache
        .write()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .entry(key)
        .or_insert_with(|| v.clone());
    v
}

/// `A[m, l]`: coefficient of `x^l` in `Q_m(x)` (even `l`) or in
/// `tanh(pi/(2x)) Q_m(x)` / `coth(pi/(2x)) Q_m(x)` (odd `l`, `m` even / odd).
/// The product `0^2 A[-1, -1]` is not represented here; callers substitute `2/pi`.
pub fn coeff_a(m: u32, l: i32) -> SqrtPiPoly {
    if l > m as i32 {
        return SqrtPiPoly::zero();
    }
    cached(&A_CACHE, (m, l), || {
        let q = qpoly(m);
        if l % 2 == 0 {
            return if l < 0 {
                SqrtPiPoly::zero()
            } else {
                SqrtPiPoly::from_rational(q[l as usize].clone())
            };
        }
        let kind = if m % 2 == 0 {
            HypKind::Tanh
        } else {
            HypKind::Coth
        };
        let window = m + l.unsigned_abs() + 2;
        hyp_series(kind, window)
            .mul_poly(&q)
            .coeff(l as i64)
            .expect("window covers extraction")
    })
}

/// `B{m, l} = 1/((l-1)! (m-l)!) * int_0^pi sin^(l-1)(x) x^(m-l) dx`, with
/// `B{m, 0} = pi^m/m!` and zero for `l > m`; computed by the two-step recurrence.
pub fn coeff_b(m: u32, l: u32) -> SqrtPiPoly {
    if l > m {
        return SqrtPiPoly::zero();
    }
    if l <= 1 {
        return SqrtPiPoly::monomial(BigRational::new(BigInt::one(), factorial(m)), 2 * m as i32);
    }
    if m == 2 {
        return SqrtPiPoly::from_int(2);
    }
    cached(&B_CACHE, (m, l), || {
        let diff = coeff_b(m - 2, l - 2) - coeff_b(m - 2, l);
        diff.scale(&rat(1, ((l - 1) * (l - 1)) as i64))
    })
}

/// `int_0^pi x^q cos(jx) dx` and `int_0^pi x^q sin(jx) dx` for `j >= 1`.
fn moment_cos(q: u32, j: u32) -> SqrtPiPoly {
    if q == 0 {
        return SqrtPiPoly::zero();
    }
    moment_sin(q - 1, j).scale(&rat(-(q as i64), j as i64))
}

fn moment_sin(q: u32, j: u32) -> SqrtPiPoly {
    let sign = if j % 2 == 0 { -1 } else { 1 };
    let mut out = SqrtPiPoly::monomial(rat(sign, j as i64), 2 * q as i32);
    if q == 0 {
        out += &SqrtPiPoly::from_rational(rat(1, j as i64));
    } else {
        out += &moment_cos(q - 1, j).scale(&rat(q as i64, j as i64));
    }
    out
}

/// Independent evaluation of `B{m, l}` from its defining integral: expand
/// `sin^(l-1)` into a trigonometric sum and integrate each term by parts.
pub fn coeff_b_oracle(m: u32, l: u32) -> Result<SqrtPiPoly> {
    pre(1 <= l && l <= m, || format!("oracle needs 1 <= l <= m, got m={m}, l={l}"))?;
    let p = l - 1;
    let q = m - l;
    let mut integral = SqrtPiPoly::zero();
    if p % 2 == 0 {
        let h = p / 2;
        let scale = BigRational::new(BigInt::one(), BigInt::from(4).pow(h));
        let constant = big(binomial(p as i64, h as i64)) * &scale;
        integral += &SqrtPiPoly::monomial(constant / int(q as i64 + 1), 2 * (q as i32 + 1));
        for r in 0..h {
            let sign = if (h - r) % 2 == 0 { 1 } else { -1 };
            let c = big(binomial(p as i64, r as i64)) * &scale * int(2 * sign);
            integral += &moment_cos(q, 2 * (h - r)).scale(&c);
        }
    } else {
        let h = (p - 1) / 2;
        let scale = BigRational::new(BigInt::one(), BigInt::from(4).pow(h));
        for r in 0..=h {
            let sign = if (h - r) % 2 == 0 { 1 } else { -1 };
            let c = big(binomial(p as i64, r as i64)) * &scale * int(sign);
            integral += &moment_sin(q, p - 2 * r).scale(&c);
        }
    }
    let norm = big(factorial(l - 1) * factorial(m - l));
    Ok(integral.scale(&norm.recip()))
}

/// Which alternating-sum closed form to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BClosed {
    K2,
    K3,
}

/// Closed forms for `B{n, 2}` and `B{n, 3}` as alternating sums in powers of pi.
pub fn b_closed_form(n: u32, which: BClosed) -> Result<SqrtPiPoly> {
    pre(n >= 2, || format!("closed form needs n >= 2, got {n}"))?;
    let mut out = SqrtPiPoly::zero();
    let parity_sign = |e: u32| if (e / 2) % 2 == 0 { 1 } else { -1 };
    let mut k = n % 2;
    while k + 2 <= n {
        let s = parity_sign(n - k);
        let mut c = BigRational::new(BigInt::from(-s), factorial(k));
        if which == BClosed::K3 {
            c /= big(BigInt::from(2).pow(n - k));
        }
        out += &SqrtPiPoly::monomial(c, 2 * k as i32);
        k += 2;
    }
    if n % 2 == 0 {
        let s = parity_sign(n);
        let tail = match which {
            BClosed::K2 => int(-s),
            BClosed::K3 => BigRational::new(BigInt::from(s), BigInt::from(2).pow(n)),
        };
        out += &SqrtPiPoly::from_rational(tail);
    }
    Ok(out)
}
