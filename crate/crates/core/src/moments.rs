//! Closed-form expectations for typical (`Z`) and weighted typical (`W`)
//! spherical k-faces, Euclidean counterparts, intersection probabilities and
//! the exact identity suite.
//!
//! Arguments follow one convention throughout: `n` hyperspheres in S^d,
//! faces of dimension `k`, sub-index `l`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::{b_closed_form, cells_count, coeff_a, coeff_b, faces_count, BClosed};
use crate::error::{pre, Error, Result};
use crate::exactnum::{binomial, factorial, gamma_half, int, rat, sphere_surface, SqrtPiPoly};

/// Which face distribution a quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Typical,
    Weighted,
}

impl Flavor {
    pub const BOTH: [Flavor; 2] = [Flavor::Typical, Flavor::Weighted];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Typical => "typical",
            Flavor::Weighted => "weighted",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "typical" | "Z" => Ok(Flavor::Typical),
            "weighted" | "W" => Ok(Flavor::Weighted),
            _ => Err(Error::Config(format!("unknown flavor '{s}'"))),
        }
    }
}

/// Face functional whose expectation is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "U")]
    U,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "vminus1")]
    VMinus1,
    #[serde(rename = "statdim")]
    Statdim,
    #[serde(rename = "hk")]
    HkMean,
    #[serde(rename = "isect")]
    Isect,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::F => "f",
            Quantity::U => "U",
            Quantity::V => "v",
            Quantity::VMinus1 => "vminus1",
            Quantity::Statdim => "statdim",
            Quantity::HkMean => "hk",
            Quantity::Isect => "isect",
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "f" => Quantity::F,
            "U" | "u" => Quantity::U,
            "v" => Quantity::V,
            "vminus1" => Quantity::VMinus1,
            "statdim" => Quantity::Statdim,
            "hk" => Quantity::HkMean,
            "isect" => Quantity::Isect,
            _ => return Err(Error::Config(format!("unknown quantity '{s}'"))),
        })
    }
}

/// A request for `E h(face)`; shared by the exact engine, the simulator and comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpectationQuery {
    pub quantity: Quantity,
    pub flavor: Flavor,
    pub n: u32,
    pub d: u32,
    pub k: u32,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub m: Option<u32>,
}

impl ExpectationQuery {
    pub fn new(quantity: Quantity, flavor: Flavor, n: u32, d: u32, k: u32, l: u32) -> Self {
        Self {
            quantity,
            flavor,
            n,
            d,
            k,
            l,
            m: None,
        }
    }

    pub fn isect(flavor: Flavor, n: u32, m: u32, d: u32) -> Self {
        Self {
            quantity: Quantity::Isect,
            flavor,
            n,
            d,
            k: d,
            l: 0,
            m: Some(m),
        }
    }

    /// Short label such as `f1(W n=4 d=2 k=2)`.
    pub fn label(&self) -> String {
        let f = match self.flavor {
            Flavor::Typical => "Z",
            Flavor::Weighted => "W",
        };
        match self.quantity {
            Quantity::F | Quantity::U | Quantity::V => format!(
                "{}{}({f} n={} d={} k={})",
                self.quantity.name(),
                self.l,
                self.n,
                self.d,
                self.k
            ),
            Quantity::Isect => format!(
                "isect({f} n={} m={} d={})",
                self.n,
                self.m.unwrap_or(self.n),
                self.d
            ),
            _ => format!(
                "{}({f} n={} d={} k={})",
                self.quantity.name(),
                self.n,
                self.d,
                self.k
            ),
        }
    }
}

fn big(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn c(n: u32, d: u32) -> BigRational {
    cells_count(n, d)
}

fn binom(n: u32, k: u32) -> BigRational {
    big(binomial(n as i64, k as i64))
}

fn fact(n: u32) -> BigRational {
    big(factorial(n))
}

fn rational(q: BigRational) -> SqrtPiPoly {
    SqrtPiPoly::from_rational(q)
}

fn check_typical(n: u32, d: u32, k: u32, l: u32) -> Result<()> {
    pre(k <= d, || format!("need k <= d, got k={k}, d={d}"))?;
    pre(l <= k, || format!("need l <= k, got l={l}, k={k}"))?;
    pre(n + k >= d, || format!("typical faces need n >= d - k, got n={n}"))
}

fn check_weighted(n: u32, d: u32, k: u32, l: u32) -> Result<()> {
    check_typical(n, d, k, l)?;
    pre(n > d, || format!("weighted faces need n >= d + 1, got n={n}, d={d}"))
}

/// `(j - 1)^2 A[j - 2, l2]`, with `0^2 A[-1, -1]` read as `2/pi`.
fn weighted_a(j: u32, l2: i32) -> SqrtPiPoly {
    if j == 1 {
        debug_assert_eq!(l2, -1);
        return SqrtPiPoly::monomial(int(2), -2);
    }
    if j == 0 {
        return SqrtPiPoly::zero();
    }
    coeff_a(j - 2, l2).scale(&int(((j - 1) * (j - 1)) as i64))
}

/// `E f_l(Z)` for the typical k-face.
pub fn ef_typical(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_typical(n, d, k, l)?;
    pre(l < k, || format!("need l < k, got l={l}, k={k}"))?;
    let m = n + k - d;
    let two = big(BigInt::from(2).pow(k - l));
    Ok(rational(two * binom(m, k - l) * c(n + l - d, l) / c(m, k)))
}

/// `E f_l(W)` for the weighted typical k-face (isotropic).
pub fn ef_weighted(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_weighted(n, d, k, l)?;
    pre(l < k, || format!("need l < k, got l={l}, k={k}"))?;
    let m = n + k - d;
    let mut sum = SqrtPiPoly::zero();
    for s in 0..=l / 2 {
        let j = k - 2 * s;
        sum += &(coeff_b(m, j) * weighted_a(j, k as i32 - l as i32 - 2));
    }
    let prefactor = SqrtPiPoly::monomial(fact(m) / fact(k - l), 2 * (d as i32 - l as i32 - n as i32));
    Ok(&prefactor * &sum)
}

/// `E f_l` for either flavor, with `f_k = 1`.
pub fn ef(flavor: Flavor, n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    if l == k {
        match flavor {
            Flavor::Typical => check_typical(n, d, k, l)?,
            Flavor::Weighted => check_weighted(n, d, k, l)?,
        }
        return Ok(SqrtPiPoly::one());
    }
    match flavor {
        Flavor::Typical => ef_typical(n, d, k, l),
        Flavor::Weighted => ef_weighted(n, d, k, l),
    }
}

/// Mean k-dimensional content of the typical k-face.
pub fn hk_typical_mean(n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    check_typical(n, d, k, 0)?;
    let q = binom(n, d - k) / faces_count(n, d, k)?;
    Ok(sphere_surface(k).scale(&q))
}

/// Mean k-dimensional content of the weighted typical k-face, `omega_{k+1} E v_k(W)`.
pub fn hk_weighted_mean(n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    Ok(sphere_surface(k) * v_weighted(n, d, k, k)?)
}

/// `E U_l(Z)`.
pub fn u_typical(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_typical(n, d, k, l)?;
    let m = n + k - d;
    Ok(rational(c(m, k - l) / (c(m, k) * int(2))))
}

/// `E U_l(W)` (isotropic).
pub fn u_weighted(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_weighted(n, d, k, l)?;
    if l == 0 {
        return Ok(rational(rat(1, 2)));
    }
    let m = n + k - d;
    let mut sum = SqrtPiPoly::zero();
    for s in 0..=(k - l) / 2 {
        let j = k - 2 * s;
        sum += &(coeff_b(m + l, j) * weighted_a(j, l as i32 - 2));
    }
    let prefactor = SqrtPiPoly::monomial(fact(m) / int(2), 2 * (d as i32 - n as i32 - k as i32));
    Ok(&prefactor * &sum)
}

pub fn u(flavor: Flavor, n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    match flavor {
        Flavor::Typical => u_typical(n, d, k, l),
        Flavor::Weighted => u_weighted(n, d, k, l),
    }
}

/// `E v_l(Z)`.
pub fn v_typical(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_typical(n, d, k, l)?;
    let m = n + k - d;
    Ok(rational(binom(m, k - l) / c(m, k)))
}

fn weighted_v_prefactor(m: u32) -> SqrtPiPoly {
    SqrtPiPoly::monomial(fact(m) / int(2), -2 * m as i32)
}

/// `E v_l(W)` (isotropic).
pub fn v_weighted(n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    check_weighted(n, d, k, l)?;
    let m = n + k - d;
    Ok(weighted_v_prefactor(m) * coeff_b(m + l, k) * coeff_a(k, l as i32))
}

pub fn v(flavor: Flavor, n: u32, d: u32, k: u32, l: u32) -> Result<SqrtPiPoly> {
    match flavor {
        Flavor::Typical => v_typical(n, d, k, l),
        Flavor::Weighted => v_weighted(n, d, k, l),
    }
}

/// `E v_{-1}(Z) = binom(n-d+k-1, k) / C(n-d+k, k)`, from the intrinsic-volume sum identity.
pub fn v_minus1_typical(n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    check_typical(n, d, k, 0)?;
    let m = n + k - d;
    pre(m >= 1, || "v_{-1} of a full subsphere is not defined".into())?;
    Ok(rational(binom(m - 1, k) / c(m, k)))
}

/// `E v_{-1}(W)` (isotropic): the polar cone's normalized content.
pub fn v_minus1_weighted(n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    check_weighted(n, d, k, 0)?;
    let m = n + k - d;
    let mut sum = SqrtPiPoly::zero();
    let mut j = k + 2;
    while j <= m + 1 {
        sum += &(coeff_b(m + 1, j) * weighted_a(j, -1));
        j += 2;
    }
    Ok(weighted_v_prefactor(m) * sum)
}

pub fn v_minus1(flavor: Flavor, n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    match flavor {
        Flavor::Typical => v_minus1_typical(n, d, k),
        Flavor::Weighted => v_minus1_weighted(n, d, k),
    }
}

/// Expected statistical dimension of the cone spanned by the face: `sum (j+1) E v_j`.
pub fn statdim(flavor: Flavor, n: u32, d: u32, k: u32) -> Result<SqrtPiPoly> {
    let mut out = SqrtPiPoly::zero();
    for j in 0..=k {
        out += &v(flavor, n, d, k, j)?.scale(&int(j as i64 + 1));
    }
    Ok(out)
}

fn poly_eval(coeffs: &[i64], n: i64) -> BigRational {
    coeffs
        .iter()
        .fold(BigRational::zero(), |acc, c| acc * int(n) + int(*c))
}

/// Separately derived closed forms for the expected statistical dimension of
/// full-dimensional cells (`k = d`).
pub fn statdim_closed(flavor: Flavor, d: u32, n: u32) -> Result<SqrtPiPoly> {
    pre(n > d, || format!("need n >= d + 1, got n={n}, d={d}"))?;
    let ni = n as i64;
    match (flavor, d) {
        (Flavor::Typical, 2..=5) => {
            let (num, den): (&[i64], &[i64]) = match d {
                2 => (&[1, 3, 6], &[2, -2, 4]),
                3 => (&[1, 3, 14, 24], &[2, -6, 16, 0]),
                4 => (&[1, 2, 23, 70, 120], &[2, -12, 46, -36, 48]),
                _ => (&[1, 0, 35, 120, 444, 720], &[2, -20, 110, -220, 368, 0]),
            };
            Ok(rational(poly_eval(num, ni) / poly_eval(den, ni)))
        }
        (Flavor::Weighted, 2) => {
            let mut inner = SqrtPiPoly::zero();
            let mut k = n % 2;
            while k <= n {
                let sign = if ((n - k) / 2) % 2 == 0 { 1 } else { -1 };
                let q = int(sign * (k as i64 + 2)) / fact(k);
                inner += &SqrtPiPoly::monomial(q, 2 * k as i32);
                k += 2;
            }
            if n % 2 == 0 {
                let sign = if (n / 2) % 2 == 0 { 2 } else { -2 };
                inner += &SqrtPiPoly::from_int(sign);
            } else {
                let sign = if ((n - 1) / 2) % 2 == 0 { 1 } else { -1 };
                inner += &SqrtPiPoly::monomial(int(sign), 2);
            }
            let pref = SqrtPiPoly::monomial(fact(n) / int(2), -2 * n as i32);
            Ok(rational(rat(1, 2)) + pref * inner)
        }
        (Flavor::Weighted, 3) => {
            let b = |j: u32| b_closed_form(n + j, BClosed::K3);
            let mut inner = b(0)?;
            inner += &(b(1)? * "4*pi^-1 + 4/3*pi^1".parse::<SqrtPiPoly>()?);
            inner += &b(2)?.scale(&int(12));
            inner += &(b(3)? * SqrtPiPoly::monomial(int(32), -2));
            Ok(SqrtPiPoly::monomial(fact(n) / int(2), -2 * n as i32) * inner)
        }
        _ => Err(Error::Precondition(format!(
            "no closed form for {} faces at d={d}",
            flavor.name()
        ))),
    }
}

/// Intensity of a Euclidean Poisson hyperplane process: exact rational or the
/// limit value `gamma* = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EuclidGamma {
    Rational(BigRational),
    Star,
}

impl std::str::FromStr for EuclidGamma {
    type Err = Error;
    /// Accepts `star` or a rational such as `3/2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "star" || s == "gamma_star" {
            return Ok(EuclidGamma::Star);
        }
        let q: SqrtPiPoly = s.parse()?;
        match q.as_rational() {
            Some(q) => Ok(EuclidGamma::Rational(q)),
            None => Err(Error::Config(format!("gamma must be rational or 'star', got '{s}'"))),
        }
    }
}

/// Parameters of a Euclidean expectation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuclidQuery {
    pub d: u32,
    pub k: u32,
    pub l: u32,
    pub gamma: EuclidGamma,
}

/// `Gamma((d+1)/2) / Gamma(d/2)`.
fn gamma_ratio(d: u32) -> SqrtPiPoly {
    gamma_half(d + 1)
        .unwrap()
        .div_monomial(&gamma_half(d).unwrap())
        .unwrap()
}

/// The intensity as a ring monomial.
pub fn gamma_value(d: u32, gamma: &EuclidGamma) -> Result<SqrtPiPoly> {
    pre(d >= 1, || "need d >= 1".into())?;
    match gamma {
        EuclidGamma::Rational(q) => {
            pre(*q > BigRational::zero(), || format!("gamma must be positive, got {q}"))?;
            Ok(rational(q.clone()))
        }
        EuclidGamma::Star => Ok(gamma_ratio(d) * SqrtPiPoly::s_pow(-1)),
    }
}

/// Expected l-th Euclidean intrinsic volume of the typical or weighted typical
/// k-face of an isotropic Poisson hyperplane tessellation of R^d.
pub fn euclid_v(flavor: Flavor, q: &EuclidQuery) -> Result<SqrtPiPoly> {
    let EuclidQuery { d, k, l, .. } = *q;
    pre(l <= k && k <= d, || format!("need l <= k <= d, got {l}, {k}, {d}"))?;
    let g = gamma_value(d, &q.gamma)?;
    let base = gamma_ratio(d).div_monomial(&g)?;
    let gamma_l = gamma_half(l + 2)?;
    Ok(match flavor {
        Flavor::Typical => (base.scale(&int(2))).pow(l) * gamma_l.scale(&binom(k, l)),
        Flavor::Weighted => {
            let two_pi = SqrtPiPoly::monomial(int(2), 2);
            (base * two_pi).pow(l) * gamma_l.scale(&fact(l).recip()) * coeff_a(k, l as i32)
        }
    })
}

/// `E f_{k-l}` of the weighted typical Euclidean k-face: `pi^l / l! * A[k, l]`.
pub fn euclid_f_weighted(k: u32, l: u32) -> Result<SqrtPiPoly> {
    pre(l <= k, || format!("need l <= k, got l={l}, k={k}"))?;
    Ok(SqrtPiPoly::monomial(fact(l).recip(), 2 * l as i32) * coeff_a(k, l as i32))
}

/// `n^l omega_{l+1} E v_l(face) - euclid_v(flavor, gamma*)`: the exact gap to the
/// Euclidean limit at intensity `n`.
pub fn euclid_limit_gap(d: u32, k: u32, l: u32, flavor: Flavor, n: u32) -> Result<SqrtPiPoly> {
    let scaled = v(flavor, n, d, k, l)?
        * sphere_surface(l).scale(&big(BigInt::from(n).pow(l)));
    let q = EuclidQuery {
        d,
        k,
        l,
        gamma: EuclidGamma::Star,
    };
    Ok(scaled - euclid_v(flavor, &q)?)
}

fn isect_check(n: u32, m: u32, d: u32) -> Result<()> {
    pre(d >= 1 && n > d && m > d, || {
        format!("need n, m > d >= 1, got n={n}, m={m}, d={d}")
    })
}

/// Pairs `(i, j)` of the kinematic sum `2 sum_k sum_{i=2k}^{d} v_{d-i+2k} v_i`, listed as `(d-i+2k, i)`.
fn kinematic_pairs(d: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 0..=d / 2 {
        for i in 2 * k..=d {
            out.push((d - i + 2 * k, i));
        }
    }
    out
}

/// Probability that the weighted typical cells of two independent isotropic
/// tessellations with `n` and `m` hyperspheres intersect.
pub fn isect_prob_weighted(n: u32, m: u32, d: u32) -> Result<SqrtPiPoly> {
    isect_check(n, m, d)?;
    let mut sum = SqrtPiPoly::zero();
    for (a, i) in kinematic_pairs(d) {
        let t = coeff_b(n + a, d) * coeff_b(m + i, d) * coeff_a(d, a as i32) * coeff_a(d, i as i32);
        sum += &t;
    }
    let pref = SqrtPiPoly::monomial(fact(n) * fact(m) / int(2), -2 * (n + m) as i32);
    Ok(pref * sum)
}

/// Kinematic recomposition `2 sum E v_a(n) E v_i(m)` for either flavor.
pub fn isect_recompose(flavor: Flavor, n: u32, m: u32, d: u32) -> Result<SqrtPiPoly> {
    isect_check(n, m, d)?;
    let mut sum = SqrtPiPoly::zero();
    for (a, i) in kinematic_pairs(d) {
        sum += &(v(flavor, n, d, d, a)? * v(flavor, m, d, d, i)?);
    }
    Ok(sum.scale(&int(2)))
}

/// Intersection probability for typical cells.
pub fn isect_prob_typical(n: u32, m: u32, d: u32) -> Result<SqrtPiPoly> {
    isect_recompose(Flavor::Typical, n, m, d)
}

pub fn isect_prob(flavor: Flavor, n: u32, m: u32, d: u32) -> Result<SqrtPiPoly> {
    match flavor {
        Flavor::Typical => isect_prob_typical(n, m, d),
        Flavor::Weighted => isect_prob_weighted(n, m, d),
    }
}

/// Probability that the weighted typical cell of an isotropic tessellation with
/// `n` hyperspheres meets a uniformly rotated fixed polytope with intrinsic
/// volumes `v_0..v_d`.
pub fn isect_prob_fixed(vols: &[SqrtPiPoly], n: u32, d: u32) -> Result<SqrtPiPoly> {
    pre(vols.len() == d as usize + 1, || {
        format!("expected {} intrinsic volumes, got {}", d + 1, vols.len())
    })?;
    pre(n > d, || format!("need n >= d + 1, got n={n}"))?;
    let mut sum = SqrtPiPoly::zero();
    for (a, i) in kinematic_pairs(d) {
        sum += &(coeff_b(n + a, d) * coeff_a(d, a as i32) * &vols[i as usize]);
    }
    Ok(SqrtPiPoly::monomial(fact(n), -2 * n as i32) * sum)
}

/// Exact value of any query.
pub fn exact(q: &ExpectationQuery) -> Result<SqrtPiPoly> {
    let (n, d, k, l, fl) = (q.n, q.d, q.k, q.l, q.flavor);
    match q.quantity {
        Quantity::F => ef(fl, n, d, k, l),
        Quantity::U => u(fl, n, d, k, l),
        Quantity::V => v(fl, n, d, k, l),
        Quantity::VMinus1 => v_minus1(fl, n, d, k),
        Quantity::Statdim => statdim(fl, n, d, k),
        Quantity::HkMean => match fl {
            Flavor::Typical => hk_typical_mean(n, d, k),
            Flavor::Weighted => hk_weighted_mean(n, d, k),
        },
        Quantity::Isect => {
            let m = q
                .m
                .ok_or_else(|| Error::Precondition("isect needs a second intensity m".into()))?;
            isect_prob(fl, n, m, d)
        }
    }
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub n: u32,
    pub d: u32,
    pub k: u32,
    pub l: u32,
    pub status: CheckStatus,
}

/// Parameter grid for [`identity_suite`]: `1 <= d <= d_max`, `0 <= l <= k <= d`,
/// `d + 1 <= n <= d + n_extra`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityGrid {
    pub d_max: u32,
    pub n_extra: u32,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, CheckStatus::Fail(_)))
    }

    pub fn count(&self, identity: &str) -> (usize, usize) {
        let of: Vec<_> = self.checks.iter().filter(|c| c.identity == identity).collect();
        let pass = of.iter().filter(|c| c.status == CheckStatus::Pass).count();
        (pass, of.len())
    }
}

fn status_eq(lhs: Result<SqrtPiPoly>, rhs: Result<SqrtPiPoly>) -> CheckStatus {
    match (lhs, rhs) {
        (Ok(a), Ok(b)) if a == b => CheckStatus::Pass,
        (Ok(a), Ok(b)) => CheckStatus::Fail(format!("{a} != {b}")),
        (Err(e), _) | (_, Err(e)) => CheckStatus::Fail(e.to_string()),
    }
}

/// Verifies the exact identities linking face numbers, Quermass integrals and
/// intrinsic volumes over a grid:
/// * `efron`: `E f_{k-l}(W_n) = 2 binom(n-d+k, l) E U_l(W_{n-l})`
/// * `uv_typical`, `uv_weighted`: `v_l = U_l - U_{l+2}`
/// * `f0_equal`: `E f_0(W) = E f_0(Z)` at `n = d + 1`
/// * `f0_monotone`: `E f_0(W) > C(n-d+k,k) / (2^k C(n-d,k)) E f_0(Z)` for `n >= d + 2`
/// * `v_sum_weighted`: `sum_{i=-1}^{k} E v_i(W) = 1`
/// * `v_sum_typical`: `sum_{l=0}^{k} E v_l(Z) = 1 - binom(n-d+k-1, k) / C(n-d+k, k)`
pub fn identity_suite(grid: IdentityGrid) -> IdentityReport {
    let mut report = IdentityReport::default();
    let mut push = |identity, n, d, k, l, status| {
        report.checks.push(IdentityCheck {
            identity,
            n,
            d,
            k,
            l,
            status,
        })
    };
    for d in 1..=grid.d_max {
        for k in 0..=d {
            for n in d + 1..=d + grid.n_extra {
                for l in 0..=k {
                    if n - l > d {
                        let lhs = ef(Flavor::Weighted, n, d, k, k - l);
                        let rhs = u_weighted(n - l, d, k, l)
                            .map(|u| u.scale(&(binom(n + k - d, l) * int(2))));
                        push("efron", n, d, k, l, status_eq(lhs, rhs));
                    } else {
                        push("efron", n, d, k, l, CheckStatus::Skipped("n - l <= d".into()));
                    }
                    for fl in Flavor::BOTH {
                        let lhs = v(fl, n, d, k, l);
                        let shifted = if l + 2 <= k {
                            u(fl, n, d, k, l + 2)
                        } else {
                            Ok(SqrtPiPoly::zero())
                        };
                        let rhs = u(fl, n, d, k, l).and_then(|a| shifted.map(|b| a - b));
                        let name = match fl {
                            Flavor::Typical => "uv_typical",
                            Flavor::Weighted => "uv_weighted",
                        };
                        push(name, n, d, k, l, status_eq(lhs, rhs));
                    }
                }
                let total = (0..=k)
                    .map(|l| v_weighted(n, d, k, l))
                    .chain(std::iter::once(v_minus1_weighted(n, d, k)))
                    .sum::<Result<SqrtPiPoly>>();
                push("v_sum_weighted", n, d, k, 0, status_eq(total, Ok(SqrtPiPoly::one())));

                let total = (0..=k).map(|l| v_typical(n, d, k, l)).sum::<Result<SqrtPiPoly>>();
                let m = n + k - d;
                let expect = rational(BigRational::one() - binom(m - 1, k) / c(m, k));
                push("v_sum_typical", n, d, k, 0, status_eq(total, Ok(expect)));

                if k >= 1 {
                    let w = ef_weighted(n, d, k, 0);
                    let z = ef_typical(n, d, k, 0);
                    if n == d + 1 {
                        push("f0_equal", n, d, k, 0, status_eq(w, z));
                    } else {
                        let factor = c(m, k) / (big(BigInt::from(2).pow(k)) * c(n - d, k));
                        let status = match (w, z) {
                            (Ok(w), Ok(z)) => {
                                let diff = (w - z.scale(&factor)).to_f64();
                                if diff > 0.0 {
                                    CheckStatus::Pass
                                } else {
                                    CheckStatus::Fail(format!("difference {diff}"))
                                }
                            }
                            (Err(e), _) | (_, Err(e)) => CheckStatus::Fail(e.to_string()),
                        };
                        push("f0_monotone", n, d, k, 0, status);
                    }
                }
            }
        }
    }
    report
}
