//! Software high-precision evaluation of ring elements.

use std::fmt;
use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::SqrtPiPoly;

const GUARD: u32 = 20;

/// Fixed-point decimal: the value is `scaled / 10^digits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    scaled: BigInt,
    digits: u32,
}

impl Decimal {
    pub fn scaled(&self) -> &BigInt {
        &self.scaled
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn to_f64(&self) -> f64 {
        format!("{}e-{}", self.scaled, self.digits)
            .parse()
            .expect("decimal literal")
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.scaled.is_negative();
        let mut body = self.scaled.abs().to_string();
        let d = self.digits as usize;
        if body.len() <= d {
            body = format!("{}{}", "0".repeat(d + 1 - body.len()), body);
        }
        let (int_part, frac) = body.split_at(body.len() - d);
        if neg {
            f.write_str("-")?;
        }
        if d == 0 {
            write!(f, "{int_part}")
        } else {
            write!(f, "{int_part}.{frac}")
        }
    }
}

fn pow10(n: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), n as usize)
}

fn arctan_inv(x: u32, unity: &BigInt) -> BigInt {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut term = unity / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let t = &term / BigInt::from(2 * k + 1);
        if t.is_zero() {
            break;
        }
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    sum
}

static PI_CACHE: Mutex<Option<(u32, BigInt)>> = Mutex::new(None);

/// `floor(pi * 10^digits)` up to one unit, from Machin's formula; memoized.
pub fn pi_scaled(digits: u32) -> BigInt {
    {
        let guard = PI_CACHE.lock().unwrap();
        if let Some((have, v)) = guard.as_ref() {
            if *have >= digits {
                return v / pow10(have - digits);
            }
        }
    }
    let work = digits + 10;
    let unity = pow10(work);
    let pi = (arctan_inv(5, &unity) * 16u32 - arctan_inv(239, &unity) * 4u32) / pow10(10);
    let mut guard = PI_CACHE.lock().unwrap();
    match guard.as_ref() {
        Some((have, _)) if *have >= digits => {}
        _ => *guard = Some((digits, pi.clone())),
    }
    pi
}

fn log10_upper(c: &num_rational::BigRational) -> f64 {
    let nb = c.numer().bits() as f64;
    let db = c.denom().bits() as f64;
    (nb - db + 1.0) * std::f64::consts::LOG10_2
}

fn working_digits(p: &SqrtPiPoly, digits: u32) -> u32 {
    let log_pi_half = std::f64::consts::PI.log10() / 2.0;
    let mut worst: f64 = 0.0;
    for (e, c) in p.terms() {
        let mut b = log10_upper(c) + ((e.unsigned_abs() + 1) as f64).log10();
        if e > 0 {
            b += e as f64 * log_pi_half;
        }
        worst = worst.max(b);
    }
    let count = (p.len().max(1) as f64).log10();
    digits + GUARD + (worst + count).ceil().max(0.0) as u32
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let twice = r.abs() * 2u32;
    if twice >= *b {
        if a.sign() == Sign::Minus {
            q - 1u32
        } else {
            q + 1u32
        }
    } else {
        q
    }
}

pub(super) fn eval(p: &SqrtPiPoly, digits: u32) -> Decimal {
    if p.is_zero() {
        return Decimal {
            scaled: BigInt::zero(),
            digits,
        };
    }
    let w = working_digits(p, digits);
    let unit = pow10(w);
    let root = (pi_scaled(w) * &unit).sqrt();
    let inv_root = (&unit * &unit) / &root;

    let lo = p.min_exp().unwrap().min(0);
    let hi = p.max_exp().unwrap().max(0);
    let mut up = vec![unit.clone()];
    for _ in 0..hi {
        let next = up.last().unwrap() * &root / &unit;
        up.push(next);
    }
    let mut down = vec![unit.clone()];
    for _ in 0..(-lo) {
        let next = down.last().unwrap() * &inv_root / &unit;
        down.push(next);
    }

    let mut sum = BigInt::zero();
    for (e, c) in p.terms() {
        let power = if e >= 0 {
            &up[e as usize]
        } else {
            &down[(-e) as usize]
        };
        sum += c.numer() * power / c.denom();
    }
    Decimal {
        scaled: round_div(&sum, &pow10(w - digits)),
        digits,
    }
}

pub(super) fn to_f64(p: &SqrtPiPoly) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let threshold = pow10(18);
    let mut digits = 30;
    loop {
        let d = eval(p, digits);
        if d.scaled.abs() >= threshold || digits > 4000 {
            return d.to_f64();
        }
        digits += 40;
    }
}

/// Formats a double with `sig` significant digits (round-half-even on the
/// binary value), positional for moderate magnitudes, trailing zeros trimmed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };
    if !(-6..15).contains(&exp) {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        return if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        };
    }
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let point = exp as usize + 1;
        let padded = if digits.len() < point {
            format!("{digits}{}", "0".repeat(point - digits.len()))
        } else {
            digits
        };
        let (a, b) = padded.split_at(point);
        if b.is_empty() {
            a.to_string()
        } else {
            format!("{a}.{b}")
        }
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    format!("{sign}{body}")
}
