//! The exact-expression text format.
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := rational ['*' base '^' sint] | base '^' sint
//! rational := uint ['/' posint]
//! base     := 'pi' | 'sqrtpi'
//! ```
//! `pi^j` is s-exponent `2j`; `sqrtpi^e` is s-exponent `e`. Whitespace is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::SqrtPiPoly;
use crate::error::{Error, Result};

pub(super) fn format(p: &SqrtPiPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (e, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        let base = if e == 0 {
            None
        } else if e % 2 == 0 {
            Some(format!("pi^{}", e / 2))
        } else {
            Some(format!("sqrtpi^{e}"))
        };
        match base {
            None => out.push_str(&fmt_rational(&a)),
            Some(b) if a.is_one() => out.push_str(&b),
            Some(b) => {
                out.push_str(&fmt_rational(&a));
                out.push('*');
                out.push_str(&b);
            }
        }
    }
    out
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn sint(&mut self) -> Result<i32> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let at = self.pos;
        let v = self.uint()?;
        let v: i32 = match i32::try_from(&v) {
            Ok(v) if v <= i32::MAX / 2 => v,
            _ => {
                return Err(Error::Parse {
                    pos: at,
                    msg: "exponent out of range".into(),
                })
            }
        };
        Ok(if neg { -v } else { v })
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    /// Parses `base '^' sint` and returns the s-exponent.
    fn power(&mut self) -> Result<i32> {
        let doubled = if self.keyword("sqrtpi") {
            false
        } else if self.keyword("pi") {
            true
        } else {
            return self.err("expected 'pi' or 'sqrtpi'");
        };
        if !self.eat(b'^') {
            return self.err("expected '^'");
        }
        let e = self.sint()?;
        Ok(if doubled { 2 * e } else { e })
    }

    fn term(&mut self) -> Result<(i32, BigRational)> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let den = if self.eat(b'/') {
                    let at = self.pos;
                    let d = self.uint()?;
                    if d.is_zero() {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "zero denominator".into(),
                        });
                    }
                    d
                } else {
                    BigInt::one()
                };
                let q = BigRational::new(num, den);
                if self.eat(b'*') {
                    Ok((self.power()?, q))
                } else {
                    Ok((0, q))
                }
            }
            Some(b'p') | Some(b's') => Ok((self.power()?, BigRational::one())),
            Some(_) => self.err("expected a term"),
            None => self.err("unexpected end of input"),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<SqrtPiPoly> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    let mut neg = if p.eat(b'-') {
        true
    } else {
        p.eat(b'+');
        false
    };
    loop {
        let (e, c) = p.term()?;
        out.push((e, if neg { -c } else { c }));
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                neg = false;
            }
            Some(b'-') => {
                p.pos += 1;
                neg = true;
            }
            Some(_) => return p.err("expected '+' or '-'"),
        }
    }
    Ok(SqrtPiPoly::from_terms(out))
}
