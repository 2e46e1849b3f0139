//! Parsing of scalar literals: "p/q", decimal strings, and "x+y*sqrt(D)".

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

use super::{ExactError, ExactScalar, Rational};

pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ExactError::Parse("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|e| ExactError::Parse(format!("bad numerator {num:?}: {e}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|e| ExactError::Parse(format!("bad denominator {den:?}: {e}")))?;
        if d.is_zero() {
            return Err(ExactError::Parse("zero denominator".into()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') { -1 } else { 1 };
        let int_part = int_part.trim();
        let i = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part)
                .map_err(|e| ExactError::Parse(format!("bad integer part {int_part:?}: {e}")))?
        };
        if !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(ExactError::Parse(format!("bad fractional part {frac_part:?}")));
        }
        let scale = BigInt::from(10).pow(frac_part.len() as u32);
        let f = if frac_part.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(frac_part)
                .map_err(|e| ExactError::Parse(format!("bad fractional part {frac_part:?}: {e}")))?
        };
        let abs = Rational::new(i.clone().abs() * &scale + f, scale);
        return Ok(if sign < 0 { -abs } else { abs });
    }
    BigInt::from_str(s)
        .map(Rational::from)
        .map_err(|e| ExactError::Parse(format!("bad number {s:?}: {e}")))
}

/// One summand of a scalar literal: a rational or `coeff*sqrt(D)`.
enum Term {
    Rat(Rational),
    Surd(Rational, u64),
}

fn parse_term(term: &str) -> Result<Term, ExactError> {
    let t = term.trim();
    if let Some(pos) = t.find("sqrt(") {
        let close = t[pos..]
            .find(')')
            .ok_or_else(|| ExactError::Parse(format!("unclosed sqrt in {t:?}")))?
            + pos;
        let d: u64 = t[pos + 5..close]
            .trim()
            .parse()
            .map_err(|e| ExactError::Parse(format!("bad radicand in {t:?}: {e}")))?;
        if !t[close + 1..].trim().is_empty() {
            return Err(ExactError::Parse(format!("trailing characters in {t:?}")));
        }
        let coeff_str = t[..pos].trim().trim_end_matches('*').trim();
        let coeff = match coeff_str {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c => parse_rational(c)?,
        };
        Ok(Term::Surd(coeff, d))
    } else {
        Ok(Term::Rat(parse_rational(t)?))
    }
}

/// Split at top-level '+'/'-' signs (not inside parentheses, not exponents).
fn split_terms(s: &str) -> Vec<String> {
    let mut terms = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            '+' | '-' if depth == 0 && i > 0 => {
                // A sign right after '/', '*' or another sign binds to its term.
                let prev = s[..i].chars().rev().find(|ch| !ch.is_whitespace());
                if matches!(prev, Some('/') | Some('*') | Some('+') | Some('-')) {
                    current.push(c);
                } else {
                    terms.push(current.clone());
                    current.clear();
                    current.push(c);
                }
            }
            _ => current.push(c),
        }
    }
    terms.push(current);
    terms
}

/// Parse "p/q", a decimal string, or a sum of rational and `*sqrt(D)` terms.
pub fn parse_scalar(s: &str) -> Result<ExactScalar, ExactError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ExactError::Parse("empty scalar".into()));
    }
    let mut x = Rational::zero();
    let mut y = Rational::zero();
    let mut d: Option<u64> = None;
    for raw in split_terms(s) {
        match parse_term(&raw)? {
            Term::Rat(r) => x += r,
            Term::Surd(coeff, rad) => {
                let surd = ExactScalar::quadratic(Rational::zero(), coeff, rad);
                match surd {
                    ExactScalar::Rational(r) => x += r,
                    ExactScalar::Quadratic(q) => {
                        match d {
                            None => d = Some(q.d),
                            Some(existing) if existing == q.d => {}
                            Some(existing) => {
                                return Err(ExactError::MixedField { d1: existing, d2: q.d })
                            }
                        }
                        y += q.y;
                    }
                    ExactScalar::Interval(_) => unreachable!(),
                }
            }
        }
    }
    Ok(match d {
        Some(d) if !y.is_zero() => ExactScalar::quadratic(x, y, d),
        _ => ExactScalar::Rational(x),
    })
}
