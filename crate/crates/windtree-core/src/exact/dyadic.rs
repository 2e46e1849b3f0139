//! Dyadic numbers `m * 2^e` used as endpoints of interval enclosures.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use super::Rational;

/// Exact dyadic rational `mantissa * 2^exponent`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    pub mantissa: BigInt,
    pub exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        Dyadic { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Dyadic::new(BigInt::zero(), 0)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// 2^-bits, the canonical width target for `bits` bits of precision.
    pub fn ulp(bits: u32) -> Self {
        Dyadic::new(BigInt::one(), -(bits as i64))
    }

    pub fn to_rational(&self) -> Rational {
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            Rational::from(&self.mantissa * two.pow(self.exponent as u32))
        } else {
            Rational::new(self.mantissa.clone(), two.pow((-self.exponent) as u32))
        }
    }

    /// Largest dyadic with `bits` fractional bits that is <= r.
    pub fn from_rational_floor(r: &Rational, bits: u32) -> Self {
        let scaled = r * Rational::from(BigInt::from(2).pow(bits));
        Dyadic::new(scaled.floor().to_integer(), -(bits as i64))
    }

    /// Smallest dyadic with `bits` fractional bits that is >= r.
    pub fn from_rational_ceil(r: &Rational, bits: u32) -> Self {
        let scaled = r * Rational::from(BigInt::from(2).pow(bits));
        Dyadic::new(scaled.ceil().to_integer(), -(bits as i64))
    }

    /// Align two dyadics on a common exponent, returning the mantissas.
    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a - b, e)
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic::new(-self.mantissa.clone(), self.exponent)
    }

    pub fn sign(&self) -> i8 {
        match self.mantissa.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    /// Round down so the result has at most `bits` fractional bits.
    pub fn round_down(&self, bits: u32) -> Dyadic {
        let target = -(bits as i64);
        if self.exponent >= target {
            return self.clone();
        }
        let shift = (target - self.exponent) as usize;
        Dyadic::new(self.mantissa.div_floor(&(BigInt::one() << shift)), target)
    }

    /// Round up so the result has at most `bits` fractional bits.
    pub fn round_up(&self, bits: u32) -> Dyadic {
        let target = -(bits as i64);
        if self.exponent >= target {
            return self.clone();
        }
        let shift = (target - self.exponent) as usize;
        Dyadic::new(self.mantissa.div_ceil(&(BigInt::one() << shift)), target)
    }

    pub fn floor_int(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            self.mantissa.div_floor(&(BigInt::one() << (-self.exponent) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.to_rational();
        rational_to_f64(&r)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Out-of-range numerator/denominator: scale down by a common power of two.
    let bits_n = r.numer().bits() as i64;
    let bits_d = r.denom().bits() as i64;
    let shift = (bits_n.max(bits_d) - 512).max(0) as usize;
    let n = r.numer() >> shift;
    let d = r.denom() >> shift;
    if d.is_zero() {
        return if r.numer().is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    Rational::new(n, d).to_f64().unwrap_or(f64::NAN)
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}
