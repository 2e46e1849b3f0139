//! Exact arithmetic kernel.
//!
//! Three kinds of scalar share one type:
//!
//! * arbitrary-precision rationals,
//! * real quadratic irrationals `x + y*sqrt(D)` over a fixed square-free `D >= 2`,
//! * adaptive dyadic intervals with a refinement handle, for reals that are
//!   only defined as limits (continued-fraction truncations and the like).
//!
//! Comparisons, signs and floors are certified: they are exact on the first
//! two kinds and refine enclosures until a decision is reached (or a budget
//! is exhausted) on the third. Quadratic values over distinct `D` never mix
//! implicitly; promotion to an interval is explicit via [`ExactScalar::to_interval`].

mod dyadic;
mod parse;

pub use dyadic::{rational_to_f64, Dyadic};
pub use parse::parse_scalar;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

pub type Rational = num_rational::BigRational;

/// Default number of precision doublings before an interval comparison gives up.
pub const DEFAULT_REFINE_BUDGET: u32 = 64;

/// Starting precision (bits) for interval refinement loops.
const INITIAL_BITS: u32 = 32;

/// Hard ceiling on working precision; refinement loops stop doubling here.
/// Nothing in this artifact needs anywhere near 16kbit enclosures; the cap
/// keeps undecidable sign questions from burning minutes before erroring.
const MAX_BITS: u32 = 1 << 14;

#[derive(Debug, Clone)]
pub enum ExactError {
    /// Interval refinement exhausted its budget without separating the
    /// operands; carries the final enclosure for diagnostics.
    Undecided { lo: Box<Dyadic>, hi: Box<Dyadic> },
    /// Two quadratic values over different fields were combined without promotion.
    MixedField { d1: u64, d2: u64 },
    DivisionByZero,
    /// A refinement handle could not reach the requested width.
    BudgetExceeded { width: Box<Rational>, target: Box<Rational> },
    /// Operand outside the documented domain of the operation.
    Domain(&'static str),
    Parse(String),
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::Undecided { lo, hi } => {
                write!(f, "UNDECIDED: enclosure [{lo}, {hi}] did not separate within budget")
            }
            ExactError::MixedField { d1, d2 } => {
                write!(f, "MIXED_FIELD: cannot mix sqrt({d1}) with sqrt({d2}) without promotion")
            }
            ExactError::DivisionByZero => write!(f, "DIVISION_BY_ZERO"),
            ExactError::BudgetExceeded { width, target } => {
                write!(f, "BUDGET_EXCEEDED: width {width} above target {target}")
            }
            ExactError::Domain(msg) => write!(f, "domain error: {msg}"),
            ExactError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for ExactError {}

/// `x + y*sqrt(d)` with `y != 0` and `d` square-free, `d >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadratic {
    pub x: Rational,
    pub y: Rational,
    pub d: u64,
}

/// Refinement callback: produce an enclosure of width about `2^-bits`.
pub trait RefineFn: Send + Sync {
    fn enclose(&self, bits: u32) -> Result<(Dyadic, Dyadic), ExactError>;
}

#[derive(Clone)]
enum RefineHandle {
    /// Deserialized or otherwise sourceless: the bounds are all we know.
    Frozen,
    /// Backed by an exact number (used when exact values are promoted).
    Exact(Arc<ExactScalar>),
    /// Backed by a computation that can be rerun at higher precision.
    Dynamic(Arc<dyn RefineFn>),
}

/// Dyadic enclosure `[lo, hi]` plus a handle that can tighten it.
#[derive(Clone)]
pub struct IntervalScalar {
    pub lo: Dyadic,
    pub hi: Dyadic,
    handle: RefineHandle,
}

impl IntervalScalar {
    pub fn width(&self) -> Rational {
        self.hi.sub(&self.lo).to_rational()
    }

    /// Re-run the handle at the given precision; never widens the enclosure.
    fn enclose_at(&self, bits: u32) -> Result<IntervalScalar, ExactError> {
        let (lo, hi) = match &self.handle {
            RefineHandle::Frozen => (self.lo.clone(), self.hi.clone()),
            RefineHandle::Exact(n) => n.enclosure(bits)?,
            RefineHandle::Dynamic(f) => f.enclose(bits)?,
        };
        // Intersect with what we already know.
        let lo = if lo > self.lo { lo } else { self.lo.clone() };
        let hi = if hi < self.hi { hi } else { self.hi.clone() };
        if lo > hi {
            return Err(ExactError::Domain("refinement produced inconsistent bounds"));
        }
        Ok(IntervalScalar { lo, hi, handle: self.handle.clone() })
    }
}

/// An exact real number: rational, quadratic irrational, or refinable enclosure.
#[derive(Clone)]
pub enum ExactScalar {
    Rational(Rational),
    Quadratic(Quadratic),
    Interval(IntervalScalar),
}

/// Split `n` into `s^2 * d` with `d` square-free; returns `(s, d)`.
fn squarefree_part(n: u64) -> (u64, u64) {
    assert!(n > 0, "squarefree_part needs a positive integer");
    let mut s: u64 = 1;
    let mut d: u64 = 1;
    let mut m = n;
    let mut p: u64 = 2;
    while p.saturating_mul(p) <= m && p < 1_000_000 {
        if m.is_multiple_of(p) {
            let mut e = 0u32;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            s *= p.pow(e / 2);
            if e % 2 == 1 {
                d *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    // Remainder is prime, a prime square, or a product of two large primes.
    if m > 1 {
        let r = m.sqrt();
        if r * r == m {
            s *= r;
        } else {
            d *= m;
        }
    }
    (s, d)
}

/// Enclose `sqrt(d)` within `2^-bits` using integer square roots.
fn sqrt_enclosure(d: u64, bits: u32) -> (Dyadic, Dyadic) {
    let scaled = BigInt::from(d) << (2 * bits as usize);
    let root = scaled.sqrt();
    (
        Dyadic::new(root.clone(), -(bits as i64)),
        Dyadic::new(root + BigInt::one(), -(bits as i64)),
    )
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::Rational(Rational::zero())
    }

    pub fn one() -> Self {
        ExactScalar::Rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::Rational(Rational::from(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0);
        ExactScalar::Rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactScalar::Rational(r)
    }

    /// `x + y*sqrt(d)`, normalizing the radicand to its square-free part and
    /// collapsing to a rational when the irrational part vanishes.
    pub fn quadratic(x: Rational, y: Rational, d: u64) -> Self {
        if y.is_zero() || d == 0 {
            return ExactScalar::Rational(x);
        }
        let (s, d) = squarefree_part(d);
        let y = y * Rational::from(BigInt::from(s));
        if d == 1 {
            ExactScalar::Rational(x + y)
        } else {
            ExactScalar::Quadratic(Quadratic { x, y, d })
        }
    }

    /// `sqrt(r)` for a non-negative rational, as a rational or quadratic.
    pub fn sqrt_rational(r: &Rational) -> Result<Self, ExactError> {
        if r.is_negative() {
            return Err(ExactError::Domain("sqrt of a negative rational"));
        }
        if r.is_zero() {
            return Ok(ExactScalar::zero());
        }
        let p = r.numer().to_u64().ok_or(ExactError::Domain("sqrt radicand too large"))?;
        let q = r.denom().to_u64().ok_or(ExactError::Domain("sqrt radicand too large"))?;
        let n = p.checked_mul(q).ok_or(ExactError::Domain("sqrt radicand too large"))?;
        let (s, d) = squarefree_part(n);
        let coeff = Rational::new(BigInt::from(s), BigInt::from(q));
        Ok(ExactScalar::quadratic(Rational::zero(), coeff, d))
    }

    /// Interval scalar from a dynamic refinement source.
    pub fn interval_from_fn(f: Arc<dyn RefineFn>) -> Result<Self, ExactError> {
        let (lo, hi) = f.enclose(INITIAL_BITS)?;
        if lo > hi {
            return Err(ExactError::Domain("refinement source produced lo > hi"));
        }
        Ok(ExactScalar::Interval(IntervalScalar { lo, hi, handle: RefineHandle::Dynamic(f) }))
    }

    /// Frozen interval: known bounds, no way to tighten them.
    pub fn interval_frozen(lo: Dyadic, hi: Dyadic) -> Result<Self, ExactError> {
        if lo > hi {
            return Err(ExactError::Domain("interval lo > hi"));
        }
        Ok(ExactScalar::Interval(IntervalScalar { lo, hi, handle: RefineHandle::Frozen }))
    }

    /// Explicit promotion of any scalar to the interval kind.
    pub fn to_interval(&self) -> Result<Self, ExactError> {
        match self {
            ExactScalar::Interval(_) => Ok(self.clone()),
            _ => {
                let (lo, hi) = self.enclosure(INITIAL_BITS)?;
                Ok(ExactScalar::Interval(IntervalScalar {
                    lo,
                    hi,
                    handle: RefineHandle::Exact(Arc::new(self.clone())),
                }))
            }
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ExactScalar::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ExactScalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn field_d(&self) -> Option<u64> {
        match self {
            ExactScalar::Quadratic(q) => Some(q.d),
            _ => None,
        }
    }

    /// Dyadic enclosure of width about `2^-bits` (exact kinds never fail).
    pub fn enclosure(&self, bits: u32) -> Result<(Dyadic, Dyadic), ExactError> {
        match self {
            ExactScalar::Rational(r) => Ok((
                Dyadic::from_rational_floor(r, bits),
                Dyadic::from_rational_ceil(r, bits),
            )),
            ExactScalar::Quadratic(q) => {
                let guard = bits + 8;
                let (slo, shi) = sqrt_enclosure(q.d, guard);
                let (ylo, yhi) = (
                    Dyadic::from_rational_floor(&q.y, guard),
                    Dyadic::from_rational_ceil(&q.y, guard),
                );
                // y * sqrt(d): sqrt enclosure is positive, so only y's sign matters.
                let (plo, phi) = if q.y.is_positive() {
                    (ylo.mul(&slo), yhi.mul(&shi))
                } else {
                    (ylo.mul(&shi), yhi.mul(&slo))
                };
                let xlo = Dyadic::from_rational_floor(&q.x, guard);
                let xhi = Dyadic::from_rational_ceil(&q.x, guard);
                Ok((xlo.add(&plo).round_down(bits), xhi.add(&phi).round_up(bits)))
            }
            ExactScalar::Interval(iv) => {
                let tightened = iv.enclose_at(bits)?;
                Ok((tightened.lo, tightened.hi))
            }
        }
    }

    /// Tighten an interval scalar to the requested width.
    ///
    /// Exact scalars and intervals already at the target are returned unchanged.
    pub fn refine(&self, target_width: &Rational) -> Result<Self, ExactError> {
        if !target_width.is_positive() {
            return Err(ExactError::Domain("target width must be positive"));
        }
        let iv = match self {
            ExactScalar::Interval(iv) => iv,
            _ => return Ok(self.clone()),
        };
        if iv.width() <= *target_width {
            return Ok(self.clone());
        }
        let mut bits = INITIAL_BITS;
        let mut current = iv.clone();
        let mut stalls = 0u32;
        for _ in 0..DEFAULT_REFINE_BUDGET {
            let before = current.width();
            current = current.enclose_at(bits)?;
            if current.width() <= *target_width {
                return Ok(ExactScalar::Interval(current));
            }
            if matches!(current.handle, RefineHandle::Frozen) {
                break;
            }
            if current.width() >= before {
                stalls += 1;
                if stalls >= 3 {
                    break;
                }
            } else {
                stalls = 0;
            }
            bits = bits.saturating_mul(2).min(MAX_BITS);
        }
        Err(ExactError::BudgetExceeded { width: Box::new(current.width()), target: Box::new(target_width.clone()) })
    }

    fn binop(
        &self,
        rhs: &ExactScalar,
        rational_op: impl Fn(&Rational, &Rational) -> Rational,
        quad_op: impl Fn(&Quadratic, &Quadratic) -> (Rational, Rational),
        interval_op: impl Fn(&Dyadic, &Dyadic, &Dyadic, &Dyadic) -> (Dyadic, Dyadic) + Send + Sync + 'static,
    ) -> Result<ExactScalar, ExactError> {
        use ExactScalar::*;
        match (self, rhs) {
            (Rational(a), Rational(b)) => Ok(Rational(rational_op(a, b))),
            (Quadratic(a), Quadratic(b)) => {
                if a.d != b.d {
                    return Err(ExactError::MixedField { d1: a.d, d2: b.d });
                }
                let (x, y) = quad_op(a, b);
                Ok(ExactScalar::quadratic(x, y, a.d))
            }
            (Rational(a), Quadratic(b)) => {
                let a = self::Quadratic { x: a.clone(), y: self::Rational::zero(), d: b.d };
                let (x, y) = quad_op(&a, b);
                Ok(ExactScalar::quadratic(x, y, b.d))
            }
            (Quadratic(a), Rational(b)) => {
                let b = self::Quadratic { x: b.clone(), y: self::Rational::zero(), d: a.d };
                let (x, y) = quad_op(a, &b);
                Ok(ExactScalar::quadratic(x, y, a.d))
            }
            (Interval(_), _) | (_, Interval(_)) => {
                let a = self.clone();
                let b = rhs.clone();
                let f = move |bits: u32| -> Result<(Dyadic, Dyadic), ExactError> {
                    let guard = bits.saturating_add(4).min(MAX_BITS);
                    let (alo, ahi) = a.enclosure(guard)?;
                    let (blo, bhi) = b.enclosure(guard)?;
                    Ok(interval_op(&alo, &ahi, &blo, &bhi))
                };
                ExactScalar::interval_from_fn(Arc::new(ClosureRefine(Box::new(f))))
            }
        }
    }

    pub fn add(&self, rhs: &ExactScalar) -> Result<ExactScalar, ExactError> {
        self.binop(
            rhs,
            |a, b| a + b,
            |a, b| (&a.x + &b.x, &a.y + &b.y),
            |alo, ahi, blo, bhi| (alo.add(blo), ahi.add(bhi)),
        )
    }

    pub fn sub(&self, rhs: &ExactScalar) -> Result<ExactScalar, ExactError> {
        self.binop(
            rhs,
            |a, b| a - b,
            |a, b| (&a.x - &b.x, &a.y - &b.y),
            |alo, ahi, blo, bhi| (alo.sub(bhi), ahi.sub(blo)),
        )
    }

    pub fn mul(&self, rhs: &ExactScalar) -> Result<ExactScalar, ExactError> {
        self.binop(
            rhs,
            |a, b| a * b,
            |a, b| {
                let d = Rational::from(BigInt::from(a.d));
                (&a.x * &b.x + &a.y * &b.y * d, &a.x * &b.y + &a.y * &b.x)
            },
            |alo, ahi, blo, bhi| {
                let candidates = [alo.mul(blo), alo.mul(bhi), ahi.mul(blo), ahi.mul(bhi)];
                let lo = candidates.iter().min().expect("nonempty").clone();
                let hi = candidates.iter().max().expect("nonempty").clone();
                (lo, hi)
            },
        )
    }

    pub fn neg(&self) -> ExactScalar {
        match self {
            ExactScalar::Rational(r) => ExactScalar::Rational(-r.clone()),
            ExactScalar::Quadratic(q) => ExactScalar::Quadratic(Quadratic {
                x: -q.x.clone(),
                y: -q.y.clone(),
                d: q.d,
            }),
            ExactScalar::Interval(iv) => {
                let inner = self.clone();
                let f = move |bits: u32| -> Result<(Dyadic, Dyadic), ExactError> {
                    let (lo, hi) = inner.enclosure(bits)?;
                    Ok((hi.neg(), lo.neg()))
                };
                ExactScalar::Interval(IntervalScalar {
                    lo: iv.hi.neg(),
                    hi: iv.lo.neg(),
                    handle: RefineHandle::Dynamic(Arc::new(ClosureRefine(Box::new(f)))),
                })
            }
        }
    }

    pub fn recip(&self) -> Result<ExactScalar, ExactError> {
        match self {
            ExactScalar::Rational(r) => {
                if r.is_zero() {
                    return Err(ExactError::DivisionByZero);
                }
                Ok(ExactScalar::Rational(r.recip()))
            }
            ExactScalar::Quadratic(q) => {
                // 1/(x + y sqrt(d)) = (x - y sqrt(d)) / (x^2 - y^2 d)
                let d = Rational::from(BigInt::from(q.d));
                let norm = &q.x * &q.x - &q.y * &q.y * d;
                if norm.is_zero() {
                    // Impossible for square-free d >= 2 with y != 0.
                    return Err(ExactError::DivisionByZero);
                }
                Ok(ExactScalar::quadratic(&q.x / &norm, -&q.y / &norm, q.d))
            }
            ExactScalar::Interval(_) => {
                let sign = self.sign()?;
                if sign == 0 {
                    return Err(ExactError::DivisionByZero);
                }
                let inner = self.clone();
                let f = move |bits: u32| -> Result<(Dyadic, Dyadic), ExactError> {
                    let mut b = bits.max(INITIAL_BITS);
                    for _ in 0..DEFAULT_REFINE_BUDGET {
                        let (lo, hi) = inner.enclosure(b)?;
                        if lo.sign() != 0 && lo.sign() == hi.sign() {
                            let rlo = lo.to_rational();
                            let rhi = hi.to_rational();
                            return Ok((
                                Dyadic::from_rational_floor(&rhi.recip(), bits),
                                Dyadic::from_rational_ceil(&rlo.recip(), bits),
                            ));
                        }
                        b = b.saturating_mul(2);
                    }
                    let (lo, hi) = inner.enclosure(b)?;
                    Err(ExactError::Undecided { lo: Box::new(lo), hi: Box::new(hi) })
                };
                ExactScalar::interval_from_fn(Arc::new(ClosureRefine(Box::new(f))))
            }
        }
    }

    pub fn div(&self, rhs: &ExactScalar) -> Result<ExactScalar, ExactError> {
        self.mul(&rhs.recip()?)
    }

    /// Certified sign: -1, 0 or +1.
    pub fn sign(&self) -> Result<i8, ExactError> {
        match self {
            ExactScalar::Rational(r) => Ok(rational_sign(r)),
            ExactScalar::Quadratic(q) => Ok(quadratic_sign(q)),
            ExactScalar::Interval(iv) => {
                if iv.lo.sign() > 0 {
                    return Ok(1);
                }
                if iv.hi.sign() < 0 {
                    return Ok(-1);
                }
                if iv.lo.sign() == 0 && iv.hi.sign() == 0 {
                    return Ok(0);
                }
                // Try to separate from zero by refining; an interval that is
                // exactly zero can only be certified through an exact witness.
                if let RefineHandle::Exact(n) = &iv.handle {
                    return n.sign();
                }
                let mut bits = INITIAL_BITS;
                let mut current = iv.clone();
                let mut stalls = 0u32;
                for _ in 0..DEFAULT_REFINE_BUDGET {
                    let before = current.width();
                    current = current.enclose_at(bits)?;
                    if current.lo.sign() > 0 {
                        return Ok(1);
                    }
                    if current.hi.sign() < 0 {
                        return Ok(-1);
                    }
                    if matches!(current.handle, RefineHandle::Frozen) {
                        break;
                    }
                    if current.width() >= before {
                        stalls += 1;
                        if stalls >= 3 {
                            break;
                        }
                    } else {
                        stalls = 0;
                    }
                    bits = bits.saturating_mul(2).min(MAX_BITS);
                }
                Err(ExactError::Undecided { lo: Box::new(current.lo), hi: Box::new(current.hi) })
            }
        }
    }

    pub fn is_positive(&self) -> Result<bool, ExactError> {
        Ok(self.sign()? > 0)
    }

    pub fn is_zero_exact(&self) -> Result<bool, ExactError> {
        Ok(self.sign()? == 0)
    }

    /// Exact total-order comparison.
    pub fn compare(&self, rhs: &ExactScalar) -> Result<Ordering, ExactError> {
        use ExactScalar::*;
        match (self, rhs) {
            (Rational(a), Rational(b)) => Ok(a.cmp(b)),
            (Interval(a), Interval(b)) => {
                // Equality witness: both enclosures share the same exact backing
                // or the same dynamic source.
                match (&a.handle, &b.handle) {
                    (RefineHandle::Exact(u), RefineHandle::Exact(v)) => match u.compare(v) {
                        Err(ExactError::MixedField { .. }) => {}
                        other => return other,
                    },
                    (RefineHandle::Dynamic(u), RefineHandle::Dynamic(v))
                        if Arc::ptr_eq(u, v) => {
                            return Ok(Ordering::Equal);
                        }
                    _ => {}
                }
                if a.lo == a.hi && b.lo == b.hi {
                    return Ok(a.lo.cmp(&b.lo));
                }
                self.sub(rhs)?.sign().map(sign_to_ordering)
            }
            (Interval(a), _) => {
                if let RefineHandle::Exact(n) = &a.handle {
                    return n.compare(rhs);
                }
                self.sub(rhs)?.sign().map(sign_to_ordering)
            }
            (_, Interval(b)) => {
                if let RefineHandle::Exact(n) = &b.handle {
                    return self.compare(n);
                }
                self.sub(rhs)?.sign().map(sign_to_ordering)
            }
            _ => self.sub(rhs)?.sign().map(sign_to_ordering),
        }
    }

    /// Exact floor. Never fails on rational or quadratic kinds.
    pub fn floor(&self) -> Result<BigInt, ExactError> {
        match self {
            ExactScalar::Rational(r) => Ok(r.floor().to_integer()),
            ExactScalar::Quadratic(_) => {
                // A quadratic irrational is never an integer, so some precision
                // separates it from the nearest integers.
                let mut bits = INITIAL_BITS;
                loop {
                    let (lo, hi) = self.enclosure(bits)?;
                    let flo = lo.floor_int();
                    let fhi = hi.floor_int();
                    if flo == fhi {
                        return Ok(flo);
                    }
                    bits = bits.saturating_mul(2).min(MAX_BITS);
                }
            }
            ExactScalar::Interval(iv) => {
                let mut bits = INITIAL_BITS;
                let mut current = iv.clone();
                let mut stalls = 0u32;
                for _ in 0..DEFAULT_REFINE_BUDGET {
                    let before = current.width();
                    current = current.enclose_at(bits)?;
                    let flo = current.lo.floor_int();
                    let fhi = current.hi.floor_int();
                    if flo == fhi {
                        return Ok(flo);
                    }
                    if matches!(current.handle, RefineHandle::Frozen) {
                        break;
                    }
                    if current.width() >= before {
                        stalls += 1;
                        if stalls >= 3 {
                            break;
                        }
                    } else {
                        stalls = 0;
                    }
                    bits = bits.saturating_mul(2).min(MAX_BITS);
                }
                Err(ExactError::Undecided { lo: Box::new(current.lo), hi: Box::new(current.hi) })
            }
        }
    }

    /// `floor(u / v)` for `u >= 0`, `v > 0`, decided exactly for exact kinds.
    pub fn floor_ratio(&self, v: &ExactScalar) -> Result<BigInt, ExactError> {
        match v.sign()? {
            0 => return Err(ExactError::DivisionByZero),
            s if s < 0 => return Err(ExactError::Domain("floor_ratio requires v > 0")),
            _ => {}
        }
        if self.sign()? < 0 {
            return Err(ExactError::Domain("floor_ratio requires u >= 0"));
        }
        self.div(v)?.floor()
    }

    pub fn abs(&self) -> Result<ExactScalar, ExactError> {
        if self.sign()? < 0 {
            Ok(self.neg())
        } else {
            Ok(self.clone())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactScalar::Rational(r) => rational_to_f64(r),
            ExactScalar::Quadratic(_) => {
                match self.enclosure(80) {
                    Ok((lo, hi)) => (lo.to_f64() + hi.to_f64()) / 2.0,
                    Err(_) => f64::NAN,
                }
            }
            ExactScalar::Interval(iv) => (iv.lo.to_f64() + iv.hi.to_f64()) / 2.0,
        }
    }
}

struct ClosureRefine(Box<dyn Fn(u32) -> Result<(Dyadic, Dyadic), ExactError> + Send + Sync>);

impl RefineFn for ClosureRefine {
    fn enclose(&self, bits: u32) -> Result<(Dyadic, Dyadic), ExactError> {
        (self.0)(bits)
    }
}

fn sign_to_ordering(s: i8) -> Ordering {
    match s {
        s if s < 0 => Ordering::Less,
        0 => Ordering::Equal,
        _ => Ordering::Greater,
    }
}

fn rational_sign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn quadratic_sign(q: &Quadratic) -> i8 {
    let sx = rational_sign(&q.x);
    let sy = rational_sign(&q.y);
    debug_assert!(sy != 0, "quadratic kind keeps y != 0");
    if sx == 0 {
        return sy;
    }
    if sx == sy {
        return sx;
    }
    // Opposite signs: compare x^2 against y^2 d. Equality cannot happen for
    // square-free d >= 2.
    let d = Rational::from(BigInt::from(q.d));
    let lhs = &q.x * &q.x;
    let rhs = &q.y * &q.y * d;
    match lhs.cmp(&rhs) {
        Ordering::Greater => sx,
        Ordering::Less => sy,
        Ordering::Equal => unreachable!("x^2 = y^2 d contradicts square-free d"),
    }
}

impl PartialEq for ExactScalar {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.compare(other), Ok(Ordering::Equal))
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactScalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            ExactScalar::Quadratic(q) => {
                let y = ExactScalar::Rational(q.y.clone());
                if q.x.is_zero() {
                    write!(f, "{}*sqrt({})", y, q.d)
                } else {
                    let x = ExactScalar::Rational(q.x.clone());
                    if q.y.is_positive() {
                        write!(f, "{}+{}*sqrt({})", x, y, q.d)
                    } else {
                        write!(f, "{}{}*sqrt({})", x, y, q.d)
                    }
                }
            }
            ExactScalar::Interval(iv) => write!(f, "[{}, {}]", iv.lo, iv.hi),
        }
    }
}

fn rational_str(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        match self {
            ExactScalar::Rational(r) => {
                map.serialize_entry("kind", "rational")?;
                map.serialize_entry("x", &rational_str(r))?;
            }
            ExactScalar::Quadratic(q) => {
                map.serialize_entry("kind", "quadratic")?;
                map.serialize_entry("x", &rational_str(&q.x))?;
                map.serialize_entry("y", &rational_str(&q.y))?;
                map.serialize_entry("D", &q.d)?;
            }
            ExactScalar::Interval(iv) => {
                map.serialize_entry("kind", "interval")?;
                map.serialize_entry("lo", &rational_str(&iv.lo.to_rational()))?;
                map.serialize_entry("hi", &rational_str(&iv.hi.to_rational()))?;
            }
        }
        map.end()
    }
}

#[derive(Deserialize)]
struct ScalarRepr {
    kind: String,
    #[serde(default)]
    x: Option<String>,
    #[serde(default)]
    y: Option<String>,
    #[serde(default, rename = "D")]
    d: Option<u64>,
    #[serde(default)]
    lo: Option<String>,
    #[serde(default)]
    hi: Option<String>,
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(deserializer)?;
        let rat = |s: &Option<String>, name: &str| -> Result<Rational, D::Error> {
            let s = s.as_ref().ok_or_else(|| D::Error::custom(format!("missing field {name}")))?;
            parse::parse_rational(s).map_err(D::Error::custom)
        };
        match repr.kind.as_str() {
            "rational" => Ok(ExactScalar::Rational(rat(&repr.x, "x")?)),
            "quadratic" => {
                let d = repr.d.ok_or_else(|| D::Error::custom("missing field D"))?;
                Ok(ExactScalar::quadratic(rat(&repr.x, "x")?, rat(&repr.y, "y")?, d))
            }
            "interval" => {
                let lo = rat(&repr.lo, "lo")?;
                let hi = rat(&repr.hi, "hi")?;
                let bits = 64;
                ExactScalar::interval_frozen(
                    Dyadic::from_rational_floor(&lo, bits),
                    Dyadic::from_rational_ceil(&hi, bits),
                )
                .map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown scalar kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use std::cmp::Ordering::*;

    fn rat(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    fn quad(xn: i64, xd: i64, yn: i64, yd: i64, d: u64) -> ExactScalar {
        ExactScalar::quadratic(
            Rational::new(BigInt::from(xn), BigInt::from(xd)),
            Rational::new(BigInt::from(yn), BigInt::from(yd)),
            d,
        )
    }

    #[test]
    fn scalars_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ExactScalar>();
    }

    #[test]
    fn normalization_collapses_to_rational() {
        // 1/2 + 0*sqrt(5) is the rational 1/2
        let v = quad(1, 2, 0, 1, 5);
        assert!(v.is_rational());
        assert_eq!(v.compare(&rat(1, 2)).unwrap(), Equal);
        // sqrt(8) = 2 sqrt(2)
        let w = quad(0, 1, 1, 1, 8);
        assert_eq!(w.field_d(), Some(2));
        // sqrt(9) = 3
        let u = quad(0, 1, 1, 1, 9);
        assert_eq!(u.compare(&rat(3, 1)).unwrap(), Equal);
    }

    #[test]
    fn spec_compare_examples() {
        // (3 + sqrt(5))/2 > 5/2 because sqrt(5) > 2
        assert_eq!(quad(3, 2, 1, 2, 5).compare(&rat(5, 2)).unwrap(), Greater);
        // sqrt(2) - 1 < 1/2 because sqrt(2) < 3/2
        assert_eq!(quad(-1, 1, 1, 1, 2).compare(&rat(1, 2)).unwrap(), Less);
    }

    #[test]
    fn spec_floor_ratio_examples() {
        // floor(1 / (sqrt(2)-1)) = floor(1 + sqrt(2)) = 2
        let one = rat(1, 1);
        let t = quad(-1, 1, 1, 1, 2);
        assert_eq!(one.floor_ratio(&t).unwrap(), BigInt::from(2));
        assert_eq!(rat(0, 1).floor_ratio(&rat(7, 3)).unwrap(), BigInt::zero());
        assert_eq!(rat(6, 1).floor_ratio(&rat(9, 1)).unwrap(), BigInt::zero());
        assert!(matches!(
            rat(1, 1).floor_ratio(&rat(0, 1)),
            Err(ExactError::DivisionByZero)
        ));
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = quad(0, 1, 1, 1, 2);
        let b = quad(0, 1, 1, 1, 5);
        assert!(matches!(a.add(&b), Err(ExactError::MixedField { .. })));
        assert!(matches!(a.compare(&b), Err(ExactError::MixedField { .. })));
        // ... but works after explicit promotion
        let ai = a.to_interval().unwrap();
        let bi = b.to_interval().unwrap();
        assert_eq!(ai.compare(&bi).unwrap(), Less); // sqrt(2) < sqrt(5)
    }

    #[test]
    fn quadratic_field_arithmetic() {
        // (sqrt(2)-1)^2 = 3 - 2 sqrt(2)
        let t = quad(-1, 1, 1, 1, 2);
        let sq = t.mul(&t).unwrap();
        assert_eq!(sq.compare(&quad(3, 1, -2, 1, 2)).unwrap(), Equal);
        // 1/(sqrt(2)-1) = 1 + sqrt(2)
        assert_eq!(t.recip().unwrap().compare(&quad(1, 1, 1, 1, 2)).unwrap(), Equal);
    }

    #[test]
    fn interval_refinement_reaches_target() {
        // Enclose 1 + sqrt(2) through a deliberately coarse dynamic source.
        struct Slow;
        impl RefineFn for Slow {
            fn enclose(&self, bits: u32) -> Result<(Dyadic, Dyadic), ExactError> {
                let v = ExactScalar::quadratic(
                    Rational::one(),
                    Rational::one(),
                    2,
                );
                v.enclosure(bits / 2 + 1)
            }
        }
        let iv = ExactScalar::interval_from_fn(Arc::new(Slow)).unwrap();
        let target = Rational::new(BigInt::one(), BigInt::from(1u64 << 20));
        let refined = iv.refine(&target).unwrap();
        match refined {
            ExactScalar::Interval(iv) => {
                assert!(iv.width() <= target);
                let exact = quad(1, 1, 1, 1, 2);
                assert!(iv.lo.to_rational() <= Rational::new(BigInt::from(241422), BigInt::from(100000)));
                let (lo, hi) = exact.enclosure(40).unwrap();
                assert!(iv.lo <= hi && lo <= iv.hi);
            }
            _ => panic!("expected interval"),
        }
    }

    #[test]
    fn refine_trivial_cases() {
        let exact = rat(3, 1);
        let iv = exact.to_interval().unwrap();
        // already-met target is a no-op
        let wide = Rational::from(BigInt::from(2));
        let out = iv.refine(&wide).unwrap();
        if let ExactScalar::Interval(o) = &out {
            assert!(o.width() <= wide);
        } else {
            panic!("expected interval");
        }
        // frozen intervals cannot tighten below their width
        let frozen = ExactScalar::interval_frozen(Dyadic::from_i64(0), Dyadic::from_i64(1)).unwrap();
        let narrow = Rational::new(BigInt::one(), BigInt::from(2));
        assert!(matches!(frozen.refine(&narrow), Err(ExactError::BudgetExceeded { .. })));
    }

    #[test]
    fn undecided_comparison_carries_enclosure() {
        let a = ExactScalar::interval_frozen(Dyadic::from_i64(0), Dyadic::from_i64(1)).unwrap();
        let b = ExactScalar::interval_frozen(Dyadic::from_i64(0), Dyadic::from_i64(1)).unwrap();
        assert!(matches!(a.compare(&b), Err(ExactError::Undecided { .. })));
    }

    #[test]
    fn interval_contains_exact_value() {
        // Enclosures produced from quadratic-backed intervals always contain
        // the exact value.
        let v = quad(7, 3, -2, 5, 7);
        let iv = v.to_interval().unwrap();
        let refined = iv
            .refine(&Rational::new(BigInt::one(), BigInt::from(1u64 << 40)))
            .unwrap();
        if let ExactScalar::Interval(e) = refined {
            let (lo, hi) = v.enclosure(80).unwrap();
            assert!(e.lo <= hi && lo <= e.hi);
        } else {
            panic!();
        }
    }

    #[test]
    fn serde_round_trip() {
        for v in [rat(-7, 4), quad(3, 2, -1, 2, 5)] {
            let js = serde_json::to_string(&v).unwrap();
            let back: ExactScalar = serde_json::from_str(&js).unwrap();
            assert_eq!(back.compare(&v).unwrap(), Equal);
        }
        let js = serde_json::to_string(&quad(0, 1, 1, 1, 2).to_interval().unwrap()).unwrap();
        let back: ExactScalar = serde_json::from_str(&js).unwrap();
        assert!(matches!(back, ExactScalar::Interval(_)));
    }

    #[test]
    fn field_laws_on_random_triples() {
        // Deterministic xorshift; 10^4 triples of rationals and quadratics.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut small = |bound: i64| -> i64 { (next() % (2 * bound as u64 + 1)) as i64 - bound };
        for i in 0..10_000 {
            let (a, b, c) = if i % 2 == 0 {
                (
                    rat(small(50), 1 + small(20).abs()),
                    rat(small(50), 1 + small(20).abs()),
                    rat(small(50), 1 + small(20).abs()),
                )
            } else {
                (
                    quad(small(20), 1 + small(6).abs(), small(20), 1 + small(6).abs(), 3),
                    quad(small(20), 1 + small(6).abs(), small(20), 1 + small(6).abs(), 3),
                    quad(small(20), 1 + small(6).abs(), small(20), 1 + small(6).abs(), 3),
                )
            };
            let ab_c = a.add(&b).unwrap().add(&c).unwrap();
            let a_bc = a.add(&b.add(&c).unwrap()).unwrap();
            assert_eq!(ab_c.compare(&a_bc).unwrap(), Equal);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            assert_eq!(lhs.compare(&rhs).unwrap(), Equal);
            let diff = a.add(&a.neg()).unwrap();
            assert_eq!(diff.sign().unwrap(), 0);
            if a.sign().unwrap() != 0 {
                let prod = a.mul(&a.recip().unwrap()).unwrap();
                assert_eq!(prod.compare(&ExactScalar::one()).unwrap(), Equal);
            }
        }
    }

    #[test]
    fn floor_ratio_matches_integer_division() {
        let mut state = 0xDEADBEEFCAFEF00Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..2000 {
            let un = next() % 100_000 + 1;
            let ud = next() % 1000 + 1;
            let vn = next() % 100_000 + 1;
            let vd = next() % 1000 + 1;
            let u = rat(un as i64, ud as i64);
            let v = rat(vn as i64, vd as i64);
            let got = u.floor_ratio(&v).unwrap();
            // clear denominators: floor((un*vd)/(ud*vn))
            let expect = BigInt::from(un) * BigInt::from(vd);
            let denom = BigInt::from(ud) * BigInt::from(vn);
            assert_eq!(got, expect.div_floor(&denom));
        }
    }

    #[test]
    fn compare_is_total_order() {
        let mut state = 0x1234567890ABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut gen = |i: u64| -> ExactScalar {
            if i % 3 == 0 {
                rat((next() % 200) as i64 - 100, (next() % 30 + 1) as i64)
            } else {
                quad(
                    (next() % 200) as i64 - 100,
                    (next() % 30 + 1) as i64,
                    (next() % 200) as i64 - 100,
                    (next() % 30 + 1) as i64,
                    7,
                )
            }
        };
        for i in 0..3000 {
            let a = gen(i);
            let b = gen(i + 1);
            let c = gen(i + 2);
            let ab = a.compare(&b).unwrap();
            let ba = b.compare(&a).unwrap();
            assert_eq!(ab, ba.reverse());
            if ab != Greater && b.compare(&c).unwrap() != Greater {
                assert_ne!(a.compare(&c).unwrap(), Greater);
            }
        }
    }
}
