//! Parameters of L-shaped Veech surfaces and their renormalizable slopes.
//!
//! A multi-twist tuple `(m_h, n_h, m_v, n_v)` of coprime pairs pins down the
//! table parameters through
//!
//! ```text
//! m_h b = n_h (1-a)(1-b)        m_v a = n_v (1-a)(1-b)
//! ```
//!
//! with closed forms for `1/(1-a)`, `1/(1-b)` in terms of `mu_h = n_h/m_h`,
//! `mu_v = n_v/m_v`. The widths `s_h = m_h/(1-b)` and `s_v = m_v/(1-a)` of
//! the horizontal and vertical parabolics drive a modified continued-fraction
//! algorithm: slopes with expansion
//!
//! ```text
//! cot(theta) = a0 s_h + 1/(a1 s_v + 1/(a2 s_h + ...))
//! ```
//!
//! are exactly the renormalizable ones, with predicted convergents
//! `(a_k m_h, a_k n_h)` at even `k` and `(a_k m_v, a_k n_v)` at odd `k`.

use crate::exact::{ExactError, ExactScalar, Rational, RefineFn};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum VeechError {
    BadMultiTwist(String),
    BadExpansion(String),
    /// Exact output requested for an expansion without a periodic tail.
    NotPeriodicExact,
    /// The fixed-point quadratic does not solve within a degree-2 field.
    NotExactlyRepresentable,
    /// psi applied in the gap `[1/s_v, s_h]`.
    OutOfDomain,
    /// A floor consumed its argument exactly (rational-slope termination).
    Degenerate,
    Internal(String),
    Exact(ExactError),
}

impl fmt::Display for VeechError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VeechError::BadMultiTwist(m) => write!(f, "bad multi-twist tuple: {m}"),
            VeechError::BadExpansion(m) => write!(f, "bad slope expansion: {m}"),
            VeechError::NotPeriodicExact => write!(f, "NOT_PERIODIC_EXACT"),
            VeechError::NotExactlyRepresentable => {
                write!(f, "fixed point is not a quadratic irrational over one field")
            }
            VeechError::OutOfDomain => write!(f, "OUT_OF_DOMAIN"),
            VeechError::Degenerate => write!(f, "DEGENERATE"),
            VeechError::Internal(m) => write!(f, "internal verification failed: {m}"),
            VeechError::Exact(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for VeechError {}

impl From<ExactError> for VeechError {
    fn from(e: ExactError) -> Self {
        VeechError::Exact(e)
    }
}

/// Coprime twist multiplicities for the horizontal and vertical cylinders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiTwist {
    pub mh: u64,
    pub nh: u64,
    pub mv: u64,
    pub nv: u64,
}

impl MultiTwist {
    pub fn new(mh: u64, nh: u64, mv: u64, nv: u64) -> Result<Self, VeechError> {
        for (name, v) in [("m_h", mh), ("n_h", nh), ("m_v", mv), ("n_v", nv)] {
            if v == 0 {
                return Err(VeechError::BadMultiTwist(format!("{name} must be positive")));
            }
        }
        if mh.gcd(&nh) != 1 || mv.gcd(&nv) != 1 {
            return Err(VeechError::BadMultiTwist("pairs must be coprime".into()));
        }
        Ok(MultiTwist { mh, nh, mv, nv })
    }
}

/// Table parameters of a Veech L-surface together with the parabolic widths.
#[derive(Clone, Debug)]
pub struct VeechSurfaceParams {
    pub a: ExactScalar,
    pub b: ExactScalar,
    pub mt: MultiTwist,
    pub s_h: ExactScalar,
    pub s_v: ExactScalar,
    /// Square-free radicand of the field containing a and b (1 when rational).
    pub d: u64,
}

fn rat_u64(n: u64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Closed-form table parameters from a multi-twist tuple; the defining
/// identities are re-verified exactly before returning.
pub fn params_from_multitwist(mt: &MultiTwist) -> Result<VeechSurfaceParams, VeechError> {
    let mu_h = Rational::new(BigInt::from(mt.nh), BigInt::from(mt.mh));
    let mu_v = Rational::new(BigInt::from(mt.nv), BigInt::from(mt.mv));
    let delta = &mu_h - &mu_v;
    let radicand =
        Rational::one() + &delta * &delta + Rational::from(BigInt::from(2)) * (&mu_h + &mu_v);
    let root = ExactScalar::sqrt_rational(&radicand)?;
    let d = root.field_d().unwrap_or(1);
    let two = ExactScalar::from_int(2);
    let one = ExactScalar::one();
    // 1/(1-a) = (1 + (mu_v - mu_h) + sqrt(radicand)) / 2 and symmetrically
    // for b: solving the defining identities gives a = mu_v (1-a)(1-b) and
    // b = mu_h (1-a)(1-b), so the larger of the two displayed roots belongs
    // to the coordinate with the larger twist ratio. (A display with the
    // opposite pairing fails the identities on any asymmetric tuple; the
    // verification below would refuse it.)
    let base_a = ExactScalar::from_rational(Rational::one() - &delta).add(&root)?.div(&two)?;
    let base_b = ExactScalar::from_rational(Rational::one() + delta).add(&root)?.div(&two)?;
    let one_minus_a = base_a.recip()?;
    let one_minus_b = base_b.recip()?;
    let a = one.sub(&one_minus_a)?;
    let b = one.sub(&one_minus_b)?;

    let s_h = ExactScalar::from_rational(rat_u64(mt.mh)).div(&one_minus_b)?;
    let s_v = ExactScalar::from_rational(rat_u64(mt.mv)).div(&one_minus_a)?;

    let params = VeechSurfaceParams { a, b, mt: *mt, s_h, s_v, d };
    verify_params(&params)?;
    Ok(params)
}

fn verify_params(p: &VeechSurfaceParams) -> Result<(), VeechError> {
    let one = ExactScalar::one();
    let zero = ExactScalar::zero();
    for (name, v) in [("a", &p.a), ("b", &p.b)] {
        if v.compare(&zero)? != Ordering::Greater || v.compare(&one)? != Ordering::Less {
            return Err(VeechError::Internal(format!("{name} outside (0,1)")));
        }
    }
    let oma = one.sub(&p.a)?;
    let omb = one.sub(&p.b)?;
    let prod = oma.mul(&omb)?;
    let lhs_h = ExactScalar::from_rational(rat_u64(p.mt.mh)).mul(&p.b)?;
    let rhs_h = ExactScalar::from_rational(rat_u64(p.mt.nh)).mul(&prod)?;
    if lhs_h.compare(&rhs_h)? != Ordering::Equal {
        return Err(VeechError::Internal("m_h b = n_h (1-a)(1-b) fails".into()));
    }
    let lhs_v = ExactScalar::from_rational(rat_u64(p.mt.mv)).mul(&p.a)?;
    let rhs_v = ExactScalar::from_rational(rat_u64(p.mt.nv)).mul(&prod)?;
    if lhs_v.compare(&rhs_v)? != Ordering::Equal {
        return Err(VeechError::Internal("m_v a = n_v (1-a)(1-b) fails".into()));
    }
    // Both expressions for each width agree, and s_h s_v >= 1.
    let alt_h = ExactScalar::from_rational(rat_u64(p.mt.nh)).mul(&oma)?.div(&p.b)?;
    let alt_v = ExactScalar::from_rational(rat_u64(p.mt.nv)).mul(&omb)?.div(&p.a)?;
    if p.s_h.compare(&alt_h)? != Ordering::Equal || p.s_v.compare(&alt_v)? != Ordering::Equal {
        return Err(VeechError::Internal("width identities fail".into()));
    }
    if p.s_h.mul(&p.s_v)?.compare(&one)? == Ordering::Less {
        return Err(VeechError::Internal("s_h s_v < 1".into()));
    }
    Ok(())
}

/// Recover the multi-twist tuple from `(a, b)` when both twist ratios are
/// rational; `None` exactly when the surface is not Veech.
pub fn multitwist_from_ab(
    a: &ExactScalar,
    b: &ExactScalar,
) -> Result<Option<MultiTwist>, VeechError> {
    let one = ExactScalar::one();
    let zero = ExactScalar::zero();
    for v in [a, b] {
        if v.compare(&zero)? != Ordering::Greater || v.compare(&one)? != Ordering::Less {
            return Err(VeechError::BadMultiTwist("a, b must lie in (0,1)".into()));
        }
    }
    let prod = one.sub(a)?.mul(&one.sub(b)?)?;
    let ratio_h = b.div(&prod)?;
    let ratio_v = a.div(&prod)?;
    let (rh, rv) = match (ratio_h.as_rational(), ratio_v.as_rational()) {
        (Some(rh), Some(rv)) => (rh.clone(), rv.clone()),
        _ => return Ok(None),
    };
    let to_pair = |r: &Rational| -> Result<(u64, u64), VeechError> {
        let n = r
            .numer()
            .to_u64()
            .ok_or_else(|| VeechError::BadMultiTwist("twist ratio numerator out of range".into()))?;
        let m = r
            .denom()
            .to_u64()
            .ok_or_else(|| VeechError::BadMultiTwist("twist ratio denominator out of range".into()))?;
        Ok((m, n))
    };
    let (mh, nh) = to_pair(&rh)?;
    let (mv, nv) = to_pair(&rv)?;
    Ok(Some(MultiTwist::new(mh, nh, mv, nv)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeCoeffs {
    Finite(Vec<u64>),
    EventuallyPeriodic { pre: Vec<u64>, period: Vec<u64> },
}

/// Digit sequence `a_k` of the psi-expansion, together with the widths.
#[derive(Clone, Debug)]
pub struct SlopeExpansion {
    pub coeffs: SlopeCoeffs,
    pub s_h: ExactScalar,
    pub s_v: ExactScalar,
}

impl SlopeExpansion {
    pub fn new(coeffs: SlopeCoeffs, s_h: ExactScalar, s_v: ExactScalar) -> Result<Self, VeechError> {
        if s_h.sign()? <= 0 || s_v.sign()? <= 0 {
            return Err(VeechError::BadExpansion("widths must be positive".into()));
        }
        let check = |k: usize, v: u64| -> Result<(), VeechError> {
            if k >= 1 && v == 0 {
                Err(VeechError::BadExpansion(format!("a_{k} must be >= 1")))
            } else {
                Ok(())
            }
        };
        match &coeffs {
            SlopeCoeffs::Finite(v) => {
                if v.is_empty() {
                    return Err(VeechError::BadExpansion("empty coefficient list".into()));
                }
                for (k, &a) in v.iter().enumerate() {
                    check(k, a)?;
                }
            }
            SlopeCoeffs::EventuallyPeriodic { pre, period } => {
                if period.is_empty() {
                    return Err(VeechError::BadExpansion("empty period".into()));
                }
                for (k, &a) in pre.iter().enumerate() {
                    check(k, a)?;
                }
                if period.contains(&0) {
                    return Err(VeechError::BadExpansion("period entries must be >= 1".into()));
                }
            }
        }
        Ok(SlopeExpansion { coeffs, s_h, s_v })
    }

    /// The k-th digit, unbounded for eventually periodic expansions.
    pub fn coeff(&self, k: usize) -> Option<u64> {
        match &self.coeffs {
            SlopeCoeffs::Finite(v) => v.get(k).copied(),
            SlopeCoeffs::EventuallyPeriodic { pre, period } => {
                if k < pre.len() {
                    Some(pre[k])
                } else {
                    Some(period[(k - pre.len()) % period.len()])
                }
            }
        }
    }

    /// Width multiplying `a_k`: `s_h` at even positions, `s_v` at odd ones.
    pub fn width_at(&self, k: usize) -> &ExactScalar {
        if k.is_multiple_of(2) {
            &self.s_h
        } else {
            &self.s_v
        }
    }

    fn partial_quotient(&self, k: usize) -> Option<Result<ExactScalar, VeechError>> {
        let a = self.coeff(k)?;
        Some(
            self.width_at(k)
                .mul(&ExactScalar::from_rational(rat_u64(a)))
                .map_err(VeechError::from),
        )
    }
}

/// Square root of an exact scalar, staying within one quadratic field.
fn sqrt_scalar(v: &ExactScalar) -> Result<ExactScalar, VeechError> {
    match v {
        ExactScalar::Rational(r) => Ok(ExactScalar::sqrt_rational(r)?),
        ExactScalar::Quadratic(q) => {
            // (u + w sqrt(d))^2 = e + f sqrt(d) needs u^2 + w^2 d = e and
            // 2uw = f; solvable in the field iff e^2 - f^2 d is a rational
            // square whose half-sums with e are rational squares.
            let d = Rational::from(BigInt::from(q.d));
            let disc = &q.x * &q.x - &q.y * &q.y * &d;
            if disc.is_negative() {
                return Err(VeechError::NotExactlyRepresentable);
            }
            let g = match ExactScalar::sqrt_rational(&disc)? {
                ExactScalar::Rational(g) => g,
                _ => return Err(VeechError::NotExactlyRepresentable),
            };
            let half = Rational::new(BigInt::one(), BigInt::from(2));
            for cand in [(&q.x + &g) * &half, (&q.x - &g) * &half] {
                if cand.is_negative() {
                    continue;
                }
                if let ExactScalar::Rational(u) = ExactScalar::sqrt_rational(&cand)? {
                    if u.is_zero() {
                        continue;
                    }
                    let w = &q.y / (Rational::from(BigInt::from(2)) * &u);
                    let root = ExactScalar::quadratic(u, w, q.d);
                    return if root.sign()? > 0 { Ok(root) } else { Ok(root.neg()) };
                }
            }
            Err(VeechError::NotExactlyRepresentable)
        }
        ExactScalar::Interval(_) => Err(VeechError::NotExactlyRepresentable),
    }
}

/// 2x2 matrices over exact scalars, the Moebius algebra of convergents.
#[derive(Clone)]
struct Mat2 {
    a: ExactScalar,
    b: ExactScalar,
    c: ExactScalar,
    d: ExactScalar,
}

impl Mat2 {
    fn identity() -> Self {
        Mat2 {
            a: ExactScalar::one(),
            b: ExactScalar::zero(),
            c: ExactScalar::zero(),
            d: ExactScalar::one(),
        }
    }

    fn step(c: &ExactScalar) -> Mat2 {
        Mat2 {
            a: c.clone(),
            b: ExactScalar::one(),
            c: ExactScalar::one(),
            d: ExactScalar::zero(),
        }
    }

    fn mul(&self, o: &Mat2) -> Result<Mat2, VeechError> {
        Ok(Mat2 {
            a: self.a.mul(&o.a)?.add(&self.b.mul(&o.c)?)?,
            b: self.a.mul(&o.b)?.add(&self.b.mul(&o.d)?)?,
            c: self.c.mul(&o.a)?.add(&self.d.mul(&o.c)?)?,
            d: self.c.mul(&o.b)?.add(&self.d.mul(&o.d)?)?,
        })
    }

    fn apply(&self, x: &ExactScalar) -> Result<ExactScalar, VeechError> {
        let num = self.a.mul(x)?.add(&self.b)?;
        let den = self.c.mul(x)?.add(&self.d)?;
        Ok(num.div(&den)?)
    }
}

/// Exact `cot(theta)` for a finite or eventually periodic expansion, solving
/// the fixed-point quadratic of the periodic tail.
pub fn expansion_to_cot_exact(se: &SlopeExpansion) -> Result<ExactScalar, VeechError> {
    match &se.coeffs {
        SlopeCoeffs::Finite(v) => {
            let mut x: Option<ExactScalar> = None;
            for k in (0..v.len()).rev() {
                let c = se.partial_quotient(k).expect("index in range")?;
                x = Some(match x {
                    None => c,
                    Some(prev) => {
                        if prev.sign()? == 0 {
                            return Err(VeechError::Degenerate);
                        }
                        c.add(&prev.recip()?)?
                    }
                });
            }
            let x = x.expect("nonempty");
            if x.sign()? <= 0 {
                return Err(VeechError::Degenerate);
            }
            Ok(x)
        }
        SlopeCoeffs::EventuallyPeriodic { pre, period } => {
            // The tail must repeat with consistent width parity: when the two
            // widths differ, double an odd period.
            let widths_equal = se.s_h.compare(&se.s_v)? == Ordering::Equal;
            let mut tail = period.clone();
            if !widths_equal && tail.len() % 2 == 1 {
                tail.extend(period.iter().copied());
            }
            let start = pre.len();
            let mut t = Mat2::identity();
            for (j, &a) in tail.iter().enumerate() {
                let k = start + j;
                let c = se.width_at(k).mul(&ExactScalar::from_rational(rat_u64(a)))?;
                t = t.mul(&Mat2::step(&c))?;
            }
            // Fixed point of y = (a y + b)/(c y + d): c y^2 + (d - a) y - b = 0.
            let tr_diff = t.a.sub(&t.d)?;
            let disc = tr_diff
                .mul(&tr_diff)?
                .add(&ExactScalar::from_int(4).mul(&t.b.mul(&t.c)?)?)?;
            let root = sqrt_scalar(&disc)?;
            let y = tr_diff.add(&root)?.div(&ExactScalar::from_int(2).mul(&t.c)?)?;
            if y.sign()? <= 0 {
                return Err(VeechError::Internal("periodic fixed point not positive".into()));
            }
            let mut front = Mat2::identity();
            for (k, &a) in pre.iter().enumerate() {
                let c = se.width_at(k).mul(&ExactScalar::from_rational(rat_u64(a)))?;
                front = front.mul(&Mat2::step(&c))?;
            }
            let x = front.apply(&y)?;
            if x.sign()? < 0 {
                return Err(VeechError::Internal("negative slope cotangent".into()));
            }
            Ok(x)
        }
    }
}

struct CfEnclosure {
    se: SlopeExpansion,
}

impl RefineFn for CfEnclosure {
    fn enclose(
        &self,
        bits: u32,
    ) -> Result<(crate::exact::Dyadic, crate::exact::Dyadic), ExactError> {
        let fail = |m: String| ExactError::Parse(m);
        // h_k / l_k via the recurrence p_{k+1} = c_k p_k + p_{k-1};
        // consecutive convergents bracket the value with gap 1/(l_k l_{k-1}).
        let mut h_prev = ExactScalar::one(); // index k-2 numerator
        let mut l_prev = ExactScalar::zero();
        let mut h: Option<ExactScalar> = None;
        let mut l: Option<ExactScalar> = None;
        let mut k = 0usize;
        let mut exhausted = false;
        let threshold = Rational::new(
            BigInt::one(),
            BigInt::from(2).pow(bits.saturating_add(1).min(1 << 20)),
        );
        loop {
            let c = match self.se.partial_quotient(k) {
                None => {
                    exhausted = true;
                    break;
                }
                Some(c) => c.map_err(|e| fail(e.to_string()))?,
            };
            let (new_h, new_l) = match (&h, &l) {
                (None, None) => (c.clone(), ExactScalar::one()),
                (Some(hk), Some(lk)) => (c.mul(hk)?.add(&h_prev)?, c.mul(lk)?.add(&l_prev)?),
                _ => unreachable!(),
            };
            if let (Some(hk), Some(lk)) = (h.replace(new_h), l.replace(new_l)) {
                h_prev = hk;
                l_prev = lk;
            }
            k += 1;
            if k >= 2 {
                let gap_den = l.as_ref().expect("set").mul(&l_prev)?;
                if gap_den.sign()? > 0 {
                    let gap = gap_den.recip()?;
                    let (_, gap_hi) = gap.enclosure(bits.saturating_add(2))?;
                    if gap_hi.to_rational() <= threshold {
                        break;
                    }
                }
            }
            if k > 4096 {
                break;
            }
        }
        let (h, l) = (h.ok_or_else(|| fail("empty expansion".into()))?, l.expect("set"));
        let last = h.div(&l)?;
        if exhausted || l_prev.sign()? == 0 {
            // a finite expansion equals its final convergent exactly
            return last.enclosure(bits);
        }
        let prev = h_prev.div(&l_prev)?;
        let (a_lo, a_hi) = last.enclosure(bits.saturating_add(2))?;
        let (b_lo, b_hi) = prev.enclosure(bits.saturating_add(2))?;
        let lo = if a_lo < b_lo { a_lo } else { b_lo };
        let hi = if a_hi > b_hi { a_hi } else { b_hi };
        Ok((lo, hi))
    }
}

/// Enclosure-backed `cot(theta)`: an interval scalar whose handle reruns the
/// convergent recurrence at greater depth.
pub fn expansion_to_cot_numeric(se: &SlopeExpansion) -> Result<ExactScalar, VeechError> {
    Ok(ExactScalar::interval_from_fn(Arc::new(CfEnclosure { se: se.clone() }))?)
}

/// The slope `tan(theta) = 1/cot(theta)` of an expansion.
pub fn slope_from_expansion(se: &SlopeExpansion, exact: bool) -> Result<ExactScalar, VeechError> {
    let cot = if exact { expansion_to_cot_exact(se)? } else { expansion_to_cot_numeric(se)? };
    Ok(cot.recip()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiBranch {
    Left,
    Right,
}

/// One step of the modified continued-fraction map:
/// `psi_r(x) = x - floor(x/s_h) s_h` on `(s_h, oo)` and
/// `psi_l(x) = 1/(1/x - floor((1/x)/s_v) s_v)` on `(0, 1/s_v)`.
pub fn psi_step(
    x: &ExactScalar,
    s_h: &ExactScalar,
    s_v: &ExactScalar,
) -> Result<(ExactScalar, PsiBranch, u64), VeechError> {
    if x.sign()? <= 0 {
        return Err(VeechError::OutOfDomain);
    }
    if x.compare(s_h)? == Ordering::Greater {
        let m = x.floor_ratio(s_h)?;
        let m_u = m.to_u64().ok_or(VeechError::Internal("multiplicity overflow".into()))?;
        let rem = x.sub(&s_h.mul(&ExactScalar::from_rational(Rational::from(m)))?)?;
        if rem.sign()? == 0 {
            return Err(VeechError::Degenerate);
        }
        return Ok((rem, PsiBranch::Right, m_u));
    }
    let inv_sv = s_v.recip()?;
    if x.compare(&inv_sv)? == Ordering::Less {
        let inv = x.recip()?;
        let m = inv.floor_ratio(s_v)?;
        let m_u = m.to_u64().ok_or(VeechError::Internal("multiplicity overflow".into()))?;
        let rem = inv.sub(&s_v.mul(&ExactScalar::from_rational(Rational::from(m)))?)?;
        if rem.sign()? == 0 {
            return Err(VeechError::Degenerate);
        }
        return Ok((rem.recip()?, PsiBranch::Left, m_u));
    }
    Err(VeechError::OutOfDomain)
}

/// Predicted renormalization convergents of an expansion:
/// `(a_k m_h, a_k n_h)` for even `k`, `(a_k m_v, a_k n_v)` for odd `k`.
pub fn convergents_from_expansion(
    se: &SlopeExpansion,
    mt: &MultiTwist,
    depth: usize,
) -> Result<Vec<(u64, u64)>, VeechError> {
    let mut out = Vec::with_capacity(depth);
    for k in 0..depth {
        let a = se
            .coeff(k)
            .ok_or_else(|| VeechError::BadExpansion(format!("expansion has no digit a_{k}")))?;
        let pair = if k % 2 == 0 {
            (a.checked_mul(mt.mh), a.checked_mul(mt.nh))
        } else {
            (a.checked_mul(mt.mv), a.checked_mul(mt.nv))
        };
        match pair {
            (Some(m), Some(n)) => out.push((m, n)),
            _ => return Err(VeechError::Internal("convergent overflow".into())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_scalar;

    fn golden_expansion() -> SlopeExpansion {
        SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap()
    }

    #[test]
    fn square_tiled_multitwist() {
        let p = params_from_multitwist(&MultiTwist::new(1, 2, 1, 2).unwrap()).unwrap();
        assert_eq!(p.a, ExactScalar::from_ratio(1, 2));
        assert_eq!(p.b, ExactScalar::from_ratio(1, 2));
        assert_eq!(p.s_h, ExactScalar::from_int(2));
        assert_eq!(p.s_v, ExactScalar::from_int(2));
        assert_eq!(p.d, 1);
    }

    #[test]
    fn golden_multitwist() {
        let p = params_from_multitwist(&MultiTwist::new(1, 1, 1, 1).unwrap()).unwrap();
        let expected = parse_scalar("3/2-1/2*sqrt(5)").unwrap();
        assert_eq!(p.a, expected);
        assert_eq!(p.b, expected);
        let width = parse_scalar("1/2+1/2*sqrt(5)").unwrap();
        assert_eq!(p.s_h, width);
        assert_eq!(p.s_v, width);
        assert_eq!(p.d, 5);
    }

    #[test]
    fn sqrt3_multitwist() {
        let p = params_from_multitwist(&MultiTwist::new(2, 1, 2, 1).unwrap()).unwrap();
        assert_eq!(p.a, parse_scalar("2-sqrt(3)").unwrap());
        assert_eq!(p.b, parse_scalar("2-sqrt(3)").unwrap());
    }

    #[test]
    fn multitwist_recovery() {
        let half = ExactScalar::from_ratio(1, 2);
        assert_eq!(
            multitwist_from_ab(&half, &half).unwrap(),
            Some(MultiTwist::new(1, 2, 1, 2).unwrap())
        );
        let golden_ab = parse_scalar("3/2-1/2*sqrt(5)").unwrap();
        assert_eq!(
            multitwist_from_ab(&golden_ab, &golden_ab).unwrap(),
            Some(MultiTwist::new(1, 1, 1, 1).unwrap())
        );
        // the golden-ratio table is not Veech
        let phi = parse_scalar("-1/2+1/2*sqrt(5)").unwrap();
        assert_eq!(multitwist_from_ab(&phi, &phi).unwrap(), None);
    }

    #[test]
    fn golden_slope_is_exact() {
        let cot = expansion_to_cot_exact(&golden_expansion()).unwrap();
        assert_eq!(cot, parse_scalar("1+sqrt(2)").unwrap());
        let slope = slope_from_expansion(&golden_expansion(), true).unwrap();
        assert_eq!(slope, parse_scalar("sqrt(2)-1").unwrap());
    }

    #[test]
    fn zero_leading_digit_inverts() {
        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![0], period: vec![1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        let cot = expansion_to_cot_exact(&se).unwrap();
        assert_eq!(cot, parse_scalar("sqrt(2)-1").unwrap());
    }

    #[test]
    fn finite_truncation_numeric_enclosure() {
        let se = SlopeExpansion::new(
            SlopeCoeffs::Finite(vec![1, 1, 1]),
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        // 2 + 1/(2 + 1/2) = 12/5
        let exact = expansion_to_cot_exact(&se).unwrap();
        assert_eq!(exact, ExactScalar::from_ratio(12, 5));
        let numeric = expansion_to_cot_numeric(&se).unwrap();
        let refined = numeric
            .refine(&Rational::new(BigInt::one(), BigInt::from(1u64 << 30)))
            .unwrap();
        // the enclosure is within 2^-20 of the exact value on both sides
        let eps = ExactScalar::from_ratio(1, 1 << 20);
        assert_eq!(refined.compare(&exact.add(&eps).unwrap()).unwrap(), Ordering::Less);
        assert_eq!(refined.compare(&exact.sub(&eps).unwrap()).unwrap(), Ordering::Greater);
    }

    #[test]
    fn psi_branches() {
        let two = ExactScalar::from_int(2);
        let x = parse_scalar("1+sqrt(2)").unwrap();
        let (x1, br, m) = psi_step(&x, &two, &two).unwrap();
        assert_eq!((br, m), (PsiBranch::Right, 1));
        assert_eq!(x1, parse_scalar("sqrt(2)-1").unwrap());
        let (x2, br2, m2) = psi_step(&x1, &two, &two).unwrap();
        assert_eq!((br2, m2), (PsiBranch::Left, 1));
        assert_eq!(x2, parse_scalar("1+sqrt(2)").unwrap());
        assert!(matches!(
            psi_step(&ExactScalar::one(), &two, &two),
            Err(VeechError::OutOfDomain)
        ));
    }

    #[test]
    fn psi_reproduces_expansion_digits() {
        // pre-period exercises the right branch with multiplicity 2
        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![2, 1], period: vec![1, 1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        let mut x = expansion_to_cot_exact(&se).unwrap();
        for k in 0..32 {
            let (next, branch, mult) = psi_step(&x, &se.s_h, &se.s_v).unwrap();
            assert_eq!(mult, se.coeff(k).unwrap(), "digit {k}");
            let expected_branch = if k % 2 == 0 { PsiBranch::Right } else { PsiBranch::Left };
            assert_eq!(branch, expected_branch);
            x = next;
        }
    }

    #[test]
    fn predicted_convergents() {
        let mt = MultiTwist::new(1, 2, 1, 2).unwrap();
        let got = convergents_from_expansion(&golden_expansion(), &mt, 5).unwrap();
        assert_eq!(got, vec![(1, 2); 5]);

        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![2], period: vec![1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        let got = convergents_from_expansion(&se, &mt, 4).unwrap();
        assert_eq!(got, vec![(2, 4), (1, 2), (1, 2), (1, 2)]);

        let mt2 = MultiTwist::new(1, 1, 1, 1).unwrap();
        let se2 = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![2] },
            ExactScalar::from_int(1),
            ExactScalar::from_int(1),
        )
        .unwrap();
        assert_eq!(convergents_from_expansion(&se2, &mt2, 3).unwrap(), vec![(2, 2); 3]);
    }

    #[test]
    fn quadratic_width_fixed_point() {
        // Golden-table widths (1+sqrt(5))/2: the all-ones fixed point solves
        // x = s + 1/x, degree 4 over Q, so the exact solver must refuse.
        let w = parse_scalar("1/2+1/2*sqrt(5)").unwrap();
        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![1] },
            w.clone(),
            w,
        )
        .unwrap();
        assert!(matches!(
            expansion_to_cot_exact(&se),
            Err(VeechError::NotExactlyRepresentable)
        ));
        // ... while the numeric route encloses it fine: roughly 2.0995
        let numeric = expansion_to_cot_numeric(&se).unwrap();
        let refined = numeric
            .refine(&Rational::new(BigInt::one(), BigInt::from(1u64 << 40)))
            .unwrap();
        let lo = ExactScalar::from_ratio(2, 1);
        let hi = ExactScalar::from_ratio(22, 10);
        assert_eq!(refined.compare(&lo).unwrap(), Ordering::Greater);
        assert_eq!(refined.compare(&hi).unwrap(), Ordering::Less);
    }

    #[test]
    fn enclosure_width_shrinks_geometrically() {
        // denominators obey q_{k+1} = s a_k q_k + q_{k-1} with s >= 1, so the
        // bracketing gap 1/(q_k q_{k+1}) decays at least geometrically.
        let se = golden_expansion();
        let mut l_prev = ExactScalar::zero();
        let mut l: Option<ExactScalar> = None;
        let mut widths = Vec::new();
        for k in 0..20 {
            let c = se.partial_quotient(k).unwrap().unwrap();
            let new_l = match &l {
                None => ExactScalar::one(),
                Some(lk) => c.mul(lk).unwrap().add(&l_prev).unwrap(),
            };
            if let Some(lk) = l.replace(new_l) {
                l_prev = lk;
            }
            if k >= 1 {
                let gap = l
                    .as_ref()
                    .unwrap()
                    .mul(&l_prev)
                    .unwrap()
                    .recip()
                    .unwrap();
                widths.push(gap.to_f64());
            }
        }
        for pair in widths.windows(2) {
            assert!(pair[1] < pair[0] * 0.5, "gap did not halve: {pair:?}");
        }
        // by k = 20 the gap is far below 1e-12
        assert!(*widths.last().unwrap() < 1e-12);
    }

    #[test]
    fn coefficient_validation() {
        assert!(SlopeExpansion::new(
            SlopeCoeffs::Finite(vec![1, 0]),
            ExactScalar::from_int(2),
            ExactScalar::from_int(2)
        )
        .is_err());
        assert!(SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2)
        )
        .is_err());
        assert!(MultiTwist::new(2, 4, 1, 1).is_err());
        assert!(MultiTwist::new(0, 1, 1, 1).is_err());
    }
}
