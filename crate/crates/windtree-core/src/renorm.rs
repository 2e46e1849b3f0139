//! The renormalization map `F` on positive length quadruples
//! `Z = (x1, x2, y1, y2)` and its convergents.
//!
//! One step extracts `m = floor(x1 / (y1+y2))`, `n = floor(x2 / y1)` and maps
//!
//! ```text
//! F(Z) = (y1, y2, x1 - m (y1+y2), x2 - n y1).
//! ```
//!
//! The fourth component subtracts multiples of `y1`, matching the projective
//! induction maps the substitution machinery uses; with that form the
//! two-cycle condition `x1 + x2 > y1 > x2 and y1 + y2 > x1 > y2` characterizes
//! exactly the quadruples with `F^2(Z) = Z`. A variant with the other fourth
//! component is kept behind [`f_step_display_variant`] for comparison runs.

use crate::exact::{ExactError, ExactScalar};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug)]
pub enum RenormError {
    /// A residual coordinate vanished exactly: saddle connection, the
    /// renormalization stops.
    Degenerate { coordinate: &'static str },
    NotAdmissible,
    /// The nested pullback produced a quadruple that fails to reproduce its
    /// own prefix; cannot happen for admissible input.
    EmptyCell,
    NonPositive,
    ConvergentOverflow,
    Exact(ExactError),
}

impl fmt::Display for RenormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenormError::Degenerate { coordinate } => {
                write!(f, "DEGENERATE: coordinate {coordinate} vanished (saddle connection)")
            }
            RenormError::NotAdmissible => write!(f, "NOT_ADMISSIBLE"),
            RenormError::EmptyCell => write!(f, "EMPTY_CELL: internal consistency failure"),
            RenormError::NonPositive => write!(f, "quadruple coordinates must be positive"),
            RenormError::ConvergentOverflow => write!(f, "convergent does not fit in u64"),
            RenormError::Exact(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RenormError {}

impl From<ExactError> for RenormError {
    fn from(e: ExactError) -> Self {
        RenormError::Exact(e)
    }
}

/// Positive quadruple with projective (scale-free) semantics.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthQuadruple {
    pub x1: ExactScalar,
    pub x2: ExactScalar,
    pub y1: ExactScalar,
    pub y2: ExactScalar,
}

impl LengthQuadruple {
    pub fn new(
        x1: ExactScalar,
        x2: ExactScalar,
        y1: ExactScalar,
        y2: ExactScalar,
    ) -> Result<Self, RenormError> {
        for v in [&x1, &x2, &y1, &y2] {
            if v.sign()? <= 0 {
                return Err(RenormError::NonPositive);
            }
        }
        Ok(LengthQuadruple { x1, x2, y1, y2 })
    }

    /// The quadruple of a direction in the table `T(a,b)`, normalized by the
    /// cosine: `((1-b), b, (1-a) t, a t)` with `t` the slope.
    pub fn from_parameters(
        a: &ExactScalar,
        b: &ExactScalar,
        slope: &ExactScalar,
    ) -> Result<Self, RenormError> {
        let one = ExactScalar::one();
        LengthQuadruple::new(
            one.sub(b)?,
            b.clone(),
            one.sub(a)?.mul(slope)?,
            a.mul(slope)?,
        )
    }

    pub fn components(&self) -> [&ExactScalar; 4] {
        [&self.x1, &self.x2, &self.y1, &self.y2]
    }

    /// Equality of projective classes, by cross-multiplication against x1.
    pub fn projectively_equal(&self, other: &LengthQuadruple) -> Result<bool, RenormError> {
        for (u, v) in [
            (&self.x2, &other.x2),
            (&self.y1, &other.y1),
            (&self.y2, &other.y2),
        ] {
            let lhs = self.x1.mul(v)?;
            let rhs = u.mul(&other.x1)?;
            if lhs.compare(&rhs)? != Ordering::Equal {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for LengthQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.x2, self.y1, self.y2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceStatus {
    Truncated,
    TwoCycle,
    Degenerate,
}

/// The integer pairs `(m_k, n_k)` extracted along the F-orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentSequence {
    pub entries: Vec<(u64, u64)>,
    pub status: SequenceStatus,
}

fn floor_to_u64(v: num_bigint::BigInt) -> Result<u64, RenormError> {
    v.to_u64().ok_or(RenormError::ConvergentOverflow)
}

/// The pair `(m, n)` of floors at `Z`, without stepping.
pub fn floors(z: &LengthQuadruple) -> Result<(u64, u64), RenormError> {
    let denom = z.y1.add(&z.y2)?;
    let m = floor_to_u64(z.x1.floor_ratio(&denom)?)?;
    let n = floor_to_u64(z.x2.floor_ratio(&z.y1)?)?;
    Ok((m, n))
}

/// One renormalization step.
pub fn f_step(z: &LengthQuadruple) -> Result<(LengthQuadruple, u64, u64), RenormError> {
    let (m, n) = floors(z)?;
    let denom = z.y1.add(&z.y2)?;
    let res1 = z.x1.sub(&denom.mul(&ExactScalar::from_int(m as i64))?)?;
    let res2 = z.x2.sub(&z.y1.mul(&ExactScalar::from_int(n as i64))?)?;
    if res1.sign()? == 0 {
        return Err(RenormError::Degenerate { coordinate: "x1 - m (y1+y2)" });
    }
    if res2.sign()? == 0 {
        return Err(RenormError::Degenerate { coordinate: "x2 - n y1" });
    }
    let image = LengthQuadruple::new(z.y1.clone(), z.y2.clone(), res1, res2)?;
    Ok((image, m, n))
}

/// The map as displayed in the introduction of the source material, with the
/// fourth component reduced modulo `y2`. Inconsistent with the two-cycle
/// identity; kept only for comparison runs.
pub fn f_step_display_variant(
    z: &LengthQuadruple,
) -> Result<(LengthQuadruple, u64, u64), RenormError> {
    let denom = z.y1.add(&z.y2)?;
    let m = floor_to_u64(z.x1.floor_ratio(&denom)?)?;
    let n = floor_to_u64(z.x2.floor_ratio(&z.y2)?)?;
    let res1 = z.x1.sub(&denom.mul(&ExactScalar::from_int(m as i64))?)?;
    let res2 = z.x2.sub(&z.y2.mul(&ExactScalar::from_int(n as i64))?)?;
    if res1.sign()? == 0 {
        return Err(RenormError::Degenerate { coordinate: "x1 - m (y1+y2)" });
    }
    if res2.sign()? == 0 {
        return Err(RenormError::Degenerate { coordinate: "x2 - n y2" });
    }
    let image = LengthQuadruple::new(z.y1.clone(), z.y2.clone(), res1, res2)?;
    Ok((image, m, n))
}

/// The two-cycle condition `x1 + x2 > y1 > x2 and y1 + y2 > x1 > y2`,
/// all strict. Quadruples satisfying it are fixed by `F^2`.
pub fn is_two_cycle(z: &LengthQuadruple) -> Result<bool, RenormError> {
    let gt = |u: &ExactScalar, v: &ExactScalar| -> Result<bool, RenormError> {
        Ok(u.compare(v)? == Ordering::Greater)
    };
    Ok(gt(&z.x1.add(&z.x2)?, &z.y1)?
        && gt(&z.y1, &z.x2)?
        && gt(&z.y1.add(&z.y2)?, &z.x1)?
        && gt(&z.x1, &z.y2)?)
}

/// Iterate `f_step`, recording `(m_k, n_k)`; halts with status `TwoCycle` the
/// first time the two-cycle condition holds and `Degenerate` on an exact
/// saddle connection.
pub fn convergents(
    z: &LengthQuadruple,
    max_steps: usize,
) -> Result<ConvergentSequence, RenormError> {
    let mut entries = Vec::new();
    let mut current = z.clone();
    for _ in 0..max_steps {
        if is_two_cycle(&current)? {
            return Ok(ConvergentSequence { entries, status: SequenceStatus::TwoCycle });
        }
        match f_step(&current) {
            Ok((next, m, n)) => {
                entries.push((m, n));
                current = next;
            }
            Err(RenormError::Degenerate { .. }) => {
                return Ok(ConvergentSequence { entries, status: SequenceStatus::Degenerate });
            }
            Err(e) => return Err(e),
        }
    }
    if is_two_cycle(&current)? {
        return Ok(ConvergentSequence { entries, status: SequenceStatus::TwoCycle });
    }
    Ok(ConvergentSequence { entries, status: SequenceStatus::Truncated })
}

/// Finite-prefix admissibility:
///
/// * for every `k >= 1`, `(m_k, n_k) != (0, 0)`;
/// * whenever `m_k = 0` and a successor exists, `m_{k+1} != 0` and `n_{k+1} = 0`.
///
/// The "infinitely many nonzero" conditions are not decidable on prefixes and
/// are surfaced by [`admissibility_warnings`] instead.
pub fn check_admissible(seq: &[(u64, u64)]) -> bool {
    for (k, &(m, n)) in seq.iter().enumerate() {
        if k >= 1 && m == 0 && n == 0 {
            return false;
        }
        if m == 0 {
            if let Some(&(m_next, n_next)) = seq.get(k + 1) {
                if m_next == 0 || n_next != 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Finite-prefix warnings about the undecidable tail conditions.
pub fn admissibility_warnings(seq: &[(u64, u64)]) -> Vec<String> {
    let mut warnings = Vec::new();
    for (name, pick) in [("m", 0usize), ("n", 1usize)] {
        for parity in [0usize, 1usize] {
            let tail_zero = seq
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == parity)
                .rev()
                .take_while(|(_, &(m, n))| (if pick == 0 { m } else { n }) == 0)
                .count();
            if tail_zero >= 3 {
                warnings.push(format!(
                    "prefix ends with {tail_zero} zero values of {name}_k on parity {parity}; \
                     renormalizability requires infinitely many nonzero entries there"
                ));
            }
        }
    }
    warnings
}

/// Pull back through one inverse branch: the quadruple mapping to `z` under a
/// step that emits `(m, n)`.
fn pullback(z: &LengthQuadruple, m: u64, n: u64) -> Result<LengthQuadruple, RenormError> {
    let sum = z.x1.add(&z.x2)?;
    let x1 = z.y1.add(&sum.mul(&ExactScalar::from_int(m as i64))?)?;
    let x2 = z
        .y2
        .add(&z.x1.mul(&ExactScalar::from_int(n as i64))?)?;
    LengthQuadruple::new(x1, x2, z.x1.clone(), z.x2.clone())
}

/// Realize an admissible prefix: returns a rational quadruple whose
/// convergents reproduce `seq` exactly, built by pulling a seed back through
/// the inverse branches in reverse order.
pub fn realize_sequence(seq: &[(u64, u64)]) -> Result<LengthQuadruple, RenormError> {
    if seq.is_empty() || !check_admissible(seq) {
        return Err(RenormError::NotAdmissible);
    }
    // Seed strictly inside the emission cell of every branch:
    // y1 < x1 + x2, y2 < x1 and x2 < y1 (the last is needed when the final
    // prescribed step has m = 0).
    let mut z = LengthQuadruple::new(
        ExactScalar::from_int(2),
        ExactScalar::from_ratio(1, 2),
        ExactScalar::one(),
        ExactScalar::one(),
    )?;
    for &(m, n) in seq.iter().rev() {
        z = pullback(&z, m, n)?;
    }
    let check = convergents(&z, seq.len())?;
    if check.entries != seq || check.status != SequenceStatus::Truncated {
        return Err(RenormError::EmptyCell);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_scalar;

    fn quad(v: &[&str; 4]) -> LengthQuadruple {
        LengthQuadruple::new(
            parse_scalar(v[0]).unwrap(),
            parse_scalar(v[1]).unwrap(),
            parse_scalar(v[2]).unwrap(),
            parse_scalar(v[3]).unwrap(),
        )
        .unwrap()
    }

    fn golden() -> LengthQuadruple {
        quad(&["1", "1", "sqrt(2)-1", "sqrt(2)-1"])
    }

    #[test]
    fn golden_step_is_self_similar() {
        let z = golden();
        let (image, m, n) = f_step(&z).unwrap();
        assert_eq!((m, n), (1, 2));
        let expected = quad(&["sqrt(2)-1", "sqrt(2)-1", "3-2*sqrt(2)", "3-2*sqrt(2)"]);
        assert_eq!(image, expected);
        assert!(image.projectively_equal(&z).unwrap());
    }

    #[test]
    fn plain_rational_step() {
        let z = quad(&["6", "2", "5", "4"]);
        let (image, m, n) = f_step(&z).unwrap();
        assert_eq!((m, n), (0, 0));
        assert_eq!(image, quad(&["5", "4", "6", "2"]));
    }

    #[test]
    fn exact_division_degenerates() {
        let z = quad(&["2", "1", "1", "1"]);
        assert!(matches!(f_step(&z), Err(RenormError::Degenerate { .. })));
    }

    #[test]
    fn two_cycle_condition() {
        assert!(is_two_cycle(&quad(&["6", "2", "5", "4"])).unwrap());
        assert!(!is_two_cycle(&golden()).unwrap());
        assert!(!is_two_cycle(&quad(&["1", "1", "1", "1"])).unwrap());
    }

    #[test]
    fn golden_convergents_are_periodic() {
        let seq = convergents(&golden(), 64).unwrap();
        assert_eq!(seq.status, SequenceStatus::Truncated);
        assert_eq!(seq.entries, vec![(1, 2); 64]);
    }

    #[test]
    fn two_cycle_halts_immediately() {
        let seq = convergents(&quad(&["6", "2", "5", "4"]), 100).unwrap();
        assert!(seq.entries.is_empty());
        assert_eq!(seq.status, SequenceStatus::TwoCycle);
    }

    #[test]
    fn admissibility_rules() {
        assert!(check_admissible(&[(1, 2), (1, 2), (1, 2)]));
        assert!(check_admissible(&[(0, 3), (2, 0), (1, 1)]));
        assert!(!check_admissible(&[(0, 3), (0, 1)]));
        assert!(!check_admissible(&[(1, 2), (0, 0)]));
        // (0,0) in first position with a valid successor is fine
        assert!(check_admissible(&[(0, 0), (2, 0)]));
        assert!(!check_admissible(&[(0, 0), (2, 1)]));
    }

    #[test]
    fn realize_golden_prefix() {
        let seq = vec![(1u64, 2u64); 16];
        let z = realize_sequence(&seq).unwrap();
        let back = convergents(&z, 16).unwrap();
        assert_eq!(back.entries, seq);
        // the ratio y1/x1 encloses sqrt(2)-1 tightly
        let ratio = z.y1.div(&z.x1).unwrap();
        let t = parse_scalar("sqrt(2)-1").unwrap();
        let err = ratio.sub(&t).unwrap().abs().unwrap();
        assert_eq!(
            err.compare(&ExactScalar::from_ratio(1, 1000)).unwrap(),
            std::cmp::Ordering::Less
        );
    }

    #[test]
    fn realized_cells_nest_strictly() {
        // longer admissible prefixes pin the quadruple into strictly smaller
        // projective cells: the distance of the realized slope ratio to the
        // periodic point shrinks with the prefix length
        let t = parse_scalar("sqrt(2)-1").unwrap();
        let mut errors = Vec::new();
        for len in [4usize, 8, 12] {
            let z = realize_sequence(&vec![(1, 2); len]).unwrap();
            let ratio = z.y1.div(&z.x1).unwrap();
            errors.push(ratio.sub(&t).unwrap().abs().unwrap());
        }
        for pair in errors.windows(2) {
            assert_eq!(
                pair[1].compare(&pair[0]).unwrap(),
                std::cmp::Ordering::Less,
                "cell did not shrink"
            );
        }
    }

    #[test]
    fn realize_rejects_inadmissible() {
        assert!(matches!(
            realize_sequence(&[(0, 1), (0, 2)]),
            Err(RenormError::NotAdmissible)
        ));
        assert!(matches!(realize_sequence(&[]), Err(RenormError::NotAdmissible)));
    }

    #[test]
    fn realize_mixed_head_prefix() {
        let mut seq = vec![(2u64, 2u64)];
        seq.extend(vec![(1, 2); 15]);
        let z = realize_sequence(&seq).unwrap();
        let back = convergents(&z, 16).unwrap();
        assert_eq!(back.entries, seq);
        assert_eq!(back.status, SequenceStatus::Truncated);
    }

    #[test]
    fn realize_with_leading_swap() {
        let seq = vec![(2, 2), (1, 2), (1, 2), (0, 4), (3, 0), (1, 2)];
        let z = realize_sequence(&seq).unwrap();
        assert_eq!(convergents(&z, seq.len()).unwrap().entries, seq);
    }

    #[test]
    fn rational_orbits_terminate() {
        let mut state = 0xA5A5_5A5A_1234_9876u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..1000 {
            let mut comp = Vec::new();
            for _ in 0..4 {
                comp.push(ExactScalar::from_ratio((next() % 10_000 + 1) as i64, (next() % 100 + 1) as i64));
            }
            let z = LengthQuadruple::new(
                comp[0].clone(),
                comp[1].clone(),
                comp[2].clone(),
                comp[3].clone(),
            )
            .unwrap();
            let seq = convergents(&z, 1000).unwrap();
            assert_ne!(seq.status, SequenceStatus::Truncated, "rational orbit did not terminate");
        }
    }

    #[test]
    fn display_variant_differs_on_asymmetric_data() {
        // On the worked example the two variants coincide (y1 = y2 there);
        // on generic data the emitted n differs.
        let z = quad(&["7", "5", "2", "3"]);
        let (_, _, n_main) = f_step(&z).unwrap();
        let (_, _, n_disp) = f_step_display_variant(&z).unwrap();
        assert_eq!(n_main, 2); // floor(5/2)
        assert_eq!(n_disp, 1); // floor(5/3)
    }

    #[test]
    fn convergent_sequence_serialization() {
        let seq = ConvergentSequence {
            entries: vec![(1, 2), (0, 3)],
            status: SequenceStatus::TwoCycle,
        };
        let js = serde_json::to_string(&seq).unwrap();
        assert!(js.contains("\"two_cycle\""));
        let back: ConvergentSequence = serde_json::from_str(&js).unwrap();
        assert_eq!(back, seq);
    }
}
