//! Level-k words of the restricted induction.
//!
//! The system starts at `(L, R) = ((3r, 2r, 1r), (2l, 1l, 3l))` and grows by
//! one substitution step per convergent pair `(m, n)`:
//!
//! ```text
//! odd steps                    even steps
//! ---------                    ----------
//! R' = R                       L' = L
//! L1' = (R1 R2)^m L1           R1' = (L1 L3)^m R1
//! L2' = (R2 R1)^m L2           R2' = (L2)^n   R2
//! L3' = (R3)^n   L3            R3' = (L3 L1)^m R3
//! ```
//!
//! Steps are named by parity alone: odd steps rewrite the L-words, even steps
//! the R-words. Convergent index `k` drives word step `k + 1`, so the first
//! (odd) step consumes the pair with index 0.

use crate::iet::{word_to_string, Letter, Side, Word};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug)]
pub enum WordError {
    /// `(m, n) = (0, 0)` at a level where the induction must make progress.
    ZeroStep { level: usize },
    Capacity { projected_bytes: u128, cap_bytes: u64 },
    NotEnoughConvergents { requested: usize, available: usize },
    LengthOverflow,
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::ZeroStep { level } => {
                write!(f, "(m, n) = (0, 0) is only allowed at the first step (level {level})")
            }
            WordError::Capacity { projected_bytes, cap_bytes } => write!(
                f,
                "CAPACITY: materializing needs {projected_bytes} bytes, cap is {cap_bytes}"
            ),
            WordError::NotEnoughConvergents { requested, available } => write!(
                f,
                "level {requested} needs {requested} convergents, only {available} available"
            ),
            WordError::LengthOverflow => write!(f, "word length overflows u128"),
        }
    }
}

impl std::error::Error for WordError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepParity {
    /// L-words rewritten.
    Odd,
    /// R-words rewritten.
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub parity: StepParity,
    pub m: u64,
    pub n: u64,
}

/// The six words `L_1..L_3`, `R_1..R_3` at one induction level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSystem {
    pub level: usize,
    pub l: [Word; 3],
    pub r: [Word; 3],
    pub history: Vec<StepRecord>,
}

pub const DEFAULT_CAP_BYTES: u64 = 1 << 30;

fn letter(index: u8, side: Side) -> Word {
    vec![Letter::new(index, side)]
}

/// The level-0 system.
pub fn initial_words() -> WordSystem {
    WordSystem {
        level: 0,
        l: [
            letter(3, Side::Right),
            letter(2, Side::Right),
            letter(1, Side::Right),
        ],
        r: [
            letter(2, Side::Left),
            letter(1, Side::Left),
            letter(3, Side::Left),
        ],
        history: Vec::new(),
    }
}

/// `(prefix_0 prefix_1 ...)^times tail`, in one allocation.
fn power_concat(prefix: &[&Word], times: u64, tail: &Word) -> Word {
    let rep: usize = prefix.iter().map(|w| w.len()).sum();
    let mut out = Vec::with_capacity(rep * times as usize + tail.len());
    for _ in 0..times {
        for w in prefix {
            out.extend_from_slice(w);
        }
    }
    out.extend_from_slice(tail);
    out
}

impl WordSystem {
    /// Parity of the next step to apply from this level.
    pub fn next_parity(&self) -> StepParity {
        if self.level.is_multiple_of(2) {
            StepParity::Odd
        } else {
            StepParity::Even
        }
    }

    pub fn lengths(&self) -> ([usize; 3], [usize; 3]) {
        (
            [self.l[0].len(), self.l[1].len(), self.l[2].len()],
            [self.r[0].len(), self.r[1].len(), self.r[2].len()],
        )
    }

    pub fn word(&self, which: WordIndex) -> &Word {
        match which {
            WordIndex::L(i) => &self.l[i],
            WordIndex::R(i) => &self.r[i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordIndex {
    /// 0-based.
    L(usize),
    R(usize),
}

impl fmt::Display for WordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordIndex::L(i) => write!(f, "L{}", i + 1),
            WordIndex::R(i) => write!(f, "R{}", i + 1),
        }
    }
}

pub const ALL_WORDS: [WordIndex; 6] = [
    WordIndex::L(0),
    WordIndex::L(1),
    WordIndex::L(2),
    WordIndex::R(0),
    WordIndex::R(1),
    WordIndex::R(2),
];

/// One substitution step. `(0, 0)` is only accepted at level 0, where the
/// leading convergent may be a pure swap.
pub fn apply_step(ws: &WordSystem, m: u64, n: u64) -> Result<WordSystem, WordError> {
    if m == 0 && n == 0 && ws.level > 0 {
        return Err(WordError::ZeroStep { level: ws.level });
    }
    let parity = ws.next_parity();
    let mut next = ws.clone();
    next.level += 1;
    next.history.push(StepRecord { parity, m, n });
    match parity {
        StepParity::Odd => {
            next.l[0] = power_concat(&[&ws.r[0], &ws.r[1]], m, &ws.l[0]);
            next.l[1] = power_concat(&[&ws.r[1], &ws.r[0]], m, &ws.l[1]);
            next.l[2] = power_concat(&[&ws.r[2]], n, &ws.l[2]);
        }
        StepParity::Even => {
            next.r[0] = power_concat(&[&ws.l[0], &ws.l[2]], m, &ws.r[0]);
            next.r[1] = power_concat(&[&ws.l[1]], n, &ws.r[1]);
            next.r[2] = power_concat(&[&ws.l[2], &ws.l[0]], m, &ws.r[2]);
        }
    }
    Ok(next)
}

/// Word lengths after `level` steps, from the substitution length equations
/// alone (nothing materialized).
pub fn predicted_lengths(
    convergents: &[(u64, u64)],
    level: usize,
) -> Result<([u128; 3], [u128; 3]), WordError> {
    if convergents.len() < level {
        return Err(WordError::NotEnoughConvergents {
            requested: level,
            available: convergents.len(),
        });
    }
    let mut l = [1u128; 3];
    let mut r = [1u128; 3];
    let ck = |v: Option<u128>| v.ok_or(WordError::LengthOverflow);
    for (idx, &(m, n)) in convergents.iter().take(level).enumerate() {
        let m = m as u128;
        let n = n as u128;
        if idx % 2 == 0 {
            l = [
                ck(m.checked_mul(r[0] + r[1]).and_then(|v| v.checked_add(l[0])))?,
                ck(m.checked_mul(r[1] + r[0]).and_then(|v| v.checked_add(l[1])))?,
                ck(n.checked_mul(r[2]).and_then(|v| v.checked_add(l[2])))?,
            ];
        } else {
            r = [
                ck(m.checked_mul(l[0] + l[2]).and_then(|v| v.checked_add(r[0])))?,
                ck(n.checked_mul(l[1]).and_then(|v| v.checked_add(r[1])))?,
                ck(m.checked_mul(l[2] + l[0]).and_then(|v| v.checked_add(r[2])))?,
            ];
        }
    }
    Ok((l, r))
}

/// Fold `apply_step` over the leading convergents. The total materialized
/// size is predicted from the length recurrences and checked against
/// `cap_bytes` before any allocation.
pub fn expand(
    convergents: &[(u64, u64)],
    level: usize,
    cap_bytes: u64,
) -> Result<WordSystem, WordError> {
    let (l, r) = predicted_lengths(convergents, level)?;
    let letter_bytes = std::mem::size_of::<Letter>() as u128;
    let total: u128 = l.iter().chain(r.iter()).sum();
    let projected = total.checked_mul(letter_bytes).ok_or(WordError::LengthOverflow)?;
    if projected > cap_bytes as u128 {
        return Err(WordError::Capacity { projected_bytes: projected, cap_bytes });
    }
    let mut ws = initial_words();
    for &(m, n) in convergents.iter().take(level) {
        ws = apply_step(&ws, m, n)?;
    }
    Ok(ws)
}

/// Serialized form: words as comma-separated letter tokens.
#[derive(Serialize, Deserialize)]
pub struct WordSystemRepr {
    pub level: usize,
    #[serde(rename = "L")]
    pub l: [String; 3],
    #[serde(rename = "R")]
    pub r: [String; 3],
    pub history: Vec<StepRecord>,
}

impl WordSystem {
    pub fn to_repr(&self) -> WordSystemRepr {
        WordSystemRepr {
            level: self.level,
            l: [
                word_to_string(&self.l[0]),
                word_to_string(&self.l[1]),
                word_to_string(&self.l[2]),
            ],
            r: [
                word_to_string(&self.r[0]),
                word_to_string(&self.r[1]),
                word_to_string(&self.r[2]),
            ],
            history: self.history.clone(),
        }
    }
}
