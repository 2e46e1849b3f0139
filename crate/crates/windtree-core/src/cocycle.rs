//! The wind-tree cocycle with values in `G = D_inf x D_inf`, its endpoint
//! recurrences, boxes, self-avoidance checks and the finite-depth divergence
//! certificate.
//!
//! Group elements are written `(t, kappa)` with `t` a translation of the cell
//! lattice and `kappa` in the Klein four group `K = {id, tau_v, tau_h,
//! tau_v tau_h}` acting by sign flips; the product rule is
//! `(t1, k1) (t2, k2) = (t1 + k1 t2, k1 k2)`.
//!
//! Letter values: `1l -> ((1,0), id)`, `1r -> ((0,1), id)`, `2l -> id`,
//! `2r -> ((0,0), tau_h)`, `3l -> ((0,0), tau_v)`, `3r -> id`. The flips sit
//! on `2r` and `3l`, the assignment forced jointly by the level-0 value sets
//! and the endpoint sign constraints (three sources agree on it; a fourth,
//! conflicting display is documented in the decisions log as rejected).

use crate::exact::ExactScalar;
use crate::iet::{Letter, Side};
use crate::renorm::{self, LengthQuadruple};
use crate::veech::{self, MultiTwist, SlopeExpansion};
use crate::words::{self, StepParity, WordIndex, WordSystem, ALL_WORDS};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug)]
pub enum CocycleError {
    /// The endpoint recurrences are only justified for even `n_k`.
    OddN { index: usize, n: u64 },
    Capacity { needed_bytes: u128, cap_bytes: u64 },
    BadAlphabet(Letter),
    BadRequest(String),
    Words(words::WordError),
    Renorm(renorm::RenormError),
    Veech(veech::VeechError),
}

impl fmt::Display for CocycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CocycleError::OddN { index, n } => {
                write!(f, "ODD_N: n_{index} = {n} is odd; recurrence not justified")
            }
            CocycleError::Capacity { needed_bytes, cap_bytes } => {
                write!(f, "CAPACITY: need {needed_bytes} bytes, cap {cap_bytes}")
            }
            CocycleError::BadAlphabet(l) => write!(f, "letter {l} outside the 3-interval alphabet"),
            CocycleError::BadRequest(m) => write!(f, "bad request: {m}"),
            CocycleError::Words(e) => write!(f, "{e}"),
            CocycleError::Renorm(e) => write!(f, "{e}"),
            CocycleError::Veech(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CocycleError {}

impl From<words::WordError> for CocycleError {
    fn from(e: words::WordError) -> Self {
        CocycleError::Words(e)
    }
}

impl From<renorm::RenormError> for CocycleError {
    fn from(e: renorm::RenormError) -> Self {
        CocycleError::Renorm(e)
    }
}

impl From<veech::VeechError> for CocycleError {
    fn from(e: veech::VeechError) -> Self {
        CocycleError::Veech(e)
    }
}

/// Element of the Klein four group, `tau_v^v tau_h^h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Flip {
    pub v: bool,
    pub h: bool,
}

impl Flip {
    pub const ID: Flip = Flip { v: false, h: false };
    pub const TAU_V: Flip = Flip { v: true, h: false };
    pub const TAU_H: Flip = Flip { v: false, h: true };
    pub const TAU_VH: Flip = Flip { v: true, h: true };

    pub fn mul(self, other: Flip) -> Flip {
        Flip { v: self.v ^ other.v, h: self.h ^ other.h }
    }

    /// Action on the lattice: `tau_v (x,y) = (-x,y)`, `tau_h (x,y) = (x,-y)`.
    pub fn apply(self, t: (i64, i64)) -> (i64, i64) {
        (if self.v { -t.0 } else { t.0 }, if self.h { -t.1 } else { t.1 })
    }

    pub fn label(self) -> &'static str {
        match (self.v, self.h) {
            (false, false) => "id",
            (true, false) => "v",
            (false, true) => "h",
            (true, true) => "vh",
        }
    }
}

impl fmt::Display for Flip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// `(translation, flip)` in the semidirect product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupElement {
    pub t: (i64, i64),
    pub flip: Flip,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { t: (0, 0), flip: Flip::ID };

    pub fn new(t: (i64, i64), flip: Flip) -> Self {
        GroupElement { t, flip }
    }

    pub fn translation(t: (i64, i64)) -> Self {
        GroupElement { t, flip: Flip::ID }
    }
}

pub fn group_mul(g1: GroupElement, g2: GroupElement) -> GroupElement {
    let moved = g1.flip.apply(g2.t);
    GroupElement { t: (g1.t.0 + moved.0, g1.t.1 + moved.1), flip: g1.flip.mul(g2.flip) }
}

pub fn group_inverse(g: GroupElement) -> GroupElement {
    let t = g.flip.apply((-g.t.0, -g.t.1));
    GroupElement { t, flip: g.flip }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({},{}),{})", self.t.0, self.t.1, self.flip)
    }
}

/// Cocycle value of a single letter.
pub fn letter_value(letter: Letter) -> Result<GroupElement, CocycleError> {
    let g = match (letter.index, letter.side) {
        (1, Side::Left) => GroupElement::translation((1, 0)),
        (1, Side::Right) => GroupElement::translation((0, 1)),
        (2, Side::Left) => GroupElement::IDENTITY,
        (2, Side::Right) => GroupElement::new((0, 0), Flip::TAU_H),
        (3, Side::Left) => GroupElement::new((0, 0), Flip::TAU_V),
        (3, Side::Right) => GroupElement::IDENTITY,
        _ => return Err(CocycleError::BadAlphabet(letter)),
    };
    Ok(g)
}

/// Integer bounding rectangle of a set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub xmin: BigInt,
    pub ymin: BigInt,
    pub xmax: BigInt,
    pub ymax: BigInt,
}

impl CellBox {
    pub fn from_i64(xmin: i64, ymin: i64, xmax: i64, ymax: i64) -> Self {
        CellBox {
            xmin: xmin.into(),
            ymin: ymin.into(),
            xmax: xmax.into(),
            ymax: ymax.into(),
        }
    }

    pub fn of_points(points: &[(i64, i64)]) -> Option<CellBox> {
        let first = points.first()?;
        let (mut xmin, mut ymin, mut xmax, mut ymax) = (first.0, first.1, first.0, first.1);
        for &(x, y) in points {
            xmin = xmin.min(x);
            ymin = ymin.min(y);
            xmax = xmax.max(x);
            ymax = ymax.max(y);
        }
        Some(CellBox::from_i64(xmin, ymin, xmax, ymax))
    }

    pub fn contains_box(&self, inner: &CellBox) -> bool {
        self.xmin <= inner.xmin
            && self.ymin <= inner.ymin
            && self.xmax >= inner.xmax
            && self.ymax >= inner.ymax
    }
}

impl fmt::Display for CellBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.xmin, self.ymin, self.xmax, self.ymax)
    }
}

impl Serialize for CellBox {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("xmin", &self.xmin.to_string())?;
        map.serialize_entry("ymin", &self.ymin.to_string())?;
        map.serialize_entry("xmax", &self.xmax.to_string())?;
        map.serialize_entry("ymax", &self.ymax.to_string())?;
        map.end()
    }
}

/// Value, visited cells and bounding box of a word under the cocycle.
#[derive(Clone, Debug)]
pub struct WordEvaluation {
    pub value: GroupElement,
    /// Translation parts of all prefix products, empty and full included;
    /// multiset semantics (repeated visits kept).
    pub prefix_positions: Vec<(i64, i64)>,
    pub bounding_box: CellBox,
}

/// Ordered product of letter values with all intermediate positions.
pub fn evaluate_word(word: &[Letter], cap_bytes: u64) -> Result<WordEvaluation, CocycleError> {
    let needed = (word.len() as u128 + 1) * 16;
    if needed > cap_bytes as u128 {
        return Err(CocycleError::Capacity { needed_bytes: needed, cap_bytes });
    }
    let mut positions = Vec::with_capacity(word.len() + 1);
    let mut acc = GroupElement::IDENTITY;
    positions.push(acc.t);
    for &letter in word {
        acc = group_mul(acc, letter_value(letter)?);
        positions.push(acc.t);
    }
    let bounding_box = CellBox::of_points(&positions).expect("nonempty");
    Ok(WordEvaluation { value: acc, prefix_positions: positions, bounding_box })
}

/// Flip part of the cocycle on a word (the `K`-valued cocycle).
pub fn word_flip(word: &[Letter]) -> Result<Flip, CocycleError> {
    let mut acc = Flip::ID;
    for &letter in word {
        acc = acc.mul(letter_value(letter)?.flip);
    }
    Ok(acc)
}

/// Endpoint data at one level: `X = (x1,x2,x3)`, `Y = (y1,y2,y3)` plus the
/// box-widening fourth coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndpointState {
    pub k: usize,
    pub x: [BigUint; 3],
    pub y: [BigUint; 3],
    pub x4: BigUint,
    pub y4: BigUint,
}

impl EndpointState {
    pub fn initial() -> Self {
        EndpointState {
            k: 0,
            x: [BigUint::zero(), BigUint::zero(), BigUint::one()],
            y: [BigUint::zero(), BigUint::zero(), BigUint::one()],
            x4: BigUint::one(),
            y4: BigUint::one(),
        }
    }

    pub fn all_positive(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| !v.is_zero())
    }
}

fn matvec(m: u64, n: u64, v: &[BigUint; 3]) -> [BigUint; 3] {
    // rows (0, m, m), (m, 0, 0), (n, 0, 0)
    [
        BigUint::from(m) * (&v[1] + &v[2]),
        BigUint::from(m) * &v[0],
        BigUint::from(n) * &v[0],
    ]
}

/// Endpoint states for `k = 0..=depth`. Odd steps update `X` and `x4`, even
/// steps `Y` and `y4`; requires every `n_k` even unless `allow_odd` is set
/// (the recurrence is not justified otherwise and carries no certificate
/// value; see `endpoint_recurrence_experimental`).
fn endpoint_recurrence_impl(
    convergents: &[(u64, u64)],
    depth: usize,
    allow_odd: bool,
) -> Result<Vec<EndpointState>, CocycleError> {
    if convergents.len() < depth {
        return Err(CocycleError::BadRequest(format!(
            "depth {depth} needs {depth} convergents, got {}",
            convergents.len()
        )));
    }
    if !allow_odd {
        for (k, &(_, n)) in convergents.iter().take(depth).enumerate() {
            if n % 2 == 1 {
                return Err(CocycleError::OddN { index: k, n });
            }
        }
    }
    let mut out = Vec::with_capacity(depth + 1);
    out.push(EndpointState::initial());
    for step in 1..=depth {
        let (m, n) = convergents[step - 1];
        let prev = out.last().expect("nonempty");
        let mut state = prev.clone();
        state.k = step;
        if step % 2 == 1 {
            let add = matvec(m, n, &prev.y);
            for (slot, delta) in state.x.iter_mut().zip(add) {
                *slot += delta;
            }
            if n != 0 {
                state.x4 = prev.x4.clone().max(prev.y[1].clone());
            }
        } else {
            let add = matvec(m, n, &prev.x);
            for (slot, delta) in state.y.iter_mut().zip(add) {
                *slot += delta;
            }
            if n != 0 {
                state.y4 = prev.y4.clone().max(prev.x[1].clone());
            }
        }
        out.push(state);
    }
    Ok(out)
}

pub fn endpoint_recurrence(
    convergents: &[(u64, u64)],
    depth: usize,
) -> Result<Vec<EndpointState>, CocycleError> {
    endpoint_recurrence_impl(convergents, depth, false)
}

/// Same recurrence without the evenness guard. Experimental: the update rule
/// is unjustified for odd `n_k` and the output must not feed certificates.
pub fn endpoint_recurrence_experimental(
    convergents: &[(u64, u64)],
    depth: usize,
) -> Result<Vec<EndpointState>, CocycleError> {
    endpoint_recurrence_impl(convergents, depth, true)
}

/// The six boxes at one level, in the order L1, L2, L3, R1, R2, R3.
///
/// These are enclosures of the enumerated prefix-position sets; at the lowest
/// levels they may be strictly larger (the L3 box at level 0 has width `x4 =
/// 1` while the single letter `1r` only visits a segment).
pub fn boxes(state: &EndpointState) -> [CellBox; 6] {
    let big = |v: &BigUint| BigInt::from(v.clone());
    let zero = BigInt::zero;
    let lbox = CellBox {
        xmin: zero(),
        ymin: zero(),
        xmax: big(&state.x[0]),
        ymax: big(&state.x[1]),
    };
    let rbox = CellBox {
        xmin: zero(),
        ymin: zero(),
        xmax: big(&state.y[1]),
        ymax: big(&state.y[0]),
    };
    [
        lbox.clone(),
        lbox,
        CellBox { xmin: zero(), ymin: zero(), xmax: big(&state.x4), ymax: big(&state.x[2]) },
        rbox.clone(),
        CellBox { xmin: zero(), ymin: zero(), xmax: big(&state.y[2]), ymax: big(&state.y4) },
        rbox,
    ]
}

/// Largest box side at one level (the growth quantity of certificates).
pub fn max_box_side(state: &EndpointState) -> BigUint {
    let mut best = BigUint::zero();
    for v in state.x.iter().chain(state.y.iter()).chain([&state.x4, &state.y4]) {
        if *v > best {
            best = v.clone();
        }
    }
    best
}

/// Sign constraints of the endpoint lemma, checked by direct evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub level: usize,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Flip values per word and the component patterns of the translation parts:
/// `L1, L2` share a first-quadrant value, `R1, R3` share one, `L3` is
/// vertical, `R2` horizontal; flips are `id` except `tau_h` on `L2` and
/// `tau_v` on `R3`.
pub fn check_shape(ws: &WordSystem, cap_bytes: u64) -> Result<ShapeReport, CocycleError> {
    let mut failures = Vec::new();
    let expected_flips: [(WordIndex, Flip); 6] = [
        (WordIndex::L(0), Flip::ID),
        (WordIndex::L(1), Flip::TAU_H),
        (WordIndex::L(2), Flip::ID),
        (WordIndex::R(0), Flip::ID),
        (WordIndex::R(1), Flip::ID),
        (WordIndex::R(2), Flip::TAU_V),
    ];
    for (which, expected) in expected_flips {
        let got = word_flip(ws.word(which))?;
        if got != expected {
            failures.push(format!("flip of {which} is {got}, expected {expected}"));
        }
    }
    let ev = |which: WordIndex| -> Result<GroupElement, CocycleError> {
        Ok(evaluate_word(ws.word(which), cap_bytes)?.value)
    };
    let l1 = ev(WordIndex::L(0))?;
    let l2 = ev(WordIndex::L(1))?;
    let l3 = ev(WordIndex::L(2))?;
    let r1 = ev(WordIndex::R(0))?;
    let r2 = ev(WordIndex::R(1))?;
    let r3 = ev(WordIndex::R(2))?;
    if l1.t != l2.t {
        failures.push(format!("translations of L1 {:?} and L2 {:?} differ", l1.t, l2.t));
    }
    if r1.t != r3.t {
        failures.push(format!("translations of R1 {:?} and R3 {:?} differ", r1.t, r3.t));
    }
    for (name, t) in [("L1", l1.t), ("L2", l2.t), ("R1", r1.t), ("R3", r3.t)] {
        if t.0 < 0 || t.1 < 0 {
            failures.push(format!("{name} translation {t:?} leaves the first quadrant"));
        }
    }
    if l3.t.0 != 0 || l3.t.1 < 0 {
        failures.push(format!("L3 translation {:?} not of the form (0, n >= 0)", l3.t));
    }
    if r2.t.1 != 0 || r2.t.0 < 0 {
        failures.push(format!("R2 translation {:?} not of the form (n >= 0, 0)", r2.t));
    }
    Ok(ShapeReport { level: ws.level, pass: failures.is_empty(), failures })
}

/// `X`, `Y` triples read off materialized words: the oracle side of the
/// endpoint recurrence. `x4`/`y4` are recurrence-only data and not returned.
pub fn endpoints_from_words(
    ws: &WordSystem,
    cap_bytes: u64,
) -> Result<([i64; 3], [i64; 3]), CocycleError> {
    let l1 = evaluate_word(&ws.l[0], cap_bytes)?.value.t;
    let l3 = evaluate_word(&ws.l[2], cap_bytes)?.value.t;
    let r1 = evaluate_word(&ws.r[0], cap_bytes)?.value.t;
    let r2 = evaluate_word(&ws.r[1], cap_bytes)?.value.t;
    // f-bar(L1) = (x1, x2), f-bar(L3) = (0, x3); f-bar(R1) = (y2, y1),
    // f-bar(R2) = (y3, 0).
    Ok(([l1.0, l1.1, l3.1], [r1.1, r1.0, r2.0]))
}

/// Decomposition of a level-k word into level-(k-1) blocks.
pub fn block_decomposition(parity: StepParity, m: u64, n: u64, which: WordIndex) -> Vec<WordIndex> {
    use WordIndex::{L, R};
    let mut blocks = Vec::new();
    let reps = |pair: [WordIndex; 2], times: u64, tail: WordIndex, out: &mut Vec<WordIndex>| {
        for _ in 0..times {
            out.push(pair[0]);
            out.push(pair[1]);
        }
        out.push(tail);
    };
    match (parity, which) {
        (StepParity::Odd, L(0)) => reps([R(0), R(1)], m, L(0), &mut blocks),
        (StepParity::Odd, L(1)) => reps([R(1), R(0)], m, L(1), &mut blocks),
        (StepParity::Odd, L(2)) => {
            for _ in 0..n {
                blocks.push(R(2));
            }
            blocks.push(L(2));
        }
        (StepParity::Odd, other) => blocks.push(other),
        (StepParity::Even, R(0)) => reps([L(0), L(2)], m, R(0), &mut blocks),
        (StepParity::Even, R(1)) => {
            for _ in 0..n {
                blocks.push(L(1));
            }
            blocks.push(R(1));
        }
        (StepParity::Even, R(2)) => reps([L(2), L(0)], m, R(2), &mut blocks),
        (StepParity::Even, other) => blocks.push(other),
    }
    blocks
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfAvoidViolation {
    pub word: String,
    pub block_a: usize,
    pub block_b: usize,
    pub shared_points: usize,
    pub expected_shared: usize,
    pub example_point: Option<(i64, i64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfAvoidReport {
    pub level: usize,
    pub pass: bool,
    pub words_checked: usize,
    pub violations: Vec<SelfAvoidViolation>,
}

/// Block-level self-avoidance at one level: within each level-`level` word,
/// the translated position sets of its level-(level-1) blocks must be
/// disjoint for non-adjacent blocks and share exactly one point for adjacent
/// ones.
///
/// Block boundaries come from the length recurrence; block contents come
/// from the system's own words, so a corrupted letter in a materialized word
/// is caught when the system is checked at its own level.
pub fn check_self_avoiding(
    ws: &WordSystem,
    level: usize,
    cap_bytes: u64,
) -> Result<SelfAvoidReport, CocycleError> {
    if level == 0 || level > ws.level {
        return Err(CocycleError::BadRequest(format!(
            "level {level} outside 1..={}",
            ws.level
        )));
    }
    let steps: Vec<(u64, u64)> = ws.history.iter().map(|s| (s.m, s.n)).collect();
    let record = ws.history[level - 1];
    let (pl, pr) = words::predicted_lengths(&steps, level - 1)?;
    let lens = block_lengths_from_u128(&pl, &pr)?;
    if level == ws.level {
        check_word_blocks(ws, record, &lens, cap_bytes)
    } else {
        let cur = words::expand(&steps, level, cap_bytes)?;
        check_word_blocks(&cur, record, &lens, cap_bytes)
    }
}

/// Same check on an already-materialized consecutive pair of systems.
pub fn check_self_avoiding_step(
    prev: &WordSystem,
    cur: &WordSystem,
    cap_bytes: u64,
) -> Result<SelfAvoidReport, CocycleError> {
    let record = *cur.history.last().ok_or_else(|| {
        CocycleError::BadRequest("current system has no recorded step".into())
    })?;
    let (l, r) = prev.lengths();
    check_word_blocks(cur, record, &(l, r), cap_bytes)
}

fn block_lengths_from_u128(
    l: &[u128; 3],
    r: &[u128; 3],
) -> Result<([usize; 3], [usize; 3]), CocycleError> {
    let conv = |v: u128| -> Result<usize, CocycleError> {
        usize::try_from(v).map_err(|_| CocycleError::BadRequest("word lengths exceed usize".into()))
    };
    Ok((
        [conv(l[0])?, conv(l[1])?, conv(l[2])?],
        [conv(r[0])?, conv(r[1])?, conv(r[2])?],
    ))
}

fn check_word_blocks(
    cur: &WordSystem,
    record: words::StepRecord,
    prev_lengths: &([usize; 3], [usize; 3]),
    cap_bytes: u64,
) -> Result<SelfAvoidReport, CocycleError> {
    let block_len = |b: WordIndex| match b {
        WordIndex::L(i) => prev_lengths.0[i],
        WordIndex::R(i) => prev_lengths.1[i],
    };
    let mut violations = Vec::new();
    let mut words_checked = 0usize;
    for which in ALL_WORDS {
        let blocks = block_decomposition(record.parity, record.m, record.n, which);
        if blocks.len() < 2 {
            continue;
        }
        words_checked += 1;
        let word = cur.word(which);
        let eval = evaluate_word(word, cap_bytes)?;
        // Index ranges of the blocks inside the concatenation; boundaries are
        // shared (the end of one block is the start of the next).
        let mut ranges = Vec::with_capacity(blocks.len());
        let mut offset = 0usize;
        for b in &blocks {
            let len = block_len(*b);
            ranges.push((offset, offset + len));
            offset += len;
        }
        if offset != word.len() {
            return Err(CocycleError::BadRequest(format!(
                "word {which} has length {} but its blocks total {offset}",
                word.len()
            )));
        }
        let sets: Vec<HashSet<(i64, i64)>> = ranges
            .iter()
            .map(|&(s, e)| eval.prefix_positions[s..=e].iter().copied().collect())
            .collect();
        for j in 0..sets.len() {
            for j2 in j + 1..sets.len() {
                let shared = sets[j].intersection(&sets[j2]).count();
                let expected = if j2 - j == 1 { 1 } else { 0 };
                if shared != expected {
                    let example = sets[j].intersection(&sets[j2]).next().copied();
                    violations.push(SelfAvoidViolation {
                        word: which.to_string(),
                        block_a: j,
                        block_b: j2,
                        shared_points: shared,
                        expected_shared: expected,
                        example_point: example,
                    });
                }
            }
        }
    }
    Ok(SelfAvoidReport {
        level: cur.level,
        pass: violations.is_empty(),
        words_checked,
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalPatternViolation {
    pub position: (i64, i64),
    pub prefix_indices: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalPatternReport {
    pub pass: bool,
    pub coincidence_groups: usize,
    pub violations: Vec<LocalPatternViolation>,
}

fn is_letter(l: Letter, index: u8, side: Side) -> bool {
    l.index == index && l.side == side
}

/// Letter-level self-avoidance of a single word: every pair of equal prefix
/// positions must sit inside one maximal bouncing factor, of shape
/// `3r 3l^n` or `2l 2r^n` (a word-initial factor may lack its leading
/// letter, being the tail of a block started earlier).
pub fn check_local_patterns(
    word: &[Letter],
    cap_bytes: u64,
) -> Result<LocalPatternReport, CocycleError> {
    let eval = evaluate_word(word, cap_bytes)?;
    let mut groups: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in eval.prefix_positions.iter().enumerate() {
        groups.entry(p).or_default().push(i);
    }
    let mut coincidence_groups = 0usize;
    let mut violations = Vec::new();
    let mut keys: Vec<(i64, i64)> = groups.keys().copied().collect();
    keys.sort_unstable();
    for p in keys {
        let indices = &groups[&p];
        if indices.len() < 2 {
            continue;
        }
        coincidence_groups += 1;
        let contiguous = indices.windows(2).all(|w| w[1] == w[0] + 1);
        if !contiguous {
            violations.push(LocalPatternViolation {
                position: p,
                prefix_indices: indices.clone(),
                reason: "position revisited outside a single bouncing block".into(),
            });
            continue;
        }
        let start = indices[0];
        let end = *indices.last().expect("nonempty");
        let run = &word[start..end];
        let first = run[0];
        let ok = if first.index == 3 {
            let head_ok = is_letter(first, 3, Side::Right)
                || (start == 0 && is_letter(first, 3, Side::Left));
            head_ok && run[1..].iter().all(|&l| is_letter(l, 3, Side::Left))
        } else if first.index == 2 {
            let head_ok = is_letter(first, 2, Side::Left)
                || (start == 0 && is_letter(first, 2, Side::Right));
            head_ok && run[1..].iter().all(|&l| is_letter(l, 2, Side::Right))
        } else {
            false
        };
        if !ok {
            violations.push(LocalPatternViolation {
                position: p,
                prefix_indices: indices.clone(),
                reason: format!(
                    "constant-position factor {:?} is not of shape 3r 3l^n or 2l 2r^n",
                    run.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
                ),
            });
        }
    }
    Ok(LocalPatternReport { pass: violations.is_empty(), coincidence_groups, violations })
}

/// How the slope reaches the certifier.
#[derive(Clone, Debug)]
pub enum SlopeSource {
    /// Exact slope value; convergents come from iterating the
    /// renormalization map on the parameter quadruple.
    Exact(ExactScalar),
    /// Width expansion; convergents come from the digit formula.
    Expansion { se: SlopeExpansion, mt: MultiTwist },
}

#[derive(Clone, Debug)]
pub struct CertifyRequest {
    pub a: ExactScalar,
    pub b: ExactScalar,
    pub slope: SlopeSource,
    pub depth: usize,
    pub pattern_level: usize,
    pub cap_bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedToDepth,
    Refused,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateChecks {
    pub evenness: bool,
    pub positivity_level: Option<usize>,
    pub box_disjointness_levels: Option<(usize, usize)>,
    pub local_pattern_ok: bool,
    pub growth_sequence: Vec<String>,
    pub growth_strictly_increasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub schema: String,
    pub parameters: CertificateParameters,
    pub slope: CertificateSlope,
    pub depth: usize,
    pub pattern_level: usize,
    pub convergents: Vec<(u64, u64)>,
    pub checks: CertificateChecks,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateParameters {
    pub a: String,
    pub b: String,
    pub a_decimal: f64,
    pub b_decimal: f64,
    pub multitwist: Option<[u64; 4]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSlope {
    pub description: String,
    pub exact: Option<String>,
    pub decimal: Option<f64>,
}

fn empty_checks() -> CertificateChecks {
    CertificateChecks {
        evenness: false,
        positivity_level: None,
        box_disjointness_levels: None,
        local_pattern_ok: false,
        growth_sequence: Vec::new(),
        growth_strictly_increasing: false,
    }
}

/// The finite-depth divergence certificate.
///
/// Certified iff (i) every available `n_k` is even, (ii) some level
/// `k0 <= depth - 1` has all endpoint entries positive, (iii) block
/// self-avoidance holds on levels `k0+1 ..= pattern_level`, (iv) letter-level
/// patterns pass on all six words at `pattern_level`, and (v) the max box
/// side strictly increases every two levels from `k0`.
///
/// Hypothesis failures (odd `n_k`, early renormalization stop, no positivity
/// level) refuse; check failures despite valid hypotheses mark the
/// certificate failed, which callers must treat as an internal inconsistency.
pub fn certify_divergence(req: &CertifyRequest) -> Result<Certificate, CocycleError> {
    if req.depth == 0 {
        return Err(CocycleError::BadRequest("depth must be positive".into()));
    }
    if req.pattern_level > req.depth {
        return Err(CocycleError::BadRequest(format!(
            "pattern level {} exceeds depth {}",
            req.pattern_level, req.depth
        )));
    }
    let (slope_desc, slope_exact, slope_decimal, mt) = match &req.slope {
        SlopeSource::Exact(s) => (
            format!("exact slope {s}"),
            Some(s.to_string()),
            Some(s.to_f64()),
            veech::multitwist_from_ab(&req.a, &req.b).ok().flatten(),
        ),
        SlopeSource::Expansion { se, mt } => {
            let exact = veech::slope_from_expansion(se, true).ok();
            let decimal = exact.as_ref().map(|s| s.to_f64());
            (
                format!("expansion {:?} over widths (s_h, s_v) = ({}, {})", se.coeffs, se.s_h, se.s_v),
                exact.map(|s| s.to_string()),
                decimal,
                Some(*mt),
            )
        }
    };
    let parameters = CertificateParameters {
        a: req.a.to_string(),
        b: req.b.to_string(),
        a_decimal: req.a.to_f64(),
        b_decimal: req.b.to_f64(),
        multitwist: mt.map(|m| [m.mh, m.nh, m.mv, m.nv]),
    };
    let slope_info = CertificateSlope {
        description: slope_desc,
        exact: slope_exact,
        decimal: slope_decimal,
    };
    let base = |convergents: Vec<(u64, u64)>, checks, verdict, reason| Certificate {
        schema: "windtree/1".into(),
        parameters: parameters.clone(),
        slope: slope_info.clone(),
        depth: req.depth,
        pattern_level: req.pattern_level,
        convergents,
        checks,
        verdict,
        reason,
    };

    // Resolve convergents to the requested depth.
    let convergents: Vec<(u64, u64)> = match &req.slope {
        SlopeSource::Expansion { se, mt } => veech::convergents_from_expansion(se, mt, req.depth)?,
        SlopeSource::Exact(slope) => {
            let z = LengthQuadruple::from_parameters(&req.a, &req.b, slope)?;
            let seq = renorm::convergents(&z, req.depth)?;
            if seq.entries.len() < req.depth {
                return Ok(base(
                    seq.entries.clone(),
                    empty_checks(),
                    Verdict::Refused,
                    Some(format!(
                        "renormalization stopped with status {:?} after {} steps",
                        seq.status,
                        seq.entries.len()
                    )),
                ));
            }
            seq.entries
        }
    };

    // (i) evenness of every n_k.
    if let Some((k, &(_, n))) = convergents.iter().enumerate().find(|(_, &(_, n))| n % 2 == 1) {
        let mut checks = empty_checks();
        checks.evenness = false;
        return Ok(base(
            convergents.clone(),
            checks,
            Verdict::Refused,
            Some(format!("n_{k} = {n} is odd; the divergence hypothesis fails")),
        ));
    }

    // (ii) positivity threshold from the endpoint recurrence.
    let states = endpoint_recurrence(&convergents, req.depth)?;
    let k0 = match states.iter().take(req.depth).position(|s| s.all_positive()) {
        Some(k0) => k0,
        None => {
            let mut checks = empty_checks();
            checks.evenness = true;
            return Ok(base(
                convergents.clone(),
                checks,
                Verdict::Refused,
                Some(format!("no endpoint-positive level within depth {}", req.depth)),
            ));
        }
    };

    let growth_sequence: Vec<String> =
        states.iter().map(|s| max_box_side(s).to_string()).collect();

    // (v) strict growth every two levels from k0 on.
    let sides: Vec<BigUint> = states.iter().map(max_box_side).collect();
    let mut growth_ok = true;
    for k in k0..sides.len().saturating_sub(2) {
        if sides[k + 2] <= sides[k] {
            growth_ok = false;
            break;
        }
    }

    // (iii) block self-avoidance on levels k0+1 ..= pattern_level, and
    // (iv) letter-level patterns on all six words at pattern_level.
    let steps: Vec<(u64, u64)> = convergents.clone();
    let mut sa_ok = true;
    let mut sa_reason = None;
    let sa_range =
        (req.pattern_level > k0).then_some((k0 + 1, req.pattern_level));
    {
        // Pre-check the materialization size before allocating anything.
        let (l, r) = words::predicted_lengths(&steps, req.pattern_level)?;
        let total: u128 = l.iter().chain(r.iter()).sum::<u128>() * 2;
        if total > req.cap_bytes as u128 {
            return Err(CocycleError::Capacity { needed_bytes: total, cap_bytes: req.cap_bytes });
        }
        let mut systems = Vec::with_capacity(req.pattern_level + 1);
        systems.push(words::initial_words());
        for &(m, n) in steps.iter().take(req.pattern_level) {
            let next = words::apply_step(systems.last().expect("nonempty"), m, n)?;
            systems.push(next);
        }
        for level in (k0 + 1)..=req.pattern_level {
            let report =
                check_self_avoiding_step(&systems[level - 1], &systems[level], req.cap_bytes)?;
            if !report.pass {
                sa_ok = false;
                let v = &report.violations[0];
                sa_reason = Some(format!(
                    "self-avoidance fails at level {level}: word {} blocks {} and {} share {} points (expected {})",
                    v.word, v.block_a, v.block_b, v.shared_points, v.expected_shared
                ));
                break;
            }
        }
        if sa_ok {
            let top = systems.last().expect("nonempty");
            for which in ALL_WORDS {
                let report = check_local_patterns(top.word(which), req.cap_bytes)?;
                if !report.pass {
                    sa_ok = false;
                    sa_reason = Some(format!(
                        "local patterns fail on {which} at level {}: {}",
                        req.pattern_level, report.violations[0].reason
                    ));
                    break;
                }
            }
        }
    }

    let checks = CertificateChecks {
        evenness: true,
        positivity_level: Some(k0),
        box_disjointness_levels: sa_range,
        local_pattern_ok: sa_ok,
        growth_sequence,
        growth_strictly_increasing: growth_ok,
    };

    if !sa_ok {
        return Ok(base(convergents, checks, Verdict::Failed, sa_reason));
    }
    if !growth_ok {
        return Ok(base(
            convergents,
            checks,
            Verdict::Failed,
            Some("max box side fails to grow strictly every two levels".into()),
        ));
    }
    Ok(base(convergents, checks, Verdict::CertifiedToDepth, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::{word_from_string, Word};
    use num_traits::ToPrimitive;
    use crate::veech::SlopeCoeffs;
    use crate::words::{expand, DEFAULT_CAP_BYTES};

    fn w(s: &str) -> Word {
        word_from_string(s).unwrap()
    }

    fn golden(levels: usize) -> WordSystem {
        expand(&vec![(1, 2); levels], levels, DEFAULT_CAP_BYTES).unwrap()
    }

    #[test]
    fn letter_values() {
        assert_eq!(
            letter_value(Letter::new(1, Side::Right)).unwrap(),
            GroupElement::translation((0, 1))
        );
        assert_eq!(
            letter_value(Letter::new(3, Side::Left)).unwrap(),
            GroupElement::new((0, 0), Flip::TAU_V)
        );
        assert_eq!(letter_value(Letter::new(2, Side::Left)).unwrap(), GroupElement::IDENTITY);
        assert!(matches!(
            letter_value(Letter::new(4, Side::Left)),
            Err(CocycleError::BadAlphabet(_))
        ));
    }

    #[test]
    fn product_rule() {
        let a = GroupElement::new((1, 0), Flip::TAU_V);
        let b = GroupElement::translation((1, 0));
        assert_eq!(group_mul(a, b), GroupElement::new((0, 0), Flip::TAU_V));
        let tv = GroupElement::new((0, 0), Flip::TAU_V);
        assert_eq!(group_mul(tv, tv), GroupElement::IDENTITY);
        let c = GroupElement::new((0, 3), Flip::TAU_H);
        let d = GroupElement::new((2, 1), Flip::TAU_V);
        assert_eq!(group_mul(c, d), GroupElement::new((2, 2), Flip::TAU_VH));
    }

    #[test]
    fn group_axioms_on_random_triples() {
        let mut state = 0x0123_4567_89AB_CDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut gen = || {
            GroupElement::new(
                ((next() % 21) as i64 - 10, (next() % 21) as i64 - 10),
                Flip { v: next() % 2 == 0, h: next() % 2 == 0 },
            )
        };
        for _ in 0..2000 {
            let (a, b, c) = (gen(), gen(), gen());
            assert_eq!(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c)));
            assert_eq!(group_mul(a, GroupElement::IDENTITY), a);
            assert_eq!(group_mul(GroupElement::IDENTITY, a), a);
            assert_eq!(group_mul(a, group_inverse(a)), GroupElement::IDENTITY);
            assert_eq!(group_mul(group_inverse(a), a), GroupElement::IDENTITY);
            // the flip action is by automorphisms of the lattice
            let f = a.flip;
            let (p, q) = (b.t, c.t);
            let sum = (p.0 + q.0, p.1 + q.1);
            let fp = f.apply(p);
            let fq = f.apply(q);
            assert_eq!(f.apply(sum), (fp.0 + fq.0, fp.1 + fq.1));
        }
    }

    #[test]
    fn word_evaluation_examples() {
        let e = evaluate_word(&w("1r"), DEFAULT_CAP_BYTES).unwrap();
        assert_eq!(e.value, GroupElement::translation((0, 1)));
        assert_eq!(e.prefix_positions, vec![(0, 0), (0, 1)]);
        assert_eq!(e.bounding_box, CellBox::from_i64(0, 0, 0, 1));

        let e = evaluate_word(&w("3l,3l"), DEFAULT_CAP_BYTES).unwrap();
        assert_eq!(e.value, GroupElement::IDENTITY);
        assert_eq!(e.prefix_positions, vec![(0, 0); 3]);
        assert_eq!(e.bounding_box, CellBox::from_i64(0, 0, 0, 0));

        let e = evaluate_word(&w("2l,1l,3r"), DEFAULT_CAP_BYTES).unwrap();
        assert_eq!(e.value, GroupElement::translation((1, 0)));
        assert_eq!(e.bounding_box, CellBox::from_i64(0, 0, 1, 0));
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(
            evaluate_word(&w("1l,1r,2l"), 16),
            Err(CocycleError::Capacity { .. })
        ));
    }

    #[test]
    fn endpoint_recurrence_golden_values() {
        let states = endpoint_recurrence(&vec![(1, 2); 5], 5).unwrap();
        let as_u64 = |v: &[BigUint; 3]| -> [u64; 3] {
            [
                v[0].to_u64().unwrap(),
                v[1].to_u64().unwrap(),
                v[2].to_u64().unwrap(),
            ]
        };
        let xs: Vec<[u64; 3]> = states.iter().map(|s| as_u64(&s.x)).collect();
        let ys: Vec<[u64; 3]> = states.iter().map(|s| as_u64(&s.y)).collect();
        assert_eq!(
            xs,
            vec![[0, 0, 1], [1, 0, 1], [1, 0, 1], [5, 1, 3], [5, 1, 3], [24, 6, 13]]
        );
        assert_eq!(
            ys,
            vec![[0, 0, 1], [0, 0, 1], [1, 1, 3], [1, 1, 3], [5, 6, 13], [5, 6, 13]]
        );
        // x4 stays 1 through level 4 and jumps to max(1, y2^(4)) = 6 at level 5
        let x4: Vec<u64> = states.iter().map(|s| s.x4.to_u64().unwrap()).collect();
        assert_eq!(x4, vec![1, 1, 1, 1, 1, 6]);
        let y4: Vec<u64> = states.iter().map(|s| s.y4.to_u64().unwrap()).collect();
        assert_eq!(y4, vec![1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn odd_n_is_rejected_by_default() {
        assert!(matches!(
            endpoint_recurrence(&[(1, 2), (1, 1)], 2),
            Err(CocycleError::OddN { index: 1, n: 1 })
        ));
        // the experimental entry point runs anyway
        assert!(endpoint_recurrence_experimental(&[(1, 2), (1, 1)], 2).is_ok());
    }

    #[test]
    fn boxes_at_level_four() {
        let states = endpoint_recurrence(&vec![(1, 2); 4], 4).unwrap();
        let bx = boxes(&states[4]);
        // R1 box (0,0,y2,y1) = (0,0,6,5); R2 box (0,0,y3,y4) = (0,0,13,1)
        assert_eq!(bx[3], CellBox::from_i64(0, 0, 6, 5));
        assert_eq!(bx[4], CellBox::from_i64(0, 0, 13, 1));
        assert_eq!(bx[5], CellBox::from_i64(0, 0, 6, 5));
        for b in &bx {
            assert_eq!(b.xmin, BigInt::zero());
            assert_eq!(b.ymin, BigInt::zero());
        }
    }

    #[test]
    fn box_is_enclosure_of_enumerated_positions() {
        // level 0: the L3 box (0,0,x4,x3) = (0,0,1,1) strictly contains the
        // enumerated box (0,0,0,1) of the single letter 1r.
        let states = endpoint_recurrence(&vec![(1, 2); 12], 12).unwrap();
        let ws_levels: Vec<WordSystem> = (0..=12).map(golden).collect();
        for k in 0..=12 {
            let bx = boxes(&states[k]);
            for (slot, which) in ALL_WORDS.iter().enumerate() {
                let eval = evaluate_word(ws_levels[k].word(*which), DEFAULT_CAP_BYTES).unwrap();
                assert!(
                    bx[slot].contains_box(&eval.bounding_box),
                    "level {k} word {which}: {} does not contain {}",
                    bx[slot],
                    eval.bounding_box
                );
            }
        }
    }

    #[test]
    fn endpoints_match_word_oracle() {
        let states = endpoint_recurrence(&vec![(1, 2); 10], 10).unwrap();
        for k in 0..=10 {
            let ws = golden(k);
            let (x, y) = endpoints_from_words(&ws, DEFAULT_CAP_BYTES).unwrap();
            for i in 0..3 {
                assert_eq!(BigUint::from(x[i] as u64), states[k].x[i], "x{i} at level {k}");
                assert_eq!(BigUint::from(y[i] as u64), states[k].y[i], "y{i} at level {k}");
            }
        }
    }

    #[test]
    fn shape_constraints_hold_on_golden_words() {
        for k in 0..=9 {
            let report = check_shape(&golden(k), DEFAULT_CAP_BYTES).unwrap();
            assert!(report.pass, "level {k}: {:?}", report.failures);
        }
    }

    #[test]
    fn self_avoiding_passes_at_level_four() {
        let ws = golden(4);
        let report = check_self_avoiding(&ws, 4, DEFAULT_CAP_BYTES).unwrap();
        assert!(report.pass, "{:?}", report.violations);
        assert!(report.words_checked >= 3);
    }

    #[test]
    fn level_one_consecutive_blocks_share_one_point() {
        // L3^(1) = 3l 3l 1r decomposes into blocks 3l | 3l | 1r; adjacent
        // blocks overlap in exactly the origin (degenerate satisfaction),
        // while the non-adjacent pair also meets, which is precisely why the
        // lemma needs the positivity threshold before it applies.
        let ws = golden(1);
        let report = check_self_avoiding(&ws, 1, DEFAULT_CAP_BYTES).unwrap();
        for v in &report.violations {
            assert!(v.block_b - v.block_a >= 2, "adjacent blocks must share one point: {v:?}");
        }
    }

    #[test]
    fn corrupted_word_system_is_flagged() {
        let mut ws = golden(5);
        // swap one reflection letter for the other orientation: the path
        // unfolds wrongly and the first two blocks of L1 collide
        assert_eq!(ws.l[0][30], Letter::new(3, Side::Left));
        ws.l[0][30] = Letter::new(2, Side::Right);
        let report = check_self_avoiding(&ws, 5, DEFAULT_CAP_BYTES).unwrap();
        assert!(!report.pass);
        let v = &report.violations[0];
        assert_eq!(v.word, "L1");
        assert!(v.shared_points > v.expected_shared);
    }

    #[test]
    fn local_patterns_examples() {
        // all six golden level-6 words pass
        let ws = golden(6);
        for which in ALL_WORDS {
            let report = check_local_patterns(ws.word(which), DEFAULT_CAP_BYTES).unwrap();
            assert!(report.pass, "{which}: {:?}", report.violations);
        }
        // a pure bouncing block passes (word-initial tail allowed)
        let report = check_local_patterns(&w("3l,3l,3l"), DEFAULT_CAP_BYTES).unwrap();
        assert!(report.pass);
        assert_eq!(report.coincidence_groups, 1);
        // a forced return to the origin fails: prefixes 0 and 3 coincide
        let report = check_local_patterns(&w("1l,3l,1l,3l"), DEFAULT_CAP_BYTES).unwrap();
        assert!(!report.pass);
        let idx = &report.violations[0].prefix_indices;
        assert!(idx.contains(&0) && idx.contains(&3));
    }

    #[test]
    fn block_decompositions() {
        use WordIndex::{L, R};
        assert_eq!(
            block_decomposition(StepParity::Odd, 2, 4, L(0)),
            vec![R(0), R(1), R(0), R(1), L(0)]
        );
        assert_eq!(
            block_decomposition(StepParity::Odd, 2, 4, L(2)),
            vec![R(2), R(2), R(2), R(2), L(2)]
        );
        assert_eq!(block_decomposition(StepParity::Odd, 2, 4, R(1)), vec![R(1)]);
        assert_eq!(
            block_decomposition(StepParity::Even, 1, 2, R(2)),
            vec![L(2), L(0), R(2)]
        );
    }

    fn golden_request(depth: usize, pattern_level: usize) -> CertifyRequest {
        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        CertifyRequest {
            a: ExactScalar::from_ratio(1, 2),
            b: ExactScalar::from_ratio(1, 2),
            slope: SlopeSource::Expansion { se, mt: MultiTwist::new(1, 2, 1, 2).unwrap() },
            depth,
            pattern_level,
            cap_bytes: DEFAULT_CAP_BYTES,
        }
    }

    #[test]
    fn golden_certificate() {
        let cert = certify_divergence(&golden_request(16, 8)).unwrap();
        assert_eq!(cert.verdict, Verdict::CertifiedToDepth, "{:?}", cert.reason);
        assert_eq!(cert.convergents, vec![(1, 2); 16]);
        assert!(cert.checks.evenness);
        assert_eq!(cert.checks.positivity_level, Some(3));
        assert_eq!(cert.checks.box_disjointness_levels, Some((4, 8)));
        assert!(cert.checks.local_pattern_ok);
        assert!(cert.checks.growth_strictly_increasing);
    }

    #[test]
    fn low_pattern_level_still_checks_letter_patterns() {
        // pattern level below the positivity threshold: the block range is
        // empty but the letter-level check still runs on the level-2 words
        let cert = certify_divergence(&golden_request(8, 2)).unwrap();
        assert_eq!(cert.verdict, Verdict::CertifiedToDepth, "{:?}", cert.reason);
        assert_eq!(cert.checks.box_disjointness_levels, None);
        assert!(cert.checks.local_pattern_ok);
    }

    #[test]
    fn odd_n_refuses() {
        let se = SlopeExpansion::new(
            SlopeCoeffs::EventuallyPeriodic { pre: vec![], period: vec![1] },
            ExactScalar::from_int(2),
            ExactScalar::from_int(2),
        )
        .unwrap();
        let req = CertifyRequest {
            a: ExactScalar::from_ratio(1, 2),
            b: ExactScalar::from_ratio(1, 2),
            slope: SlopeSource::Expansion { se, mt: MultiTwist::new(1, 1, 1, 1).unwrap() },
            depth: 8,
            pattern_level: 4,
            cap_bytes: DEFAULT_CAP_BYTES,
        };
        let cert = certify_divergence(&req).unwrap();
        assert_eq!(cert.verdict, Verdict::Refused);
        assert!(cert.reason.unwrap().contains("odd"));
    }

    #[test]
    fn exact_slope_source_certifies() {
        let slope = crate::exact::parse_scalar("sqrt(2)-1").unwrap();
        let req = CertifyRequest {
            a: ExactScalar::from_ratio(1, 2),
            b: ExactScalar::from_ratio(1, 2),
            slope: SlopeSource::Exact(slope),
            depth: 12,
            pattern_level: 6,
            cap_bytes: DEFAULT_CAP_BYTES,
        };
        let cert = certify_divergence(&req).unwrap();
        assert_eq!(cert.verdict, Verdict::CertifiedToDepth, "{:?}", cert.reason);
        assert_eq!(cert.convergents, vec![(1, 2); 12]);
    }

    #[test]
    fn rational_slope_refuses() {
        let req = CertifyRequest {
            a: ExactScalar::from_ratio(1, 2),
            b: ExactScalar::from_ratio(1, 2),
            slope: SlopeSource::Exact(ExactScalar::from_ratio(2, 3)),
            depth: 16,
            pattern_level: 4,
            cap_bytes: DEFAULT_CAP_BYTES,
        };
        let cert = certify_divergence(&req).unwrap();
        assert_eq!(cert.verdict, Verdict::Refused);
    }

    #[test]
    fn growth_sequence_in_certificate() {
        let cert = certify_divergence(&golden_request(12, 6)).unwrap();
        let gs: Vec<u64> = cert
            .checks
            .growth_sequence
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(gs[0], 1);
        for k in 3..gs.len() - 2 {
            assert!(gs[k + 2] > gs[k]);
        }
    }

    #[test]
    fn word_flip_products() {
        assert_eq!(word_flip(&w("3l,3l")).unwrap(), Flip::ID);
        assert_eq!(word_flip(&w("2r,3l")).unwrap(), Flip::TAU_VH);
    }
}
