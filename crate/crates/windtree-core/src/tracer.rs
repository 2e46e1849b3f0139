//! Event-driven billiard ray tracing in the scatterer table.
//!
//! The table has an `a x b` rectangular scatterer centered at every integer
//! point. Between the scatterers the plane carries axis-aligned edges with
//! endpoints at scatterer corners:
//!
//! * vertical segments `x = i +- a/2` for `y in [j + b/2, j + 1 - b/2]`,
//! * horizontal segments `y = j +- b/2` for `x in [i + a/2, i + 1 - a/2]`,
//!
//! cutting the complement into junctions (`(1-a) x (1-b)`, rectangle 1),
//! vertical corridors (`a x (1-b)`, rectangle 2, between vertically
//! consecutive scatterers) and horizontal corridors (`(1-a) x b`,
//! rectangle 3). Scatterer sides are the remaining quadrangulation edges,
//! glued to themselves in the quotient surface: bouncing off a scatterer cuts
//! a side exactly like crossing a corridor edge does, so reflections emit
//! letters too.
//!
//! Crossing-to-letter dictionary (frozen; see the golden tests):
//!
//! * vertical edge into a junction: `1l`; horizontal edge into a junction: `1r`
//! * vertical edge into a vertical corridor: `2l`
//! * horizontal edge into a horizontal corridor: `3r`
//! * reflection off a horizontal scatterer side (vertical corridor): `2r`
//! * reflection off a vertical scatterer side (horizontal corridor): `3l`
//!
//! Velocities are `kappa(1, s)` with `s` the base slope and `kappa` in the
//! Klein four group; a vertical side applies `tau_v`, a horizontal side
//! `tau_h`. All event locations are decided exactly.

use crate::cocycle::{group_mul, letter_value, Flip, GroupElement};
use crate::exact::{ExactError, ExactScalar};
use crate::iet::{Letter, Side};
use crate::words::WordSystem;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug)]
pub enum TraceError {
    BadParams(String),
    StartInsideScatterer,
    /// The ray met a scatterer corner exactly; the trajectory is singular.
    CornerHit { x: String, y: String },
    /// Interval inputs could not order two candidate events.
    Precision(ExactError),
    /// Emitted letters leave the language of the substitution words.
    LabelingMismatch { at: usize, detail: String },
    Exact(ExactError),
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::BadParams(m) => write!(f, "bad parameters: {m}"),
            TraceError::StartInsideScatterer => write!(f, "start point inside a scatterer"),
            TraceError::CornerHit { x, y } => write!(f, "CORNER_HIT at ({x}, {y})"),
            TraceError::Precision(e) => write!(f, "PRECISION: {e}"),
            TraceError::LabelingMismatch { at, detail } => {
                write!(f, "LABELING_MISMATCH at letter {at}: {detail}")
            }
            TraceError::Exact(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TraceError {}

impl From<ExactError> for TraceError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Undecided { .. } => TraceError::Precision(e),
            other => TraceError::Exact(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableParams {
    pub a: ExactScalar,
    pub b: ExactScalar,
}

impl TableParams {
    pub fn new(a: ExactScalar, b: ExactScalar) -> Result<Self, TraceError> {
        let zero = ExactScalar::zero();
        let one = ExactScalar::one();
        for (name, v) in [("a", &a), ("b", &b)] {
            let in_range = v.compare(&zero).map_err(TraceError::from)? == Ordering::Greater
                && v.compare(&one).map_err(TraceError::from)? == Ordering::Less;
            if !in_range {
                return Err(TraceError::BadParams(format!("{name} must lie in (0,1)")));
            }
        }
        Ok(TableParams { a, b })
    }

    fn half_a(&self) -> Result<ExactScalar, TraceError> {
        Ok(self.a.div(&ExactScalar::from_int(2))?)
    }

    fn half_b(&self) -> Result<ExactScalar, TraceError> {
        Ok(self.b.div(&ExactScalar::from_int(2))?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RectType {
    Junction,
    VCorridor,
    HCorridor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Scatterer-side hit; `vertical_side` tells which orientation reflected.
    Reflection { vertical_side: bool },
    /// Corridor/junction edge crossed.
    Crossing,
}

#[derive(Clone, Debug)]
pub struct BilliardState {
    pub pos: (ExactScalar, ExactScalar),
    pub kappa: Flip,
    pub base_slope: ExactScalar,
}

#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub n: usize,
    pub kind: EventKind,
    pub rect: RectType,
    pub cell: (i64, i64),
    pub letter: Letter,
    pub kappa_after: Flip,
    pub pos: (ExactScalar, ExactScalar),
    /// Squared distance from the trajectory start, exact.
    pub displacement_sq: ExactScalar,
}

#[derive(Clone, Debug)]
pub struct BilliardTrajectory {
    pub table: TableParams,
    pub start: (ExactScalar, ExactScalar),
    pub base_slope: ExactScalar,
    pub events: Vec<TraceEvent>,
    pub corner_hit: Option<(String, String)>,
    /// Axis-parallel ray missing every scatterer band: no event ever occurs.
    pub free_flight: bool,
}

impl BilliardTrajectory {
    pub fn letters(&self) -> Vec<Letter> {
        self.events.iter().map(|e| e.letter).collect()
    }
}

/// Outcome of advancing to the next event.
pub enum NextEvent {
    Event { event: TraceEvent, state: BilliardState },
    /// Axis-parallel ray that can never meet a scatterer or an edge.
    FreeFlight,
}

fn scalar_int(v: BigInt) -> ExactScalar {
    ExactScalar::from_rational(crate::exact::Rational::from(v))
}

fn is_integer(v: &ExactScalar) -> Result<Option<BigInt>, TraceError> {
    let fl = v.floor()?;
    let diff = v.sub(&scalar_int(fl.clone()))?;
    if diff.sign()? == 0 {
        Ok(Some(fl))
    } else {
        Ok(None)
    }
}

fn nearest_integer(v: &ExactScalar) -> Result<BigInt, TraceError> {
    Ok(v.add(&ExactScalar::from_ratio(1, 2))?.floor()?)
}

fn to_i64(v: &BigInt) -> Result<i64, TraceError> {
    v.to_i64().ok_or_else(|| TraceError::BadParams("cell index out of i64 range".into()))
}

/// Nearest half-grid line `i +- half` strictly ahead of `coord`.
fn next_line(
    coord: &ExactScalar,
    forward: bool,
    half: &ExactScalar,
) -> Result<ExactScalar, TraceError> {
    let f = coord.floor()?;
    let mut best: Option<ExactScalar> = None;
    for di in -2i64..=2 {
        let base = scalar_int(f.clone() + BigInt::from(di));
        for line in [base.sub(half)?, base.add(half)?] {
            let ahead = match line.compare(coord)? {
                Ordering::Greater => forward,
                Ordering::Less => !forward,
                Ordering::Equal => false,
            };
            if !ahead {
                continue;
            }
            best = Some(match best {
                None => line,
                Some(b) => {
                    let closer = if forward {
                        line.compare(&b)? == Ordering::Less
                    } else {
                        line.compare(&b)? == Ordering::Greater
                    };
                    if closer {
                        line
                    } else {
                        b
                    }
                }
            });
        }
    }
    best.ok_or_else(|| TraceError::BadParams("no grid line ahead".into()))
}

/// Velocity data of a state: x-direction flag and signed y-component of
/// `kappa(1, s)`.
fn velocity(state: &BilliardState) -> (bool, ExactScalar) {
    let forward_x = !state.kappa.v;
    let dy = if state.kappa.h { state.base_slope.neg() } else { state.base_slope.clone() };
    (forward_x, dy)
}

/// Is `p` inside (or on the boundary of) the scatterer nearest to it?
fn start_blocked(tp: &TableParams, pos: &(ExactScalar, ExactScalar)) -> Result<bool, TraceError> {
    let ha = tp.half_a()?;
    let hb = tp.half_b()?;
    let i = nearest_integer(&pos.0)?;
    let j = nearest_integer(&pos.1)?;
    let dx = pos.0.sub(&scalar_int(i))?.abs()?;
    let dy = pos.1.sub(&scalar_int(j))?.abs()?;
    Ok(dx.compare(&ha)? != Ordering::Greater && dy.compare(&hb)? != Ordering::Greater)
}

/// Advance one event. Exact throughout; interval inputs surface `Precision`
/// errors instead of silently misordering candidate events.
pub fn next_event(tp: &TableParams, state: &BilliardState) -> Result<NextEvent, TraceError> {
    let ha = tp.half_a()?;
    let hb = tp.half_b()?;
    let (forward_x, dy) = velocity(state);
    let slope_sign = dy.sign()?;

    // Horizontal ray: only vertical scatterer sides can be met, and only when
    // the height stays inside a scatterer band.
    if slope_sign == 0 {
        let j = nearest_integer(&state.pos.1)?;
        let dist = state.pos.1.sub(&scalar_int(j.clone()))?.abs()?;
        match dist.compare(&hb)? {
            Ordering::Less => {}
            Ordering::Equal => {
                // grazing along a scatterer side: singular
                return Err(TraceError::CornerHit {
                    x: state.pos.0.to_string(),
                    y: state.pos.1.to_string(),
                });
            }
            Ordering::Greater => return Ok(NextEvent::FreeFlight),
        }
        let x_line = next_line(&state.pos.0, forward_x, &ha)?;
        let hit = (x_line, state.pos.1.clone());
        return reflection_event(tp, state, hit, true, j);
    }

    let (x_line, t_x) = {
        let line = next_line(&state.pos.0, forward_x, &ha)?;
        let dt = line.sub(&state.pos.0)?.abs()?;
        (line, dt)
    };
    let (y_line, t_y) = {
        let line = next_line(&state.pos.1, slope_sign > 0, &hb)?;
        // time normalized by |dx| = 1: dt = |y_line - y| / s
        let dt = line.sub(&state.pos.1)?.abs()?.div(&state.base_slope)?;
        (line, dt)
    };

    match t_x.compare(&t_y)? {
        Ordering::Equal => {
            // simultaneous half-grid crossings meet at a scatterer corner
            Err(TraceError::CornerHit { x: x_line.to_string(), y: y_line.to_string() })
        }
        Ordering::Less => {
            let y_star = advance_y(state, &t_x, slope_sign)?;
            let j = nearest_integer(&y_star)?;
            let dist = y_star.sub(&scalar_int(j.clone()))?.abs()?;
            match dist.compare(&hb)? {
                Ordering::Equal => {
                    Err(TraceError::CornerHit { x: x_line.to_string(), y: y_star.to_string() })
                }
                Ordering::Less => reflection_event(tp, state, (x_line, y_star), true, j),
                Ordering::Greater => crossing_vertical_edge(tp, state, (x_line, y_star)),
            }
        }
        Ordering::Greater => {
            let x_star = advance_x(state, &t_y, forward_x)?;
            let i = nearest_integer(&x_star)?;
            let dist = x_star.sub(&scalar_int(i.clone()))?.abs()?;
            match dist.compare(&ha)? {
                Ordering::Equal => {
                    Err(TraceError::CornerHit { x: x_star.to_string(), y: y_line.to_string() })
                }
                Ordering::Less => reflection_event(tp, state, (x_star, y_line), false, i),
                Ordering::Greater => crossing_horizontal_edge(tp, state, (x_star, y_line)),
            }
        }
    }
}

fn advance_y(
    state: &BilliardState,
    dt: &ExactScalar,
    slope_sign: i8,
) -> Result<ExactScalar, TraceError> {
    let step = dt.mul(&state.base_slope)?;
    Ok(if slope_sign > 0 { state.pos.1.add(&step)? } else { state.pos.1.sub(&step)? })
}

fn advance_x(
    state: &BilliardState,
    dt: &ExactScalar,
    forward_x: bool,
) -> Result<ExactScalar, TraceError> {
    Ok(if forward_x { state.pos.0.add(dt)? } else { state.pos.0.sub(dt)? })
}

fn reflection_event(
    tp: &TableParams,
    state: &BilliardState,
    hit: (ExactScalar, ExactScalar),
    vertical_side: bool,
    band_index: BigInt,
) -> Result<NextEvent, TraceError> {
    let (forward_x, dy) = velocity(state);
    let (letter, rect, cell, new_kappa) = if vertical_side {
        // vertical side of scatterer (i, j): the ray is in the horizontal
        // corridor left or right of that scatterer
        let ha = tp.half_a()?;
        let i = match is_integer(&hit.0.add(&ha)?)? {
            Some(i) => i, // x = i - a/2: left side, approached moving right
            None => is_integer(&hit.0.sub(&ha)?)?.ok_or_else(|| {
                TraceError::BadParams("reflection point off the half-grid".into())
            })?,
        };
        let corridor_i = if forward_x { i.clone() - 1 } else { i.clone() };
        (
            Letter::new(3, Side::Left),
            RectType::HCorridor,
            (to_i64(&corridor_i)?, to_i64(&band_index)?),
            state.kappa.mul(Flip::TAU_V),
        )
    } else {
        let hb = tp.half_b()?;
        let j = match is_integer(&hit.1.add(&hb)?)? {
            Some(j) => j, // y = j - b/2: bottom side, approached moving up
            None => is_integer(&hit.1.sub(&hb)?)?.ok_or_else(|| {
                TraceError::BadParams("reflection point off the half-grid".into())
            })?,
        };
        let upward = dy.sign()? > 0;
        let corridor_j = if upward { j.clone() - 1 } else { j.clone() };
        (
            Letter::new(2, Side::Right),
            RectType::VCorridor,
            (to_i64(&band_index)?, to_i64(&corridor_j)?),
            state.kappa.mul(Flip::TAU_H),
        )
    };
    let new_state =
        BilliardState { pos: hit.clone(), kappa: new_kappa, base_slope: state.base_slope.clone() };
    let event = TraceEvent {
        n: 0,
        kind: EventKind::Reflection { vertical_side },
        rect,
        cell,
        letter,
        kappa_after: new_kappa,
        pos: hit,
        displacement_sq: ExactScalar::zero(),
    };
    Ok(NextEvent::Event { event, state: new_state })
}

fn crossing_vertical_edge(
    tp: &TableParams,
    state: &BilliardState,
    hit: (ExactScalar, ExactScalar),
) -> Result<NextEvent, TraceError> {
    let ha = tp.half_a()?;
    let hb = tp.half_b()?;
    let (forward_x, _) = velocity(state);
    // row of the corridor band: j with y in (j + b/2, j + 1 - b/2)
    let j_row = to_i64(&hit.1.sub(&hb)?.floor()?)?;
    // x = i - a/2 leads into vertical corridor i moving right and into
    // junction (i-1, .) moving left; x = i + a/2 the other way around.
    let (letter, rect, cell) = match is_integer(&hit.0.add(&ha)?)? {
        Some(i) => {
            let i = to_i64(&i)?;
            if forward_x {
                (Letter::new(2, Side::Left), RectType::VCorridor, (i, j_row))
            } else {
                (Letter::new(1, Side::Left), RectType::Junction, (i - 1, j_row))
            }
        }
        None => {
            let i = to_i64(&is_integer(&hit.0.sub(&ha)?)?.ok_or_else(|| {
                TraceError::BadParams("crossing point off the half-grid".into())
            })?)?;
            if forward_x {
                (Letter::new(1, Side::Left), RectType::Junction, (i, j_row))
            } else {
                (Letter::new(2, Side::Left), RectType::VCorridor, (i, j_row))
            }
        }
    };
    let new_state = BilliardState {
        pos: hit.clone(),
        kappa: state.kappa,
        base_slope: state.base_slope.clone(),
    };
    let event = TraceEvent {
        n: 0,
        kind: EventKind::Crossing,
        rect,
        cell,
        letter,
        kappa_after: state.kappa,
        pos: hit,
        displacement_sq: ExactScalar::zero(),
    };
    Ok(NextEvent::Event { event, state: new_state })
}

fn crossing_horizontal_edge(
    tp: &TableParams,
    state: &BilliardState,
    hit: (ExactScalar, ExactScalar),
) -> Result<NextEvent, TraceError> {
    let ha = tp.half_a()?;
    let hb = tp.half_b()?;
    let (_, dy) = velocity(state);
    let upward = dy.sign()? > 0;
    let i_col = to_i64(&hit.0.sub(&ha)?.floor()?)?;
    let (letter, rect, cell) = match is_integer(&hit.1.add(&hb)?)? {
        Some(j) => {
            // y = j - b/2: bottom edge of horizontal corridor j
            let j = to_i64(&j)?;
            if upward {
                (Letter::new(3, Side::Right), RectType::HCorridor, (i_col, j))
            } else {
                (Letter::new(1, Side::Right), RectType::Junction, (i_col, j - 1))
            }
        }
        None => {
            let j = to_i64(&is_integer(&hit.1.sub(&hb)?)?.ok_or_else(|| {
                TraceError::BadParams("crossing point off the half-grid".into())
            })?)?;
            // y = j + b/2: top edge of horizontal corridor j
            if upward {
                (Letter::new(1, Side::Right), RectType::Junction, (i_col, j))
            } else {
                (Letter::new(3, Side::Right), RectType::HCorridor, (i_col, j))
            }
        }
    };
    let new_state = BilliardState {
        pos: hit.clone(),
        kappa: state.kappa,
        base_slope: state.base_slope.clone(),
    };
    let event = TraceEvent {
        n: 0,
        kind: EventKind::Crossing,
        rect,
        cell,
        letter,
        kappa_after: state.kappa,
        pos: hit,
        displacement_sq: ExactScalar::zero(),
    };
    Ok(NextEvent::Event { event, state: new_state })
}

/// Trace forward until `max_crossings` quadrangulation sides have been cut
/// (reflections included: scatterer sides are self-glued edges), a corner is
/// hit, or the ray is recognized as free.
pub fn trace(
    tp: &TableParams,
    start: (ExactScalar, ExactScalar),
    slope: ExactScalar,
    max_crossings: usize,
) -> Result<BilliardTrajectory, TraceError> {
    if slope.sign()? < 0 {
        return Err(TraceError::BadParams("slope must be non-negative".into()));
    }
    if start_blocked(tp, &start)? {
        return Err(TraceError::StartInsideScatterer);
    }
    let mut traj = BilliardTrajectory {
        table: tp.clone(),
        start: start.clone(),
        base_slope: slope.clone(),
        events: Vec::with_capacity(max_crossings),
        corner_hit: None,
        free_flight: false,
    };
    let mut state = BilliardState { pos: start.clone(), kappa: Flip::ID, base_slope: slope };
    for n in 0..max_crossings {
        match next_event(tp, &state) {
            Ok(NextEvent::Event { mut event, state: next }) => {
                event.n = n;
                let dx = event.pos.0.sub(&start.0)?;
                let dy = event.pos.1.sub(&start.1)?;
                event.displacement_sq = dx.mul(&dx)?.add(&dy.mul(&dy)?)?;
                traj.events.push(event);
                state = next;
            }
            Ok(NextEvent::FreeFlight) => {
                traj.free_flight = true;
                break;
            }
            Err(TraceError::CornerHit { x, y }) => {
                traj.corner_hit = Some((x, y));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// Letter transitions allowed by the exchange combinatorics: from interval
/// `i` the next letter is `(pi_l(i), r)` or `(pi_r(i), l)`.
pub fn allowed_successors(letter: Letter) -> [Letter; 2] {
    match letter.index {
        1 => [Letter::new(3, Side::Right), Letter::new(2, Side::Left)],
        2 => [Letter::new(2, Side::Right), Letter::new(1, Side::Left)],
        _ => [Letter::new(1, Side::Right), Letter::new(3, Side::Left)],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub crossings: usize,
    /// Largest observed `| d - ||f^(n)|| |`, decimal rendering.
    pub max_deviation: f64,
    /// Exact verdict of the sqrt(2) bound at every crossing.
    pub bound_holds: bool,
    /// Whether a word system was supplied for the factor check.
    pub language_checked: bool,
}

fn letter_code(l: Letter) -> u8 {
    let base = match l.index {
        1 => 0,
        2 => 2,
        _ => 4,
    };
    b'a' + base + if l.side == Side::Right { 1 } else { 0 }
}

/// `| sqrt(s) - sqrt(n) | <= sqrt(2)` decided exactly, one squaring per side.
fn sqrt_bound_holds(s: &ExactScalar, n: u64) -> Result<bool, TraceError> {
    let n_scalar = ExactScalar::from_int(n as i64);
    let two = ExactScalar::from_int(2);
    // sqrt(s) <= sqrt(n) + sqrt(2)  <=>  s - n - 2 <= 2 sqrt(2 n)
    let alpha = s.sub(&n_scalar)?.sub(&two)?;
    if alpha.sign()? > 0 {
        let lhs = alpha.mul(&alpha)?;
        let rhs = ExactScalar::from_int((8 * n) as i64);
        if lhs.compare(&rhs)? == Ordering::Greater {
            return Ok(false);
        }
    }
    // sqrt(n) <= sqrt(s) + sqrt(2)  <=>  n - 2 - s <= 2 sqrt(2 s)
    let beta = n_scalar.sub(&two)?.sub(s)?;
    if beta.sign()? > 0 {
        let lhs = beta.mul(&beta)?;
        let rhs = ExactScalar::from_int(8).mul(s)?;
        if lhs.compare(&rhs)? == Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluate the cocycle along the emitted letters and check the
/// discretization bound `| d(x, phi_t(x)) - ||f^(n)(w)||_2 | <= sqrt(2)` at
/// every crossing.
///
/// With `language` supplied the emitted word must occur as a factor of a
/// high-level word of the same system; without it only the letter-transition
/// rules are enforced.
pub fn compare_with_cocycle(
    traj: &BilliardTrajectory,
    language: Option<&WordSystem>,
) -> Result<CompareReport, TraceError> {
    let letters = traj.letters();
    for (idx, pair) in letters.windows(2).enumerate() {
        let allowed = allowed_successors(pair[0]);
        if !allowed.contains(&pair[1]) {
            return Err(TraceError::LabelingMismatch {
                at: idx + 1,
                detail: format!("letter {} cannot follow {}", pair[1], pair[0]),
            });
        }
    }
    let language_checked = if let Some(ws) = language {
        let haystack: Vec<u8> = ws.l[0].iter().map(|&l| letter_code(l)).collect();
        let needle: Vec<u8> = letters.iter().map(|&l| letter_code(l)).collect();
        let haystack = String::from_utf8(haystack).expect("ascii");
        let needle = String::from_utf8(needle).expect("ascii");
        if !needle.is_empty() && !haystack.contains(&needle) {
            return Err(TraceError::LabelingMismatch {
                at: 0,
                detail: format!(
                    "emitted word of length {} is not a factor of the level-{} language sample",
                    needle.len(),
                    ws.level
                ),
            });
        }
        true
    } else {
        false
    };

    let mut acc = GroupElement::IDENTITY;
    let mut max_dev = 0.0f64;
    let mut bound_holds = true;
    for event in &traj.events {
        let value = letter_value(event.letter)
            .map_err(|e| TraceError::LabelingMismatch { at: event.n, detail: e.to_string() })?;
        acc = group_mul(acc, value);
        let norm_sq = acc.t.0.unsigned_abs().pow(2) + acc.t.1.unsigned_abs().pow(2);
        if !sqrt_bound_holds(&event.displacement_sq, norm_sq)? {
            bound_holds = false;
        }
        let d = event.displacement_sq.to_f64().max(0.0).sqrt();
        let f = (norm_sq as f64).sqrt();
        max_dev = max_dev.max((d - f).abs());
    }
    Ok(CompareReport {
        crossings: traj.events.len(),
        max_deviation: max_dev,
        bound_holds,
        language_checked,
    })
}
