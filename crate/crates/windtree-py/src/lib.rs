//! Python surface of the wind-tree toolkit.
//!
//! Exposes the exact scalar kernel, the renormalization map and its
//! convergents, Veech parameters and slope expansions, the substitution
//! words, the cocycle machinery with the divergence certifier, and the
//! billiard tracer. Reports and certificates cross the boundary as JSON
//! strings; scalars as `Exact` objects.

use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use pyo3::pyclass::CompareOp;
use pyo3::types::PyModule;

use windtree_core::cocycle;
use windtree_core::exact::{parse_scalar, ExactError, ExactScalar};
use windtree_core::iet::{self, word_from_string, word_to_string};
use windtree_core::renorm;
use windtree_core::tracer;
use windtree_core::veech;
use windtree_core::words;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exact_err(e: ExactError) -> PyErr {
    match e {
        ExactError::DivisionByZero => PyZeroDivisionError::new_err("division by zero"),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Exact scalar: rational, quadratic irrational or certified enclosure.
#[pyclass(name = "Exact", frozen, from_py_object)]
#[derive(Clone)]
struct PyExact {
    inner: ExactScalar,
}

impl From<ExactScalar> for PyExact {
    fn from(inner: ExactScalar) -> Self {
        PyExact { inner }
    }
}

#[pymethods]
impl PyExact {
    /// Parse "p/q", a decimal string, or "x+y*sqrt(D)".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(parse_scalar(text).map_err(exact_err)?.into())
    }

    #[staticmethod]
    fn from_int(n: i64) -> Self {
        ExactScalar::from_int(n).into()
    }

    #[staticmethod]
    fn from_ratio(num: i64, den: i64) -> PyResult<Self> {
        if den == 0 {
            return Err(PyZeroDivisionError::new_err("zero denominator"));
        }
        Ok(ExactScalar::from_ratio(num, den).into())
    }

    /// sqrt of a non-negative integer, collapsing to a rational when square.
    #[staticmethod]
    fn sqrt(n: u64) -> PyResult<Self> {
        Ok(ExactScalar::sqrt_rational(&windtree_core::Rational::from(
            windtree_core::BigInt::from(n),
        ))
        .map_err(exact_err)?
        .into())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Exact('{}')", self.inner)
    }

    fn __float__(&self) -> f64 {
        self.inner.to_f64()
    }

    fn __add__(&self, other: &PyExact) -> PyResult<PyExact> {
        Ok(self.inner.add(&other.inner).map_err(exact_err)?.into())
    }

    fn __sub__(&self, other: &PyExact) -> PyResult<PyExact> {
        Ok(self.inner.sub(&other.inner).map_err(exact_err)?.into())
    }

    fn __mul__(&self, other: &PyExact) -> PyResult<PyExact> {
        Ok(self.inner.mul(&other.inner).map_err(exact_err)?.into())
    }

    fn __truediv__(&self, other: &PyExact) -> PyResult<PyExact> {
        Ok(self.inner.div(&other.inner).map_err(exact_err)?.into())
    }

    fn __neg__(&self) -> PyExact {
        self.inner.neg().into()
    }

    fn __richcmp__(&self, other: &PyExact, op: CompareOp) -> PyResult<bool> {
        let ord = self.inner.compare(&other.inner).map_err(exact_err)?;
        Ok(match op {
            CompareOp::Lt => ord.is_lt(),
            CompareOp::Le => ord.is_le(),
            CompareOp::Eq => ord.is_eq(),
            CompareOp::Ne => ord.is_ne(),
            CompareOp::Gt => ord.is_gt(),
            CompareOp::Ge => ord.is_ge(),
        })
    }

    fn sign(&self) -> PyResult<i8> {
        self.inner.sign().map_err(exact_err)
    }

    fn floor(&self) -> PyResult<windtree_core::BigInt> {
        self.inner.floor().map_err(exact_err)
    }

    /// floor(self / other) for self >= 0, other > 0.
    fn floor_ratio(&self, other: &PyExact) -> PyResult<windtree_core::BigInt> {
        self.inner.floor_ratio(&other.inner).map_err(exact_err)
    }

    /// JSON form of the scalar, matching the toolkit's schema.
    fn json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_err)
    }
}

fn quad_from_list(values: Vec<PyExact>) -> PyResult<renorm::LengthQuadruple> {
    if values.len() != 4 {
        return Err(PyValueError::new_err("expected exactly four scalars"));
    }
    renorm::LengthQuadruple::new(
        values[0].inner.clone(),
        values[1].inner.clone(),
        values[2].inner.clone(),
        values[3].inner.clone(),
    )
    .map_err(value_err)
}

/// One renormalization step: returns (image quadruple, m, n).
#[pyfunction]
fn f_step(z: Vec<PyExact>) -> PyResult<(Vec<PyExact>, u64, u64)> {
    let quad = quad_from_list(z)?;
    let (image, m, n) = renorm::f_step(&quad).map_err(value_err)?;
    Ok((
        vec![image.x1.into(), image.x2.into(), image.y1.into(), image.y2.into()],
        m,
        n,
    ))
}

/// Two-cycle condition x1+x2 > y1 > x2 and y1+y2 > x1 > y2.
#[pyfunction]
fn is_two_cycle(z: Vec<PyExact>) -> PyResult<bool> {
    renorm::is_two_cycle(&quad_from_list(z)?).map_err(value_err)
}

/// Convergents of the renormalization: (entries, status).
#[pyfunction]
fn convergents(z: Vec<PyExact>, max_steps: usize) -> PyResult<(Vec<(u64, u64)>, String)> {
    let seq = renorm::convergents(&quad_from_list(z)?, max_steps).map_err(value_err)?;
    let status = match seq.status {
        renorm::SequenceStatus::Truncated => "truncated",
        renorm::SequenceStatus::TwoCycle => "two_cycle",
        renorm::SequenceStatus::Degenerate => "degenerate",
    };
    Ok((seq.entries, status.to_string()))
}

/// The quadruple of table parameters (a, b) and a slope.
#[pyfunction]
fn quadruple_from_parameters(a: &PyExact, b: &PyExact, slope: &PyExact) -> PyResult<Vec<PyExact>> {
    let z = renorm::LengthQuadruple::from_parameters(&a.inner, &b.inner, &slope.inner)
        .map_err(value_err)?;
    Ok(vec![z.x1.into(), z.x2.into(), z.y1.into(), z.y2.into()])
}

#[pyfunction]
fn check_admissible(seq: Vec<(u64, u64)>) -> bool {
    renorm::check_admissible(&seq)
}

/// Rational quadruple realizing an admissible prefix.
#[pyfunction]
fn realize_sequence(seq: Vec<(u64, u64)>) -> PyResult<Vec<PyExact>> {
    let z = renorm::realize_sequence(&seq).map_err(value_err)?;
    Ok(vec![z.x1.into(), z.x2.into(), z.y1.into(), z.y2.into()])
}

/// Veech parameters from a multi-twist tuple:
/// dict with a, b, s_h, s_v (Exact) and D.
#[pyfunction]
fn params_from_multitwist(
    py: Python<'_>,
    mh: u64,
    nh: u64,
    mv: u64,
    nv: u64,
) -> PyResult<Py<pyo3::types::PyAny>> {
    let mt = veech::MultiTwist::new(mh, nh, mv, nv).map_err(value_err)?;
    let p = veech::params_from_multitwist(&mt).map_err(value_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("a", PyExact::from(p.a))?;
    dict.set_item("b", PyExact::from(p.b))?;
    dict.set_item("s_h", PyExact::from(p.s_h))?;
    dict.set_item("s_v", PyExact::from(p.s_v))?;
    dict.set_item("D", p.d)?;
    Ok(dict.into_any().unbind())
}

/// The multi-twist tuple of (a, b), or None when the surface is not Veech.
#[pyfunction]
fn multitwist_from_ab(a: &PyExact, b: &PyExact) -> PyResult<Option<(u64, u64, u64, u64)>> {
    Ok(veech::multitwist_from_ab(&a.inner, &b.inner)
        .map_err(value_err)?
        .map(|mt| (mt.mh, mt.nh, mt.mv, mt.nv)))
}

fn build_expansion(
    coeffs: Vec<u64>,
    periodic: bool,
    pre: Vec<u64>,
    s_h: &PyExact,
    s_v: &PyExact,
) -> PyResult<veech::SlopeExpansion> {
    let coeffs = if periodic {
        veech::SlopeCoeffs::EventuallyPeriodic { pre, period: coeffs }
    } else {
        if !pre.is_empty() {
            return Err(PyValueError::new_err("pre-period needs periodic=True"));
        }
        veech::SlopeCoeffs::Finite(coeffs)
    };
    veech::SlopeExpansion::new(coeffs, s_h.inner.clone(), s_v.inner.clone()).map_err(value_err)
}

/// Slope of a width expansion; exact=True solves the periodic tail in a
/// quadratic field.
#[pyfunction]
#[pyo3(signature = (coeffs, s_h, s_v, periodic=true, pre=vec![], exact=true))]
fn slope_from_expansion(
    coeffs: Vec<u64>,
    s_h: &PyExact,
    s_v: &PyExact,
    periodic: bool,
    pre: Vec<u64>,
    exact: bool,
) -> PyResult<PyExact> {
    let se = build_expansion(coeffs, periodic, pre, s_h, s_v)?;
    Ok(veech::slope_from_expansion(&se, exact).map_err(value_err)?.into())
}

/// One step of the modified continued-fraction map:
/// (next value, branch "l"/"r", multiplicity).
#[pyfunction]
fn psi_step(x: &PyExact, s_h: &PyExact, s_v: &PyExact) -> PyResult<(PyExact, String, u64)> {
    let (next, branch, mult) = veech::psi_step(&x.inner, &s_h.inner, &s_v.inner).map_err(value_err)?;
    let branch = match branch {
        veech::PsiBranch::Left => "l",
        veech::PsiBranch::Right => "r",
    };
    Ok((next.into(), branch.to_string(), mult))
}

/// Predicted convergents (a_k m_h, a_k n_h) / (a_k m_v, a_k n_v).
#[pyfunction]
#[pyo3(signature = (coeffs, mh, nh, mv, nv, depth, periodic=true, pre=vec![]))]
#[allow(clippy::too_many_arguments)]
fn convergents_from_expansion(
    coeffs: Vec<u64>,
    mh: u64,
    nh: u64,
    mv: u64,
    nv: u64,
    depth: usize,
    periodic: bool,
    pre: Vec<u64>,
) -> PyResult<Vec<(u64, u64)>> {
    let mt = veech::MultiTwist::new(mh, nh, mv, nv).map_err(value_err)?;
    let two = PyExact::from(ExactScalar::from_int(2));
    // widths are irrelevant to the digit formula; use a placeholder pair
    let se = build_expansion(coeffs, periodic, pre, &two, &two)?;
    veech::convergents_from_expansion(&se, &mt, depth).map_err(value_err)
}

/// The six substitution words at one level.
#[pyclass(name = "WordSystem")]
struct PyWordSystem {
    inner: words::WordSystem,
}

#[pymethods]
impl PyWordSystem {
    /// Level-0 system ((3r, 2r, 1r), (2l, 1l, 3l)).
    #[new]
    fn new() -> Self {
        PyWordSystem { inner: words::initial_words() }
    }

    /// Fold the substitution over leading convergents.
    #[staticmethod]
    #[pyo3(signature = (convergents, level, cap_bytes=1 << 30))]
    fn expand(convergents: Vec<(u64, u64)>, level: usize, cap_bytes: u64) -> PyResult<Self> {
        Ok(PyWordSystem {
            inner: words::expand(&convergents, level, cap_bytes).map_err(value_err)?,
        })
    }

    fn apply_step(&self, m: u64, n: u64) -> PyResult<Self> {
        Ok(PyWordSystem { inner: words::apply_step(&self.inner, m, n).map_err(value_err)? })
    }

    #[getter]
    fn level(&self) -> usize {
        self.inner.level
    }

    /// Word text by name "L1".."L3", "R1".."R3".
    fn word(&self, name: &str) -> PyResult<String> {
        let which = parse_word_index(name)?;
        Ok(word_to_string(self.inner.word(which)))
    }

    fn lengths(&self) -> ([usize; 3], [usize; 3]) {
        self.inner.lengths()
    }

    fn __repr__(&self) -> String {
        let (l, r) = self.inner.lengths();
        format!("WordSystem(level={}, |L|={:?}, |R|={:?})", self.inner.level, l, r)
    }
}

fn parse_word_index(name: &str) -> PyResult<words::WordIndex> {
    let err = || PyValueError::new_err("word names are L1..L3 and R1..R3");
    let mut chars = name.chars();
    let family = chars.next().ok_or_else(err)?;
    let idx: usize = chars.as_str().parse().map_err(|_| err())?;
    if !(1..=3).contains(&idx) {
        return Err(err());
    }
    match family {
        'L' | 'l' => Ok(words::WordIndex::L(idx - 1)),
        'R' | 'r' => Ok(words::WordIndex::R(idx - 1)),
        _ => Err(err()),
    }
}

/// The three-interval exchange of table parameters, as its JSON schema.
#[pyfunction]
fn iet_config(a: &PyExact, b: &PyExact, slope: &PyExact) -> PyResult<String> {
    let cfg = iet::iet_from_parameters(&a.inner, &b.inner, &slope.inner).map_err(value_err)?;
    serde_json::to_string(&cfg.to_repr()).map_err(value_err)
}

/// Iterate the exchange from a point (1-based interval, signed offset),
/// returning the emitted letter word.
#[pyfunction]
fn iet_orbit(
    a: &PyExact,
    b: &PyExact,
    slope: &PyExact,
    interval: usize,
    offset: &PyExact,
    steps: usize,
) -> PyResult<String> {
    let cfg = iet::iet_from_parameters(&a.inner, &b.inner, &slope.inner).map_err(value_err)?;
    let mut point = (interval, offset.inner.clone());
    let mut letters = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (next, letter) = iet::iet_step(&cfg, &point).map_err(value_err)?;
        letters.push(letter);
        point = next;
    }
    Ok(word_to_string(&letters))
}

/// Cocycle value of a letter like "1l": ((tx, ty), (flip_v, flip_h)).
#[pyfunction]
fn letter_value(letter: &str) -> PyResult<((i64, i64), (bool, bool))> {
    let parsed = word_from_string(letter).map_err(value_err)?;
    if parsed.len() != 1 {
        return Err(PyValueError::new_err("expected a single letter"));
    }
    let g = cocycle::letter_value(parsed[0]).map_err(value_err)?;
    Ok((g.t, (g.flip.v, g.flip.h)))
}

/// Evaluate the cocycle on a word "2l,1l,3r": dict with value, flip, box.
#[pyfunction]
#[pyo3(signature = (word, cap_bytes=1 << 30))]
fn evaluate_word(py: Python<'_>, word: &str, cap_bytes: u64) -> PyResult<Py<pyo3::types::PyAny>> {
    let parsed = word_from_string(word).map_err(value_err)?;
    let eval = cocycle::evaluate_word(&parsed, cap_bytes).map_err(value_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("translation", eval.value.t)?;
    dict.set_item("flip", (eval.value.flip.v, eval.value.flip.h))?;
    dict.set_item(
        "box",
        (
            eval.bounding_box.xmin.to_string(),
            eval.bounding_box.ymin.to_string(),
            eval.bounding_box.xmax.to_string(),
            eval.bounding_box.ymax.to_string(),
        ),
    )?;
    dict.set_item("positions", eval.prefix_positions)?;
    Ok(dict.into_any().unbind())
}

/// Endpoint recurrence states as a list of dicts (requires even n_k).
#[pyfunction]
fn endpoint_recurrence(py: Python<'_>, convergents: Vec<(u64, u64)>, depth: usize) -> PyResult<Py<pyo3::types::PyAny>> {
    let states = cocycle::endpoint_recurrence(&convergents, depth).map_err(value_err)?;
    let list = pyo3::types::PyList::empty(py);
    for s in states {
        let dict = pyo3::types::PyDict::new(py);
        dict.set_item("k", s.k)?;
        dict.set_item("X", s.x.clone().map(|v| v.to_string()))?;
        dict.set_item("Y", s.y.clone().map(|v| v.to_string()))?;
        dict.set_item("x4", s.x4.to_string())?;
        dict.set_item("y4", s.y4.to_string())?;
        list.append(dict)?;
    }
    Ok(list.into_any().unbind())
}

/// Block self-avoidance report at one level, as JSON.
#[pyfunction]
#[pyo3(signature = (convergents, level, cap_bytes=1 << 30))]
fn check_self_avoiding(convergents: Vec<(u64, u64)>, level: usize, cap_bytes: u64) -> PyResult<String> {
    let ws = words::expand(&convergents, level, cap_bytes).map_err(value_err)?;
    let report = cocycle::check_self_avoiding(&ws, level, cap_bytes).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

/// Letter-level pattern report for a word, as JSON.
#[pyfunction]
#[pyo3(signature = (word, cap_bytes=1 << 30))]
fn check_local_patterns(word: &str, cap_bytes: u64) -> PyResult<String> {
    let parsed = word_from_string(word).map_err(value_err)?;
    let report = cocycle::check_local_patterns(&parsed, cap_bytes).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

/// Divergence certificate as JSON. The slope comes either from an expansion
/// over the tuple's widths (mh,nh,mv,nv + coeffs) or as an exact value.
#[pyfunction]
#[pyo3(signature = (depth, pattern_level, mh=None, nh=None, mv=None, nv=None, coeffs=None, periodic=true, pre=vec![], a=None, b=None, slope=None, cap_bytes=1 << 30))]
#[allow(clippy::too_many_arguments)]
fn certify(
    depth: usize,
    pattern_level: usize,
    mh: Option<u64>,
    nh: Option<u64>,
    mv: Option<u64>,
    nv: Option<u64>,
    coeffs: Option<Vec<u64>>,
    periodic: bool,
    pre: Vec<u64>,
    a: Option<PyRef<PyExact>>,
    b: Option<PyRef<PyExact>>,
    slope: Option<PyRef<PyExact>>,
    cap_bytes: u64,
) -> PyResult<String> {
    let req = match (&a, &b, &slope) {
        (Some(a), Some(b), Some(slope)) => cocycle::CertifyRequest {
            a: a.inner.clone(),
            b: b.inner.clone(),
            slope: cocycle::SlopeSource::Exact(slope.inner.clone()),
            depth,
            pattern_level,
            cap_bytes,
        },
        _ => {
            let (mh, nh, mv, nv, coeffs) = match (mh, nh, mv, nv, coeffs) {
                (Some(mh), Some(nh), Some(mv), Some(nv), Some(coeffs)) => (mh, nh, mv, nv, coeffs),
                _ => {
                    return Err(PyValueError::new_err(
                        "provide either a/b/slope or the multi-twist tuple with coeffs",
                    ))
                }
            };
            let mt = veech::MultiTwist::new(mh, nh, mv, nv).map_err(value_err)?;
            let params = veech::params_from_multitwist(&mt).map_err(value_err)?;
            let se = {
                let s_h = PyExact::from(params.s_h.clone());
                let s_v = PyExact::from(params.s_v.clone());
                build_expansion(coeffs, periodic, pre, &s_h, &s_v)?
            };
            cocycle::CertifyRequest {
                a: params.a,
                b: params.b,
                slope: cocycle::SlopeSource::Expansion { se, mt },
                depth,
                pattern_level,
                cap_bytes,
            }
        }
    };
    let cert = cocycle::certify_divergence(&req).map_err(value_err)?;
    serde_json::to_string(&cert).map_err(value_err)
}

/// Trace the billiard and compare against the cocycle; returns a JSON
/// report with the letter word, bound verdict and deviations.
#[pyfunction]
#[pyo3(signature = (a, b, slope, start_x, start_y, crossings, language_level=None, cap_bytes=1 << 30))]
#[allow(clippy::too_many_arguments)]
fn trace_billiard(
    a: &PyExact,
    b: &PyExact,
    slope: &PyExact,
    start_x: &PyExact,
    start_y: &PyExact,
    crossings: usize,
    language_level: Option<usize>,
    cap_bytes: u64,
) -> PyResult<String> {
    let tp = tracer::TableParams::new(a.inner.clone(), b.inner.clone()).map_err(value_err)?;
    let traj = tracer::trace(
        &tp,
        (start_x.inner.clone(), start_y.inner.clone()),
        slope.inner.clone(),
        crossings,
    )
    .map_err(value_err)?;
    let language = match language_level {
        Some(level) => {
            let z = renorm::LengthQuadruple::from_parameters(&a.inner, &b.inner, &slope.inner)
                .map_err(value_err)?;
            let seq = renorm::convergents(&z, level).map_err(value_err)?;
            if seq.entries.len() < level {
                None
            } else {
                Some(words::expand(&seq.entries, level, cap_bytes).map_err(value_err)?)
            }
        }
        None => None,
    };
    let word = word_to_string(&traj.letters());
    match tracer::compare_with_cocycle(&traj, language.as_ref()) {
        Ok(report) => {
            let payload = serde_json::json!({
                "crossings": report.crossings,
                "max_deviation": report.max_deviation,
                "bound_holds": report.bound_holds,
                "language_checked": report.language_checked,
                "free_flight": traj.free_flight,
                "corner_hit": traj.corner_hit.is_some(),
                "word": word,
            });
            serde_json::to_string(&payload).map_err(value_err)
        }
        Err(tracer::TraceError::LabelingMismatch { at, detail }) => {
            let payload = serde_json::json!({
                "labeling_mismatch": { "at": at, "detail": detail },
                "word": word,
            });
            serde_json::to_string(&payload).map_err(value_err)
        }
        Err(e) => Err(value_err(e)),
    }
}

#[pymodule]
fn windtree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExact>()?;
    m.add_class::<PyWordSystem>()?;
    m.add_function(wrap_pyfunction!(f_step, m)?)?;
    m.add_function(wrap_pyfunction!(is_two_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(convergents, m)?)?;
    m.add_function(wrap_pyfunction!(quadruple_from_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(check_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(realize_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(params_from_multitwist, m)?)?;
    m.add_function(wrap_pyfunction!(multitwist_from_ab, m)?)?;
    m.add_function(wrap_pyfunction!(slope_from_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(psi_step, m)?)?;
    m.add_function(wrap_pyfunction!(convergents_from_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(iet_config, m)?)?;
    m.add_function(wrap_pyfunction!(iet_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(letter_value, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_word, m)?)?;
    m.add_function(wrap_pyfunction!(endpoint_recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(check_self_avoiding, m)?)?;
    m.add_function(wrap_pyfunction!(check_local_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(trace_billiard, m)?)?;
    m.add("SQRT2_BOUND", std::f64::consts::SQRT_2)?;
    Ok(())
}
