//! Exact computation toolkit for the periodic wind-tree billiard and the
//! renormalization of its directional flow.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! (a, b, slope) --> interval exchange --> renormalization map F --> convergents
//!                                                   |
//!            substitution words  <------------------+
//!                  |
//!            wind-tree cocycle (boxes, self-avoidance, certificates)
//!                  |
//!            billiard ray tracer (independent geometric cross-check)
//! ```
//!
//! All decisions are made in exact arithmetic (rationals, quadratic
//! irrationals, certified dyadic enclosures); floating point appears only in
//! rendering output.

pub mod exact;
pub mod iet;
pub mod renorm;
pub mod veech;
pub mod words;
pub mod cocycle;
pub mod tracer;
pub mod svg;

pub use exact::{ExactError, ExactScalar, Rational};
pub use num_bigint::BigInt;
