//! Evolvability under drifting targets.
//!
//! The [`engine`] module holds the generic mutator loop; the concept
//! families ([`conjunctions`], [`hyperplanes`]) and the statistical-query
//! simulation in [`csq`] plug into it through [`engine::EvolutionAlgorithm`].

pub mod conjunctions;
pub mod csq;
pub mod distributions;
pub mod drift;
pub mod engine;
pub mod error;
pub mod hyperplanes;

pub use error::{Error, Result};

/// Snap `x` to the nearest integer when it is within `1e-9` of it, otherwise round up.
///
/// Parameter formulas like `16 * 9 / 0.2^2` land a hair above the integer in floating point.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Same snapping as [`ceil_snapped`], rounding down.
pub fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}
