//! Evolving a correlational statistical-query learner.
//!
//! A deterministic learner asks `q` queries `(phi, theta)`, each answered
//! with one bit. [`Reduction`] encodes the partial answer string in the
//! representation and lets selection decide each bit, then moves the
//! resulting hypothesis in through a slow backslide.

mod reduction;
mod toy;

use std::fmt::Debug;

use rand::RngCore;

pub use reduction::{Reduction, ReductionParameters, ReductionRep};
pub use toy::CoordinateQueryLearner;

use crate::distributions::ExamplePoint;
use crate::{floor_snapped, Error, Result};

/// A deterministic correlational statistical-query learner. Query `i` is a
/// function of the answers to queries `0..i`.
pub trait CsqAlgorithm {
    type Hypothesis: Clone + PartialEq + Debug;
    type Target: Clone + Debug;

    fn query_count(&self) -> usize;
    /// Answer tolerance `tau`; every threshold must be at least this.
    fn tolerance(&self) -> f64;
    fn threshold(&self, prefix: &[bool]) -> f64;
    /// `phi(x)` for the query asked after `prefix`; values lie in `[-1, 1]`.
    fn query_value(&self, prefix: &[bool], x: &ExamplePoint) -> f64;
    /// Exact `E[phi f]` for the query asked after `prefix`.
    fn query_correlation(&self, prefix: &[bool], target: &Self::Target) -> f64;
    fn hypothesis(&self, answers: &[bool]) -> Self::Hypothesis;
    fn hypothesis_value(&self, h: &Self::Hypothesis, x: &ExamplePoint) -> f64;
    fn hypothesis_correlation(&self, h: &Self::Hypothesis, target: &Self::Target) -> f64;
    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint;
    fn target_value(&self, target: &Self::Target, x: &ExamplePoint) -> f64;
    /// Upper bound on `epsilon theta / (8q)` when the query tree is too large to enumerate.
    fn declared_tolerance_bound(&self, _epsilon: f64) -> Option<f64> {
        None
    }
}

/// The learner's hypothesis, or the zero function.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis<H> {
    Zero,
    Learned(H),
}

/// Whether every answer in `z` is one the oracle may give: `1` is invalid
/// when `E[phi f] <= theta - tau`, `0` when `E[phi f] >= theta + tau`.
/// Returns the first invalid position, if any.
pub fn check_consistency<A: CsqAlgorithm + ?Sized>(z: &[bool], target: &A::Target, algo: &A) -> Result<Option<usize>> {
    if z.len() > algo.query_count() {
        return Err(Error::InvalidParameter(format!(
            "answer string of length {} exceeds {} queries",
            z.len(),
            algo.query_count()
        )));
    }
    let tau = algo.tolerance();
    for i in 0..z.len() {
        let prefix = &z[..i];
        let c = algo.query_correlation(prefix, target);
        let theta = algo.threshold(prefix);
        let bad = if z[i] { c <= theta - tau } else { c >= theta + tau };
        if bad {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// How many rounds apart two query evaluations can be and still both be
/// valid answers: `floor(tau / (2 delta))`. `None` means unbounded (`delta = 0`).
pub fn drift_query_margin(tau: f64, delta: f64) -> Result<Option<u64>> {
    if !(tau > 0.0) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau {tau}, delta {delta}")));
    }
    if delta == 0.0 {
        return Ok(None);
    }
    Ok(Some(floor_snapped(tau / (2.0 * delta)) as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins() {
        assert_eq!(drift_query_margin(0.1, 0.005).unwrap(), Some(10));
        assert_eq!(drift_query_margin(0.1, 0.05).unwrap(), Some(1));
        assert_eq!(drift_query_margin(0.1, 0.0).unwrap(), None);
        assert!(drift_query_margin(0.0, 0.1).is_err());
    }
}
