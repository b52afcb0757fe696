use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{NeighborSet, PerformanceOracle};
use crate::{ceil_snapped, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Independent uniform perturbation in `[-Z, Z]`.
    Uniform,
    /// Every estimate pulled toward the current representation's value by `Z`.
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EstimationMode {
    /// Exact performance.
    Oracle,
    /// Exact performance plus noise of magnitude at most `bound`.
    BoundedNoise { bound: f64, kind: NoiseKind },
    /// Empirical mean over one shared sample per generation.
    Sampling { sample_size: usize },
}

/// Samples needed so that `count` empirical means are all within `z` of
/// their expectations with probability at least `1 - delta`.
pub fn hoeffding_sample_size(z: f64, delta: f64, count: u64) -> Result<u64> {
    if !(z > 0.0 && z <= 2.0) {
        return Err(Error::InvalidParameter(format!("accuracy {z} must be in (0, 2]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence {delta} must be in (0, 1)")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("estimate count must be >= 1".into()));
    }
    let s = 2.0 * (2.0 * count as f64 / delta).ln() / (z * z);
    Ok(ceil_snapped(s) as u64)
}

/// `(1/s) * sum f(x) r(x)` over `s` fresh points.
pub fn empirical_performance<O: PerformanceOracle + ?Sized>(
    oracle: &O,
    target: &O::Target,
    rep: &O::Rep,
    sample_size: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if sample_size == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let mut acc = 0.0;
    for _ in 0..sample_size {
        let x = oracle.sample_point(rng);
        acc += oracle.target_value(target, &x) * oracle.rep_value(rep, &x);
    }
    Ok(acc / sample_size as f64)
}

/// Estimates for every neighbor, aligned with `neighbors.members()`.
pub fn estimate_neighborhood<O: PerformanceOracle + ?Sized>(
    oracle: &O,
    target: &O::Target,
    neighbors: &NeighborSet<O::Rep>,
    mode: &EstimationMode,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    match *mode {
        EstimationMode::Oracle => {
            Ok(neighbors.members().iter().map(|r| oracle.performance(target, r)).collect())
        }
        EstimationMode::BoundedNoise { bound, kind } => {
            if !(bound >= 0.0 && bound.is_finite()) {
                return Err(Error::InvalidParameter(format!("noise bound {bound}")));
            }
            let exact: Vec<f64> =
                neighbors.members().iter().map(|r| oracle.performance(target, r)).collect();
            let v0 = exact[neighbors.current_index()];
            Ok(exact
                .iter()
                .map(|&p| match kind {
                    NoiseKind::Uniform if bound > 0.0 => p + rng.random_range(-bound..=bound),
                    NoiseKind::Uniform => p,
                    NoiseKind::Adversarial => {
                        if p > v0 {
                            p - bound
                        } else if p < v0 {
                            p + bound
                        } else {
                            p
                        }
                    }
                })
                .collect())
        }
        EstimationMode::Sampling { sample_size } => {
            if sample_size == 0 {
                return Err(Error::InvalidParameter("sample size must be >= 1".into()));
            }
            let mut acc = vec![0.0; neighbors.len()];
            for _ in 0..sample_size {
                let x = oracle.sample_point(rng);
                let fx = oracle.target_value(target, &x);
                for (a, r) in acc.iter_mut().zip(neighbors.members()) {
                    *a += fx * oracle.rep_value(r, &x);
                }
            }
            Ok(acc.into_iter().map(|a| a / sample_size as f64).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_sample_size(1.0, 0.5, 1).unwrap(), 3);
        assert_eq!(hoeffding_sample_size(0.05, 0.1, 36).unwrap(), 5264);
    }

    #[test]
    fn hoeffding_rejects_bad_input() {
        assert!(hoeffding_sample_size(0.0, 0.1, 1).is_err());
        assert!(hoeffding_sample_size(0.1, 1.0, 1).is_err());
        assert!(hoeffding_sample_size(0.1, 0.1, 0).is_err());
    }
}
