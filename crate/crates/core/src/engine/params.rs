use serde::{Deserialize, Serialize};

use crate::{ceil_snapped, Error, Result};

/// Tolerance, generation count, sample size and drift rate derived from a
/// benefit bound `b` (every non-accurate representation has a neighbor at
/// least `1/b` better) and neighborhood size bound `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParameters {
    pub benefit: f64,
    pub neighborhood_size: f64,
    pub epsilon: f64,
    pub drifting: bool,
    pub tolerance: f64,
    pub generations: u64,
    pub sample_size: u64,
    pub drift: f64,
}

impl ConvergenceParameters {
    /// Estimate accuracy that keeps selection exact: `1/(8b)`.
    pub fn noise_bound(&self) -> f64 {
        1.0 / (8.0 * self.benefit)
    }

    /// Strict-improvement lower bound used by trajectory analysis: `4b`.
    pub fn improvement_denominator(&self) -> f64 {
        4.0 * self.benefit
    }
}

pub fn convergence_parameters(
    benefit: f64,
    neighborhood_size: f64,
    epsilon: f64,
    drifting: bool,
) -> Result<ConvergenceParameters> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be in (0, 1)")));
    }
    if !(benefit.is_finite() && benefit >= 2.0 / epsilon * (1.0 - 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "benefit bound {benefit} must be at least 2/epsilon = {}",
            2.0 / epsilon
        )));
    }
    if !(neighborhood_size >= 1.0 && neighborhood_size.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "neighborhood size {neighborhood_size} must be >= 1"
        )));
    }
    let gens = if drifting { 16.0 * benefit } else { 8.0 * benefit };
    let generations = ceil_snapped(gens) as u64;
    let s = 128.0 * benefit * benefit * (2.0 * neighborhood_size * generations as f64 / epsilon).ln();
    Ok(ConvergenceParameters {
        benefit,
        neighborhood_size,
        epsilon,
        drifting,
        tolerance: 1.0 / (2.0 * benefit),
        generations,
        sample_size: ceil_snapped(s) as u64,
        drift: if drifting { 1.0 / (16.0 * benefit) } else { 0.0 },
    })
}
