use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::NeighborSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionClass {
    Beneficial,
    Neutral,
}

impl SelectionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionClass::Beneficial => "beneficial",
            SelectionClass::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub class: SelectionClass,
}

/// One mutator step.
///
/// Beneficial: `v(r') >= v(r) + t`. Neutral: `|v(r') - v(r)| < t`. If any
/// beneficial mutation exists one of them is drawn with probability
/// proportional to its weight; otherwise a neutral one is (the current
/// representation is always neutral). With `min_relative_probability`, pool
/// members whose share of the pool weight is below it are dropped first.
pub fn select_mutation<R>(
    neighbors: &NeighborSet<R>,
    estimates: &[f64],
    tolerance: f64,
    min_relative_probability: Option<f64>,
    rng: &mut dyn RngCore,
) -> Result<Selection> {
    if estimates.len() != neighbors.len() {
        return Err(Error::MissingEstimate { expected: neighbors.len(), got: estimates.len() });
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} must be positive")));
    }
    let v0 = estimates[neighbors.current_index()];
    let bene: Vec<usize> = (0..neighbors.len()).filter(|&i| estimates[i] >= v0 + tolerance).collect();
    let (pool, class) = if bene.is_empty() {
        let neut = (0..neighbors.len())
            .filter(|&i| i == neighbors.current_index() || (estimates[i] - v0).abs() < tolerance)
            .collect::<Vec<_>>();
        (neut, SelectionClass::Neutral)
    } else {
        (bene, SelectionClass::Beneficial)
    };

    let w = neighbors.weights();
    let mut pool = pool;
    if let Some(floor) = min_relative_probability {
        let total: f64 = pool.iter().map(|&i| w[i]).sum();
        let kept: Vec<usize> = pool.iter().copied().filter(|&i| w[i] / total >= floor).collect();
        if !kept.is_empty() {
            pool = kept;
        }
    }
    if pool.len() == 1 {
        return Ok(Selection { index: pool[0], class });
    }
    let dist = WeightedIndex::new(pool.iter().map(|&i| w[i]))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(Selection { index: pool[dist.sample(rng)], class })
}
