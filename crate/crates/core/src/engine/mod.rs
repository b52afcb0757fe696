//! The generic mutator loop.
//!
//! A concept family supplies an [`EvolutionAlgorithm`]: a neighborhood
//! function, a tolerance, and an exact performance oracle. The engine
//! estimates performance, splits the neighborhood into beneficial and neutral
//! mutations, and samples the next representation.

mod analysis;
mod estimate;
mod neighbors;
mod params;
mod run;
mod select;

use std::fmt::Debug;

use rand::RngCore;

pub use analysis::{analyze_trajectory, TrajectoryAnalysis, PERF_SLACK};
pub use estimate::{
    empirical_performance, estimate_neighborhood, hoeffding_sample_size, EstimationMode, NoiseKind,
};
pub use neighbors::NeighborSet;
pub use params::{convergence_parameters, ConvergenceParameters};
pub use run::{run_evolution, EngineConfig, GenerationRecord, TrajectoryRecord};
pub use select::{select_mutation, Selection, SelectionClass};

use crate::distributions::ExamplePoint;
use crate::Result;

/// Performance `E[f(x) r(x)]` of a representation against a target.
pub trait PerformanceOracle {
    type Target: Clone + Debug;
    type Rep: Clone + PartialEq + Debug;

    /// Exact performance in `[-1, 1]`.
    fn performance(&self, target: &Self::Target, rep: &Self::Rep) -> f64;

    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint;
    fn target_value(&self, target: &Self::Target, x: &ExamplePoint) -> f64;
    /// Expected output of a (possibly randomized) representation at `x`.
    fn rep_value(&self, rep: &Self::Rep, x: &ExamplePoint) -> f64;
}

pub trait EvolutionAlgorithm: PerformanceOracle {
    fn neighborhood(&self, rep: &Self::Rep, rng: &mut dyn RngCore)
        -> Result<NeighborSet<Self::Rep>>;
    fn tolerance(&self, rep: &Self::Rep) -> f64;
    /// Pool members whose relative probability falls below this are dropped
    /// when low-probability suppression is on.
    fn low_probability_threshold(&self) -> Option<f64> {
        None
    }
}
