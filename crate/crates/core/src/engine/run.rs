use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{estimate_neighborhood, select_mutation, EstimationMode, EvolutionAlgorithm, SelectionClass};
use crate::drift::DriftSchedule;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub mode: EstimationMode,
    pub horizon: usize,
    /// Drop pool members below the algorithm's low-probability threshold.
    pub suppress_low_probability: bool,
    pub record_estimates: bool,
    pub record_reps: bool,
}

impl EngineConfig {
    pub fn oracle(horizon: usize) -> Self {
        EngineConfig {
            mode: EstimationMode::Oracle,
            horizon,
            suppress_low_probability: false,
            record_estimates: false,
            record_reps: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Exact performance of this generation's representation against this generation's target.
    pub perf_exact: f64,
    /// `None` for the initial generation.
    pub selection: Option<SelectionClass>,
    /// Incremented whenever the target changes.
    pub target_id: u64,
    /// Incremented whenever the representation changes.
    pub rep_id: u64,
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord<R> {
    pub generations: Vec<GenerationRecord>,
    pub reps: Option<Vec<R>>,
    pub final_rep: R,
}

impl<R> TrajectoryRecord<R> {
    pub fn perfs(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.perf_exact).collect()
    }
}

/// Run `config.horizon` generations from `initial`.
///
/// Generation `i` selects among mutations of `r_{i-1}` using the target
/// `f_{i-1}`, then the schedule advances, and `Perf_{f_i}(r_i)` is logged.
pub fn run_evolution<A, S>(
    alg: &A,
    schedule: &mut S,
    initial: A::Rep,
    config: &EngineConfig,
    rng: &mut dyn RngCore,
) -> Result<TrajectoryRecord<A::Rep>>
where
    A: EvolutionAlgorithm + ?Sized,
    S: DriftSchedule<Target = A::Target> + ?Sized,
{
    let threshold = if config.suppress_low_probability {
        alg.low_probability_threshold()
    } else {
        None
    };
    let mut generations = Vec::with_capacity(config.horizon + 1);
    let mut reps = config.record_reps.then(|| Vec::with_capacity(config.horizon + 1));
    let mut cur = initial;
    let (mut target_id, mut rep_id) = (0u64, 0u64);
    generations.push(GenerationRecord {
        generation: 0,
        perf_exact: alg.performance(schedule.current(), &cur),
        selection: None,
        target_id,
        rep_id,
        estimates: Vec::new(),
    });
    if let Some(r) = reps.as_mut() {
        r.push(cur.clone());
    }
    for generation in 1..=config.horizon {
        let neighbors = alg.neighborhood(&cur, rng)?;
        let estimates = estimate_neighborhood(alg, schedule.current(), &neighbors, &config.mode, rng)?;
        let sel = select_mutation(&neighbors, &estimates, alg.tolerance(&cur), threshold, rng)?;
        let next = neighbors.into_members().swap_remove(sel.index);
        if next != cur {
            rep_id += 1;
            cur = next;
        }
        if schedule.advance()? {
            target_id += 1;
        }
        generations.push(GenerationRecord {
            generation,
            perf_exact: alg.performance(schedule.current(), &cur),
            selection: Some(sel.class),
            target_id,
            rep_id,
            estimates: if config.record_estimates { estimates } else { Vec::new() },
        });
        if let Some(r) = reps.as_mut() {
            r.push(cur.clone());
        }
    }
    Ok(TrajectoryRecord { generations, reps, final_rep: cur })
}
