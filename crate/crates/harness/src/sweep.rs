//! One-axis parameter sweeps over a template experiment.

use driftevo_core::drift::DriftPolicy;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, HorizonSpec};
use crate::runner::{run_experiment, DerivedParameters};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Multiples of the derived drift rate.
    DeltaMultiplier,
    Delta,
    Epsilon,
    N,
}

impl std::str::FromStr for Axis {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| HarnessError::Config(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis_value: f64,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub generations: u64,
    pub horizon: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Derived parameters for `cfg` without running any generations.
pub fn derived_parameters(cfg: &ExperimentConfig) -> Result<DerivedParameters> {
    let mut probe = cfg.clone();
    probe.trials = 1;
    probe.horizon = HorizonSpec::Count(0);
    probe.drift = DriftPolicy::Constant;
    probe.schedule_file = None;
    Ok(run_experiment(&probe, &mut |_| Ok(()))?.parameters)
}

pub fn run_sweep(template: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<SweepCell>> {
    let values: Vec<Option<f64>> = if values.is_empty() { vec![None] } else { values.iter().copied().map(Some).collect() };
    let mut cells = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = template.clone();
        if let Some(v) = v {
            match axis {
                Axis::DeltaMultiplier => cfg.delta = Some(v * derived_parameters(template)?.drift),
                Axis::Delta => cfg.delta = Some(v),
                Axis::Epsilon => cfg.epsilon = v,
                Axis::N => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(HarnessError::Config(format!("n value {v} is not a positive integer")));
                    }
                    cfg.n = v as usize;
                }
            }
        }
        cfg.validate()?;
        let params = derived_parameters(&cfg)?;
        let s = run_experiment(&cfg, &mut |_| Ok(()))?;
        cells.push(SweepCell {
            axis_value: v.unwrap_or(f64::NAN),
            n: cfg.n,
            epsilon: cfg.epsilon,
            delta: cfg.delta.unwrap_or(params.drift),
            tolerance: cfg.tolerance.unwrap_or(params.tolerance),
            generations: params.generations,
            horizon: s.horizon,
            trials: s.trials.len(),
            successes: s.successes,
            success_rate: s.success_rate,
        });
    }
    Ok(cells)
}
