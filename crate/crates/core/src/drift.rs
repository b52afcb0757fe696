//! Target sequences whose consecutive members differ by at most `delta` in error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Source of the per-generation target.
pub trait DriftSchedule {
    type Target: Clone;

    fn current(&self) -> &Self::Target;
    /// Move to the next generation's target. Returns whether it changed.
    fn advance(&mut self) -> Result<bool>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftPolicy {
    Constant,
    /// Conjunctions: swap one variable for a fresh one.
    LongSwap,
    /// Conjunctions: add or drop one variable while staying long.
    LongShrinkGrow,
    /// Hyperplanes: rotate in a fixed plane.
    SteadyRotation,
    /// Hyperplanes: rotate toward a fresh random direction each step.
    RandomWalk,
    /// Targets read from a file.
    Scripted,
}

impl std::str::FromStr for DriftPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => DriftPolicy::Constant,
            "long-swap" => DriftPolicy::LongSwap,
            "long-shrink-grow" => DriftPolicy::LongShrinkGrow,
            "steady-rotation" => DriftPolicy::SteadyRotation,
            "random-walk" => DriftPolicy::RandomWalk,
            "scripted" => DriftPolicy::Scripted,
            other => return Err(Error::Parse(format!("unknown drift policy {other:?}"))),
        })
    }
}

/// Target never changes.
#[derive(Debug, Clone)]
pub struct ConstantSchedule<T> {
    target: T,
}

impl<T: Clone> ConstantSchedule<T> {
    pub fn new(target: T) -> Self {
        ConstantSchedule { target }
    }
}

impl<T: Clone> DriftSchedule for ConstantSchedule<T> {
    type Target = T;
    fn current(&self) -> &T {
        &self.target
    }
    fn advance(&mut self) -> Result<bool> {
        Ok(false)
    }
}

/// A user-supplied target list, played in order and then held at the last entry.
#[derive(Debug, Clone)]
pub struct ScriptedSchedule<T> {
    targets: Vec<T>,
    pos: usize,
}

impl<T: Clone> ScriptedSchedule<T> {
    /// Rejects the list unless every consecutive pair is within `delta`.
    pub fn new(targets: Vec<T>, delta: f64, perf: impl Fn(&T, &T) -> f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::DriftInfeasible("scripted schedule is empty".into()));
        }
        let report = verify_drift_sequence(&targets, perf, delta);
        if let Some(step) = report.first_violation {
            return Err(Error::DriftViolation { step, err: report.errors[step - 1], delta });
        }
        Ok(ScriptedSchedule { targets, pos: 0 })
    }

    /// One target encoding per line; `#` lines are skipped. A blank line is an
    /// ordinary encoding (the empty conjunction, for instance).
    pub fn from_file(
        path: &Path,
        parse: impl Fn(&str) -> Result<T>,
        delta: f64,
        perf: impl Fn(&T, &T) -> f64,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut targets = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            targets.push(parse(line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
        }
        ScriptedSchedule::new(targets, delta, perf)
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }
}

impl<T: Clone> DriftSchedule for ScriptedSchedule<T> {
    type Target = T;
    fn current(&self) -> &T {
        &self.targets[self.pos]
    }
    fn advance(&mut self) -> Result<bool> {
        if self.pos + 1 < self.targets.len() {
            self.pos += 1;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    /// `errors[i]` is the error between targets `i` and `i + 1`.
    pub errors: Vec<f64>,
    pub max_err: f64,
    /// 1-based step index of the first pair over budget.
    pub first_violation: Option<usize>,
}

impl DriftReport {
    pub fn ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Check `(1 - Perf(f_i, f_{i+1})) / 2 <= delta` (with `1e-12` slack) for every step.
pub fn verify_drift_sequence<T>(targets: &[T], perf: impl Fn(&T, &T) -> f64, delta: f64) -> DriftReport {
    let errors: Vec<f64> = targets.windows(2).map(|w| (1.0 - perf(&w[0], &w[1])) / 2.0).collect();
    let first_violation = errors.iter().position(|&e| e > delta + 1e-12).map(|i| i + 1);
    DriftReport {
        max_err: errors.iter().copied().fold(0.0, f64::max),
        errors,
        first_violation,
    }
}
