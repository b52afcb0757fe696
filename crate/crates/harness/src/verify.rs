//! Strict-benefit check: every representation below `1 - epsilon/2` must
//! have a neighbor at least `1/b` better.

use std::f64::consts::PI;
use std::path::PathBuf;

use driftevo_core::conjunctions::{self, exact_performance, ratio_to_f64, Conjunction, ConjunctionEvolution};
use driftevo_core::engine::EvolutionAlgorithm;
use driftevo_core::hyperplanes::{
    self, random_orthonormal_completion, ComponentwiseEvolution, RotationEvolution, UnitNormal,
};
use driftevo_core::engine::PerformanceOracle;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Family;
use crate::runner::trial_rng;
use crate::{HarnessError, Result};

/// Slack for comparing a floating-point gain with its bound.
const GAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_cases() -> usize {
    1000
}
fn default_k() -> u32 {
    1
}
fn default_contradictory() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub family: Family,
    pub n: OneOrMany<usize>,
    pub epsilon: OneOrMany<f64>,
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: u32,
    /// General conjunctions: share of cases built to contain a contradictory literal.
    #[serde(default = "default_contradictory")]
    pub contradictory_fraction: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub target: String,
    pub rep: String,
    pub perf: f64,
    pub best_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCell {
    pub family: Family,
    pub n: usize,
    pub epsilon: f64,
    pub gain_bound: f64,
    pub cases: usize,
    /// Cases with performance below `1 - epsilon/2`.
    pub checked: usize,
    pub contradictory: usize,
    pub violations: usize,
    /// Violations whose performance is also below `1 - epsilon`.
    pub violations_below_accuracy: usize,
    /// Smallest `best_gain - gain_bound` over checked cases.
    pub min_margin: Option<f64>,
    pub examples: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cells: Vec<VerifyCell>,
    pub total_violations: usize,
}

struct Case {
    perf: f64,
    gain: f64,
    contradictory: bool,
    target: String,
    rep: String,
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.cases == 0 {
        return Err(HarnessError::Config("cases must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.contradictory_fraction) {
        return Err(HarnessError::Config("contradictory_fraction must be in [0, 1]".into()));
    }
    if cfg.family == Family::CsqReduction {
        return Err(HarnessError::Config("verify applies to the conjunction and hyperplane families".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for n in cfg.n.to_vec() {
        for eps in cfg.epsilon.to_vec() {
            let seed = cfg.seed.wrapping_add(cell_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            cell_index += 1;
            cells.push(pool.install(|| verify_cell(cfg, n, eps, seed))?);
        }
    }
    let total_violations = cells.iter().map(|c| c.violations).sum();
    Ok(VerifyReport { cells, total_violations })
}

fn verify_cell(cfg: &VerifyConfig, n: usize, eps: f64, seed: u64) -> Result<VerifyCell> {
    let (bound, cases): (f64, Vec<Case>) = match cfg.family {
        Family::MonotoneConj | Family::GeneralConj => {
            let monotone = cfg.family == Family::MonotoneConj;
            let alg = ConjunctionEvolution::new(n, eps, monotone)?;
            let frac = if monotone { 0.0 } else { cfg.contradictory_fraction };
            let cases = (0..cfg.cases)
                .into_par_iter()
                .map(|i| conjunction_case(&alg, frac, &mut trial_rng(seed, i)))
                .collect::<Result<Vec<_>>>()?;
            (1.0 / alg.benefit(), cases)
        }
        Family::HyperplaneRotation => {
            let alg = RotationEvolution::new(n, eps)?;
            let cases = (0..cfg.cases)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(seed, i);
                    let (f, r) = hyperplane_pair(n, &mut rng);
                    hyperplane_case(&alg, f, r, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            (1.0 / alg.benefit(), cases)
        }
        Family::HyperplaneComponentwise => {
            let lo = (1.0 / n as f64).powi(cfg.k as i32);
            let cases = (0..cfg.cases)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(seed, i);
                    let sigma: Vec<f64> = (0..n).map(|_| lo.powf(rng.random::<f64>()).clamp(lo, 1.0)).collect();
                    let alg = ComponentwiseEvolution::new(sigma, cfg.k, eps)?;
                    let (f, r) = hyperplane_pair(n, &mut rng);
                    hyperplane_case(&alg, f, r, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            (1.0 / hyperplanes::componentwise_benefit_bound(n, eps), cases)
        }
        Family::CsqReduction => unreachable!("rejected above"),
    };
    let mut cell = VerifyCell {
        family: cfg.family,
        n,
        epsilon: eps,
        gain_bound: bound,
        cases: cases.len(),
        checked: 0,
        contradictory: cases.iter().filter(|c| c.contradictory).count(),
        violations: 0,
        violations_below_accuracy: 0,
        min_margin: None,
        examples: Vec::new(),
    };
    for c in cases {
        if c.perf >= 1.0 - eps / 2.0 {
            continue;
        }
        cell.checked += 1;
        let margin = c.gain - bound;
        cell.min_margin = Some(cell.min_margin.map_or(margin, |m: f64| m.min(margin)));
        if c.gain < bound - GAIN_SLACK {
            cell.violations += 1;
            if c.perf < 1.0 - eps {
                cell.violations_below_accuracy += 1;
            }
            if cell.examples.len() < 5 {
                cell.examples.push(Violation { target: c.target, rep: c.rep, perf: c.perf, best_gain: c.gain });
            }
        }
    }
    Ok(cell)
}

fn conjunction_case(alg: &ConjunctionEvolution, contradictory_fraction: f64, rng: &mut ChaCha8Rng) -> Result<Case> {
    let n = alg.n;
    let q = alg.max_length().min(n);
    let force = contradictory_fraction > 0.0 && q >= 1 && rng.random_bool(contradictory_fraction);
    let (f, r) = if force {
        let f = conjunctions::random_conjunction(n, rng.random_range(1..=n), alg.monotone, rng)?;
        let lits = f.literals();
        let pick = lits[rng.random_range(0..lits.len())];
        let len = rng.random_range(1..=q);
        let other = conjunctions::random_conjunction(n, len, alg.monotone, rng)?;
        let mut rl: Vec<i32> = other.literals().into_iter().filter(|l| l.abs() != pick.abs()).take(len - 1).collect();
        rl.push(-pick);
        (f, Conjunction::from_literals(&rl, n)?)
    } else {
        let f = conjunctions::random_conjunction(n, rng.random_range(0..=n), alg.monotone, rng)?;
        let r = conjunctions::random_conjunction(n, rng.random_range(0..=q), alg.monotone, rng)?;
        (f, r)
    };
    let perf = exact_performance(&f, &r);
    Ok(Case {
        perf: ratio_to_f64(&perf),
        gain: ratio_to_f64(&alg.best_gain(&f, &r)?),
        contradictory: r.contradicts(&f),
        target: f.encode(),
        rep: r.encode(),
    })
}

/// Half the pairs are independent; the rest sit at a uniform angle so the
/// whole performance range is covered.
fn hyperplane_pair(n: usize, rng: &mut ChaCha8Rng) -> (UnitNormal, UnitNormal) {
    let f = UnitNormal::random(n, rng);
    if n == 1 || rng.random_bool(0.5) {
        let r = UnitNormal::random(n, rng);
        return (f, r);
    }
    let u = random_orthonormal_completion(&f, rng).swap_remove(0);
    let a = rng.random_range(0.0..PI);
    let v = f.as_slice().iter().zip(&u).map(|(x, y)| a.cos() * x + a.sin() * y).collect();
    (f, UnitNormal::new(v).expect("unit"))
}

fn hyperplane_case<A>(alg: &A, f: UnitNormal, r: UnitNormal, rng: &mut dyn RngCore) -> Result<Case>
where
    A: EvolutionAlgorithm + PerformanceOracle<Target = UnitNormal, Rep = UnitNormal>,
{
    let perf = alg.performance(&f, &r);
    let set = alg.neighborhood(&r, rng)?;
    let best = set.members().iter().map(|m| alg.performance(&f, m)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Case { perf, gain: best - perf, contradictory: false, target: f.encode(), rep: r.encode() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn forced_cases_contradict() {
        let cfg: VerifyConfig = serde_json::from_value(json!({
            "family": "general-conj", "n": 8, "epsilon": 0.3, "cases": 300, "contradictory_fraction": 0.5
        }))
        .unwrap();
        let rep = run_verify(&cfg).unwrap();
        assert!(rep.cells[0].contradictory as f64 >= 0.4 * 300.0);
    }

    #[test]
    fn lists_expand_to_cells() {
        let cfg: VerifyConfig = serde_json::from_value(json!({
            "family": "hyperplane-rotation", "n": [3, 4], "epsilon": [0.2, 0.4], "cases": 20
        }))
        .unwrap();
        let rep = run_verify(&cfg).unwrap();
        assert_eq!(rep.cells.len(), 4);
        assert_eq!(rep.total_violations, 0);
    }
}
