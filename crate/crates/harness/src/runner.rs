//! Seeded, parallel trial execution for every family.

use driftevo_core::conjunctions::{self, min_long_length, Conjunction, ConjunctionDrift, ConjunctionEvolution};
use driftevo_core::csq::{CoordinateQueryLearner, Hypothesis, Reduction, ReductionRep};
use driftevo_core::drift::{DriftPolicy, DriftSchedule, ScriptedSchedule};
use driftevo_core::engine::{
    analyze_trajectory, run_evolution, convergence_parameters, EngineConfig, EstimationMode, EvolutionAlgorithm,
    NoiseKind, ConvergenceParameters, PERF_SLACK,
};
use driftevo_core::hyperplanes::{
    self, ComponentwiseEvolution, RotationDrift, RotationEvolution, UnitNormal,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Family, Lpe, ModeName};
use crate::{HarnessError, Result};

/// Largest derived sample size accepted without an explicit `sample_size`.
const MAX_DERIVED_SAMPLES: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParameters {
    pub benefit: Option<f64>,
    pub neighborhood_size: Option<f64>,
    pub tolerance: f64,
    pub generations: u64,
    pub sample_size: u64,
    pub drift: f64,
    pub noise_bound: f64,
    pub eta: Option<f64>,
    pub stages: Option<u64>,
}

impl DerivedParameters {
    fn from_convergence(p: &ConvergenceParameters) -> Self {
        DerivedParameters {
            benefit: Some(p.benefit),
            neighborhood_size: Some(p.neighborhood_size),
            tolerance: p.tolerance,
            generations: p.generations,
            sample_size: p.sample_size,
            drift: p.drift,
            noise_bound: p.noise_bound(),
            eta: None,
            stages: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub initial_perf: f64,
    pub perf_at_g: f64,
    pub final_perf: f64,
    pub min_perf: f64,
    pub perpetual_accuracy: Option<f64>,
    pub monotone: bool,
    pub quasi_monotone: bool,
    pub strict_until_eps: Option<bool>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: Value,
    pub parameters: DerivedParameters,
    pub horizon: usize,
    pub trials: Vec<TrialSummary>,
    pub successes: usize,
    pub success_rate: f64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub trial: usize,
    pub generation: usize,
    pub perf_exact: f64,
    pub selection_class: &'static str,
    pub target_id: u64,
    pub rep_id: u64,
}

/// Config as embedded in outputs: execution-only keys removed.
pub fn embedded_config(cfg: &ExperimentConfig) -> Value {
    let mut c = cfg.clone();
    c.threads = None;
    c.out = None;
    c.to_value()
}

/// Per-trial generator: stream `trial` of the ChaCha stream seeded by `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

type Schedule<T> = Box<dyn DriftSchedule<Target = T> + Send>;
type Setup<'a, A> = dyn Fn(&mut ChaCha8Rng) -> Result<(Schedule<<A as driftevo_core::engine::PerformanceOracle>::Target>, <A as driftevo_core::engine::PerformanceOracle>::Rep)>
    + Sync
    + 'a;

/// Run every trial of `cfg`, handing CSV rows to `sink` in trial order.
pub fn run_experiment(cfg: &ExperimentConfig, sink: &mut dyn FnMut(Vec<Row>) -> Result<()>) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    dispatch(cfg, &pool, sink)
}

fn dispatch(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, sink: &mut dyn FnMut(Vec<Row>) -> Result<()>) -> Result<ExperimentSummary> {
    let eps = cfg.epsilon;
    match cfg.family {
        Family::MonotoneConj | Family::GeneralConj => {
            let monotone = cfg.family == Family::MonotoneConj;
            let n = cfg.n;
            let base = ConjunctionEvolution::new(n, eps, monotone)?;
            let tp = convergence_parameters(base.benefit(), base.neighborhood_bound(), eps, true)?;
            let alg = ConjunctionEvolution::with_tolerance(n, eps, monotone, cfg.tolerance.unwrap_or(tp.tolerance))?;
            let params = DerivedParameters::from_convergence(&tp);
            let delta = cfg.delta.unwrap_or(tp.drift);
            let q = alg.max_length().min(n);
            let fixed_target = cfg.target.as_deref().map(|s| Conjunction::parse(s, n)).transpose()?;
            let fixed_initial = cfg.initial.as_deref().map(|s| Conjunction::parse(s, n)).transpose()?;
            let long = matches!(cfg.drift, DriftPolicy::LongSwap | DriftPolicy::LongShrinkGrow);
            let setup = move |rng: &mut ChaCha8Rng| -> Result<(Schedule<Conjunction>, Conjunction)> {
                let target = match fixed_target {
                    Some(t) => t,
                    None => {
                        let len = match cfg.target_length {
                            Some(l) => l,
                            None if long => min_long_length(delta),
                            None => rng.random_range(0..=n),
                        };
                        conjunctions::random_conjunction(n, len, monotone, rng)?
                    }
                };
                let initial = match fixed_initial {
                    Some(r) => r,
                    None => {
                        let len = rng.random_range(0..=q);
                        conjunctions::random_conjunction(n, len, monotone, rng)?
                    }
                };
                let drift_seed = rng.next_u64();
                let sched: Schedule<Conjunction> = match cfg.drift {
                    DriftPolicy::Scripted => Box::new(ScriptedSchedule::from_file(
                        cfg.schedule_file.as_ref().expect("validated"),
                        |s| Conjunction::parse(s, n),
                        delta,
                        conjunctions::performance,
                    )?),
                    policy => Box::new(ConjunctionDrift::new(target, n, policy, delta, drift_seed)?),
                };
                Ok((sched, initial))
            };
            execute(&alg, cfg, params, Some(base.benefit()), mode_for(cfg, &tp_values(&tp))?, false, &setup, pool, sink)
        }
        Family::HyperplaneRotation => {
            let n = cfg.n;
            let base = RotationEvolution::new(n, eps)?;
            let tp = convergence_parameters(base.benefit(), base.neighborhood_bound(), eps, true)?;
            let alg = RotationEvolution::with_tolerance(n, eps, cfg.tolerance.unwrap_or(tp.tolerance))?;
            let delta = cfg.delta.unwrap_or(tp.drift);
            let setup = hyperplane_setup(cfg, n, delta, None);
            execute(&alg, cfg, DerivedParameters::from_convergence(&tp), Some(base.benefit()), mode_for(cfg, &tp_values(&tp))?, false, &setup, pool, sink)
        }
        Family::HyperplaneComponentwise => {
            let sigma = match &cfg.sigma {
                Some(s) => {
                    if s.len() != cfg.n {
                        return Err(HarnessError::Config(format!("sigma has {} entries but n = {}", s.len(), cfg.n)));
                    }
                    s.clone()
                }
                None => default_sigma(cfg.n, cfg.k),
            };
            let n = sigma.len();
            let base = ComponentwiseEvolution::new(sigma.clone(), cfg.k, eps)?;
            let tp = convergence_parameters(base.benefit(), base.neighborhood_bound(), eps, true)?;
            let alg = ComponentwiseEvolution::with_tolerance(sigma.clone(), cfg.k, eps, cfg.tolerance.unwrap_or(tp.tolerance))?;
            let delta = cfg.delta.unwrap_or(tp.drift);
            let setup = hyperplane_setup(cfg, n, delta, Some(sigma));
            execute(&alg, cfg, DerivedParameters::from_convergence(&tp), Some(base.benefit()), mode_for(cfg, &tp_values(&tp))?, false, &setup, pool, sink)
        }
        Family::CsqReduction => {
            let n = cfg.n;
            let red = Reduction::new(CoordinateQueryLearner::new(n)?, eps, cfg.quasi_monotonic)?;
            let rp = *red.params();
            let params = DerivedParameters {
                benefit: None,
                neighborhood_size: None,
                tolerance: rp.max_tolerance,
                generations: rp.generations,
                sample_size: rp.sample_size,
                drift: rp.drift,
                noise_bound: rp.estimate_accuracy,
                eta: Some(rp.eta),
                stages: Some(rp.stages),
            };
            let delta = cfg.delta.unwrap_or(rp.drift);
            let fixed_target = cfg.target.as_deref().map(|s| Conjunction::parse(s, n)).transpose()?;
            if fixed_target.is_some_and(|t| !t.is_monotone()) {
                return Err(HarnessError::Config("reduction targets must be monotone".into()));
            }
            let zero_start = match cfg.initial.as_deref() {
                None | Some("random") => false,
                Some("zero") => true,
                Some(other) => {
                    return Err(HarnessError::Config(format!("reduction initial must be \"zero\" or \"random\", got {other:?}")))
                }
            };
            let red_ref = &red;
            let setup = move |rng: &mut ChaCha8Rng| -> Result<(Schedule<Conjunction>, ReductionRep<Conjunction>)> {
                let target = match fixed_target {
                    Some(t) => t,
                    None => {
                        let len = cfg.target_length.unwrap_or_else(|| rng.random_range(0..=n));
                        conjunctions::random_conjunction(n, len, true, rng)?
                    }
                };
                let initial = if zero_start { ReductionRep::start(Hypothesis::Zero) } else { red_ref.random_rep(rng) };
                let drift_seed = rng.next_u64();
                let sched: Schedule<Conjunction> = match cfg.drift {
                    DriftPolicy::Scripted => Box::new(ScriptedSchedule::from_file(
                        cfg.schedule_file.as_ref().expect("validated"),
                        |s| Conjunction::parse(s, n),
                        delta,
                        conjunctions::performance,
                    )?),
                    policy => Box::new(ConjunctionDrift::new(target, n, policy, delta, drift_seed)?),
                };
                Ok((sched, initial))
            };
            let suppress = cfg.lpe == Lpe::Suppressed;
            let mode = mode_for(cfg, &(rp.estimate_accuracy, rp.sample_size))?;
            execute(&red, cfg, params, None, mode, suppress, &setup, pool, sink)
        }
    }
}

fn tp_values(tp: &ConvergenceParameters) -> (f64, u64) {
    (tp.noise_bound(), tp.sample_size)
}

fn mode_for(cfg: &ExperimentConfig, (noise, samples): &(f64, u64)) -> Result<EstimationMode> {
    Ok(match cfg.mode {
        ModeName::Oracle => EstimationMode::Oracle,
        ModeName::NoiseUniform => EstimationMode::BoundedNoise { bound: cfg.noise_bound.unwrap_or(*noise), kind: NoiseKind::Uniform },
        ModeName::NoiseAdversarial => {
            EstimationMode::BoundedNoise { bound: cfg.noise_bound.unwrap_or(*noise), kind: NoiseKind::Adversarial }
        }
        ModeName::Sampling => {
            let s = match cfg.sample_size {
                Some(s) => s,
                None if *samples <= MAX_DERIVED_SAMPLES => *samples as usize,
                None => {
                    return Err(HarnessError::Config(format!(
                        "derived sample size {samples} is impractical; set sample_size"
                    )))
                }
            };
            if s == 0 {
                return Err(HarnessError::Config("sample_size must be >= 1".into()));
            }
            EstimationMode::Sampling { sample_size: s }
        }
    })
}

/// Scales spread geometrically from `1` down to `(1/n)^k`.
pub fn default_sigma(n: usize, k: u32) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let lo = (1.0 / n as f64).powi(k as i32);
    (0..n).map(|i| lo.powf(i as f64 / (n - 1) as f64).max(lo)).collect()
}

fn hyperplane_setup<'a>(
    cfg: &'a ExperimentConfig,
    n: usize,
    delta: f64,
    sigma: Option<Vec<f64>>,
) -> impl Fn(&mut ChaCha8Rng) -> Result<(Schedule<UnitNormal>, UnitNormal)> + Sync + 'a {
    move |rng: &mut ChaCha8Rng| {
        let parse = |s: &str| -> Result<UnitNormal> {
            let v = UnitNormal::parse(s)?;
            if v.dim() != n {
                return Err(HarnessError::Config(format!("vector {s:?} has dimension {}, expected {n}", v.dim())));
            }
            Ok(v)
        };
        let target = match &cfg.target {
            Some(s) => parse(s)?,
            None => UnitNormal::random(n, rng),
        };
        let initial = match &cfg.initial {
            Some(s) => parse(s)?,
            None => UnitNormal::random(n, rng),
        };
        let drift_seed = rng.next_u64();
        let sched: Schedule<UnitNormal> = match cfg.drift {
            DriftPolicy::Scripted => {
                let sig = sigma.clone();
                Box::new(ScriptedSchedule::from_file(
                    cfg.schedule_file.as_ref().expect("validated"),
                    |s| {
                        let v = UnitNormal::parse(s)?;
                        if v.dim() != n {
                            return Err(driftevo_core::Error::DimensionMismatch { expected: n, got: v.dim() });
                        }
                        Ok(v)
                    },
                    delta,
                    move |a: &UnitNormal, b: &UnitNormal| match &sig {
                        Some(s) => hyperplanes::performance_product_normal(a, b, s),
                        None => hyperplanes::performance_spherical(a, b),
                    },
                )?)
            }
            policy => Box::new(RotationDrift::new(target, policy, delta, sigma.clone(), drift_seed)?),
        };
        Ok((sched, initial))
    }
}

#[allow(clippy::too_many_arguments)]
fn execute<A>(
    alg: &A,
    cfg: &ExperimentConfig,
    params: DerivedParameters,
    benefit: Option<f64>,
    mode: EstimationMode,
    suppress: bool,
    setup: &Setup<'_, A>,
    pool: &rayon::ThreadPool,
    sink: &mut dyn FnMut(Vec<Row>) -> Result<()>,
) -> Result<ExperimentSummary>
where
    A: EvolutionAlgorithm + Sync,
    A::Rep: Send,
{
    let g = params.generations;
    let horizon = cfg.horizon.resolve(g)?;
    let engine = EngineConfig { mode, horizon, suppress_low_probability: suppress, record_estimates: false, record_reps: false };
    let eps = cfg.epsilon;
    let window = (g as usize).min(horizon);
    let chunk = pool.current_num_threads().max(1) * 4;

    let run_trial = |trial: usize| -> Result<(TrialSummary, Vec<Row>)> {
        let mut rng = trial_rng(cfg.seed, trial);
        let (mut sched, initial) = setup(&mut rng)?;
        let tr = run_evolution(alg, sched.as_mut(), initial, &engine, &mut rng)?;
        let perfs = tr.perfs();
        let a = analyze_trajectory(&perfs, eps, benefit, window);
        let ok = |p: f64| p >= 1.0 - eps - PERF_SLACK;
        let success = ok(perfs[window]) && ok(perfs[horizon]) && a.perpetual_accuracy.is_some_and(|f| f >= 1.0 - eps);
        let rows = tr
            .generations
            .iter()
            .map(|g| Row {
                trial,
                generation: g.generation,
                perf_exact: g.perf_exact,
                selection_class: g.selection.map_or("initial", |c| c.as_str()),
                target_id: g.target_id,
                rep_id: g.rep_id,
            })
            .collect();
        let summary = TrialSummary {
            trial,
            initial_perf: perfs[0],
            perf_at_g: perfs[window],
            final_perf: a.final_perf,
            min_perf: a.min_perf,
            perpetual_accuracy: a.perpetual_accuracy,
            monotone: a.monotone,
            quasi_monotone: a.quasi_monotone,
            strict_until_eps: a.strict_until_eps,
            success,
        };
        Ok((summary, rows))
    };

    let mut trials = Vec::with_capacity(cfg.trials);
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + chunk).min(cfg.trials);
        let results: Vec<Result<(TrialSummary, Vec<Row>)>> =
            pool.install(|| (start..end).into_par_iter().map(run_trial).collect());
        for r in results {
            let (s, rows) = r?;
            sink(rows)?;
            trials.push(s);
        }
        start = end;
    }
    let successes = trials.iter().filter(|t| t.success).count();
    Ok(ExperimentSummary {
        config: embedded_config(cfg),
        parameters: params,
        horizon,
        success_rate: successes as f64 / trials.len() as f64,
        successes,
        trials,
    })
}
