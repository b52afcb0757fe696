use driftevo_core::conjunctions::{Conjunction, ConjunctionEvolution};
use driftevo_core::csq::{check_consistency, CoordinateQueryLearner, CsqAlgorithm, Hypothesis, Reduction, ReductionRep};
use driftevo_core::drift::{ConstantSchedule, DriftPolicy};
use driftevo_core::engine::{
    analyze_trajectory, run_evolution, convergence_parameters, EngineConfig, EstimationMode, NoiseKind, SelectionClass,
};
use driftevo_core::hyperplanes::{RotationDrift, RotationEvolution, UnitNormal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rotation_below_half_eps_always_improves() {
    let (n, eps) = (4, 0.3);
    let alg = RotationEvolution::new(n, eps).unwrap();
    let p = convergence_parameters(alg.benefit(), alg.neighborhood_bound(), eps, false).unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = UnitNormal::random(n, &mut rng);
        let r0 = UnitNormal::random(n, &mut rng);
        let mut sched = ConstantSchedule::new(f);
        let tr = run_evolution(&alg, &mut sched, r0, &EngineConfig::oracle(p.generations as usize), &mut rng).unwrap();
        for w in tr.generations.windows(2) {
            if w[0].perf_exact < 1.0 - eps / 2.0 {
                assert_eq!(w[1].selection, Some(SelectionClass::Beneficial));
                assert!(w[1].perf_exact - w[0].perf_exact >= p.tolerance - 1e-12);
            }
        }
        let a = analyze_trajectory(&tr.perfs(), eps, Some(alg.benefit()), p.generations as usize);
        assert!(a.monotone);
        assert!(a.final_perf >= 1.0 - eps);
    }
}

#[test]
fn adversarial_noise_within_bound_keeps_convergence() {
    let (n, eps) = (3, 0.4);
    let alg = RotationEvolution::new(n, eps).unwrap();
    let p = convergence_parameters(alg.benefit(), alg.neighborhood_bound(), eps, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = UnitNormal::random(n, &mut rng);
    let mut sched = RotationDrift::new(f, DriftPolicy::SteadyRotation, p.drift, None, 1).unwrap();
    let cfg = EngineConfig {
        mode: EstimationMode::BoundedNoise { bound: p.noise_bound(), kind: NoiseKind::Adversarial },
        ..EngineConfig::oracle(2 * p.generations as usize)
    };
    let r0 = UnitNormal::random(n, &mut rng);
    let tr = run_evolution(&alg, &mut sched, r0, &cfg, &mut rng).unwrap();
    let a = analyze_trajectory(&tr.perfs(), eps, None, p.generations as usize);
    assert_eq!(a.perpetual_accuracy, Some(1.0));
}

#[test]
fn sampling_mode_learns_short_conjunction() {
    let (n, eps) = (6, 0.3);
    let alg = ConjunctionEvolution::new(n, eps, true).unwrap();
    let f = Conjunction::monotone(&[2, 5], n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sched = ConstantSchedule::new(f);
    let cfg = EngineConfig { mode: EstimationMode::Sampling { sample_size: 20_000 }, ..EngineConfig::oracle(300) };
    let tr = run_evolution(&alg, &mut sched, Conjunction::empty(), &cfg, &mut rng).unwrap();
    assert!(tr.generations.last().unwrap().perf_exact >= 1.0 - eps);
}

#[test]
fn estimates_are_recorded_on_request() {
    let alg = ConjunctionEvolution::new(5, 0.3, true).unwrap();
    let mut sched = ConstantSchedule::new(Conjunction::monotone(&[1], 5).unwrap());
    let cfg = EngineConfig { record_estimates: true, record_reps: true, ..EngineConfig::oracle(3) };
    let tr = run_evolution(&alg, &mut sched, Conjunction::empty(), &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(tr.generations[1].estimates.len(), 6);
    assert_eq!(tr.reps.unwrap().len(), 4);
}

#[test]
fn reduction_finds_valid_answers_and_target() {
    let n = 3;
    let red = Reduction::new(CoordinateQueryLearner::new(n).unwrap(), 0.25, false).unwrap();
    let f = Conjunction::monotone(&[1, 3], n).unwrap();
    let cfg = EngineConfig { suppress_low_probability: true, record_reps: true, ..EngineConfig::oracle(n) };
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = ReductionRep::start(Hypothesis::Zero);
        let tr = run_evolution(&red, &mut ConstantSchedule::new(f), start, &cfg, &mut rng).unwrap();
        let end = &tr.final_rep;
        assert_eq!(end.z.len(), n);
        assert_eq!(check_consistency(&end.z, &f, red.algo()).unwrap(), None);
        assert_eq!(red.algo().hypothesis(&end.z).encode(), "1,3");
    }
}

#[test]
fn reduction_reaches_accuracy_from_zero() {
    let n = 3;
    let eps = 0.25;
    let red = Reduction::new(CoordinateQueryLearner::new(n).unwrap(), eps, false).unwrap();
    let g = red.params().generations as usize;
    let f = Conjunction::monotone(&[2], n).unwrap();
    let cfg = EngineConfig { suppress_low_probability: true, ..EngineConfig::oracle(2 * g) };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = red.random_rep(&mut rng);
    let tr = run_evolution(&red, &mut ConstantSchedule::new(f), start, &cfg, &mut rng).unwrap();
    let a = analyze_trajectory(&tr.perfs(), eps, None, g);
    assert_eq!(a.perpetual_accuracy, Some(1.0));
}
