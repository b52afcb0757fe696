use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{CsqAlgorithm, Hypothesis};
use crate::distributions::ExamplePoint;
use crate::engine::{EvolutionAlgorithm, NeighborSet, PerformanceOracle};
use crate::{ceil_snapped, Error, Result};

/// Query trees with more nodes than this use the learner's declared bound.
const MAX_ENUMERATED_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionParameters {
    pub epsilon: f64,
    pub queries: usize,
    /// Answer tolerance of the learner.
    pub tau: f64,
    /// Largest tolerance used by any representation.
    pub max_tolerance: f64,
    /// Number of backslide stages.
    pub stages: u64,
    /// Weight of the self-loop in simulating states.
    pub eta: f64,
    /// Estimate accuracy needed for exact selection.
    pub estimate_accuracy: f64,
    pub sample_size: u64,
    /// Drift rate under which evolution stays accurate.
    pub drift: f64,
    pub generations: u64,
}

impl ReductionParameters {
    pub fn derive(epsilon: f64, queries: usize, tau: f64, max_tolerance: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be in (0, 1)")));
        }
        if queries == 0 || !(tau > 0.0) || !(max_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need q >= 1, tau > 0, tolerance bound > 0 (got {queries}, {tau}, {max_tolerance})"
            )));
        }
        let q = queries as f64;
        let stages = ceil_snapped(2.0 / max_tolerance) as u64;
        let k = stages as f64;
        let eta = epsilon / (4.0 * q + 2.0 * k);
        let estimate_accuracy = (epsilon * tau / (2.0 * q)).min(max_tolerance / 8.0);
        let s = ((6.0 * q + 3.0 * k) / epsilon).ln() / (2.0 * estimate_accuracy * estimate_accuracy);
        Ok(ReductionParameters {
            epsilon,
            queries,
            tau,
            max_tolerance,
            stages,
            eta,
            estimate_accuracy,
            sample_size: ceil_snapped(s) as u64,
            drift: epsilon * tau / (4.0 * q + 2.0 * k + 2.0),
            generations: 2 * queries as u64 + stages + 1,
        })
    }

    /// The backslide argument needs drift of at most a quarter of the tolerance bound.
    pub fn drift_within_backslide_bound(&self) -> bool {
        self.drift <= self.max_tolerance / 4.0
    }
}

/// Answer prefix `z` with hypothesis `h`. Once `z` has all `q` answers the
/// representation is in backslide stage `k`, scaled by `1 - k tu / 2`
/// (zero at the last stage).
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRep<H> {
    pub h: Hypothesis<H>,
    pub z: Vec<bool>,
    pub stage: u64,
}

impl<H> ReductionRep<H> {
    pub fn start(h: Hypothesis<H>) -> Self {
        ReductionRep { h, z: Vec::new(), stage: 0 }
    }
}

impl<H: fmt::Debug> fmt::Display for ReductionRep<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: String = self.z.iter().map(|&b| if b { '1' } else { '0' }).collect();
        match &self.h {
            Hypothesis::Zero => write!(f, "h=0;z={z};k={}", self.stage),
            Hypothesis::Learned(h) => write!(f, "h={h:?};z={z};k={}", self.stage),
        }
    }
}

/// Evolution algorithm simulating a [`CsqAlgorithm`].
#[derive(Debug, Clone)]
pub struct Reduction<A> {
    algo: A,
    params: ReductionParameters,
    quasi_monotonic: bool,
}

impl<A: CsqAlgorithm> Reduction<A> {
    /// `algo` must reach accuracy `epsilon / 4` from valid answers.
    pub fn new(algo: A, epsilon: f64, quasi_monotonic: bool) -> Result<Self> {
        let q = algo.query_count();
        if q == 0 {
            return Err(Error::InvalidAlgorithm("learner asks no queries".into()));
        }
        let tau = algo.tolerance();
        if !(tau > 0.0) {
            return Err(Error::InvalidAlgorithm(format!("tolerance {tau} must be positive")));
        }
        let max_theta = if (1usize << q.min(40)) * 2 <= MAX_ENUMERATED_NODES {
            Some(max_threshold(&algo, &mut Vec::new())?)
        } else {
            None
        };
        let max_tolerance = match (max_theta, algo.declared_tolerance_bound(epsilon)) {
            (Some(t), _) => epsilon * t / (8.0 * q as f64),
            (None, Some(b)) => b,
            (None, None) => {
                return Err(Error::InvalidAlgorithm(
                    "query tree too large to enumerate and no declared tolerance bound".into(),
                ))
            }
        };
        let params = ReductionParameters::derive(epsilon, q, tau, max_tolerance)?;
        Ok(Reduction { algo, params, quasi_monotonic })
    }

    pub fn params(&self) -> &ReductionParameters {
        &self.params
    }

    pub fn algo(&self) -> &A {
        &self.algo
    }

    pub fn is_quasi_monotonic(&self) -> bool {
        self.quasi_monotonic
    }

    fn scale(&self, stage: u64) -> f64 {
        if stage >= self.params.stages {
            0.0
        } else {
            (1.0 - stage as f64 * self.params.max_tolerance / 2.0).max(0.0)
        }
    }

    fn advance(&self, rep: &ReductionRep<A::Hypothesis>, bit: bool) -> ReductionRep<A::Hypothesis> {
        let mut z = rep.z.clone();
        z.push(bit);
        ReductionRep { h: rep.h.clone(), z, stage: 0 }
    }

    fn restart(&self, h: Hypothesis<A::Hypothesis>) -> ReductionRep<A::Hypothesis> {
        ReductionRep::start(h)
    }

    /// A representation with `z` the full answer string (stage 0).
    pub fn completed(&self, h: Hypothesis<A::Hypothesis>, z: Vec<bool>) -> Result<ReductionRep<A::Hypothesis>> {
        if z.len() != self.params.queries {
            return Err(Error::InvalidParameter(format!("answer string must have length {}", self.params.queries)));
        }
        Ok(ReductionRep { h, z, stage: 0 })
    }

    /// Random representation: random (or zero) hypothesis, random prefix,
    /// random stage when the prefix is complete.
    pub fn random_rep(&self, rng: &mut dyn RngCore) -> ReductionRep<A::Hypothesis> {
        let q = self.params.queries;
        let h = if rng.random_bool(0.2) {
            Hypothesis::Zero
        } else {
            let answers: Vec<bool> = (0..q).map(|_| rng.random()).collect();
            Hypothesis::Learned(self.algo.hypothesis(&answers))
        };
        let len = rng.random_range(0..=q);
        let z: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        let stage = if len == q { rng.random_range(0..=self.params.stages) } else { 0 };
        ReductionRep { h, z, stage }
    }

    fn hyp_correlation(&self, h: &Hypothesis<A::Hypothesis>, target: &A::Target) -> f64 {
        match h {
            Hypothesis::Zero => 0.0,
            Hypothesis::Learned(h) => self.algo.hypothesis_correlation(h, target),
        }
    }

    fn hyp_value(&self, h: &Hypothesis<A::Hypothesis>, x: &ExamplePoint) -> f64 {
        match h {
            Hypothesis::Zero => 0.0,
            Hypothesis::Learned(h) => self.algo.hypothesis_value(h, x),
        }
    }
}

fn max_threshold<A: CsqAlgorithm>(algo: &A, prefix: &mut Vec<bool>) -> Result<f64> {
    if prefix.len() == algo.query_count() {
        return Ok(f64::NEG_INFINITY);
    }
    let theta = algo.threshold(prefix);
    if !(theta >= algo.tolerance()) || theta != algo.threshold(prefix) {
        return Err(Error::InvalidAlgorithm(format!(
            "threshold {theta} after {} answers is below tolerance {} or not deterministic",
            prefix.len(),
            algo.tolerance()
        )));
    }
    let mut best = theta;
    for bit in [false, true] {
        prefix.push(bit);
        best = best.max(max_threshold(algo, prefix)?);
        prefix.pop();
    }
    Ok(best)
}

impl<A: CsqAlgorithm> PerformanceOracle for Reduction<A> {
    type Target = A::Target;
    type Rep = ReductionRep<A::Hypothesis>;

    fn performance(&self, target: &A::Target, rep: &Self::Rep) -> f64 {
        let scale = self.scale(rep.stage);
        if scale == 0.0 {
            return 0.0;
        }
        let eps = self.params.epsilon;
        let mut phi = 0.0;
        for j in 0..rep.z.len() {
            if rep.z[j] {
                phi += self.algo.query_correlation(&rep.z[..j], target);
            }
        }
        phi /= self.params.queries as f64;
        scale * ((1.0 - eps / 2.0) * self.hyp_correlation(&rep.h, target) + eps / 2.0 * phi)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        self.algo.sample_point(rng)
    }

    fn target_value(&self, target: &A::Target, x: &ExamplePoint) -> f64 {
        self.algo.target_value(target, x)
    }

    fn rep_value(&self, rep: &Self::Rep, x: &ExamplePoint) -> f64 {
        let scale = self.scale(rep.stage);
        if scale == 0.0 {
            return 0.0;
        }
        let eps = self.params.epsilon;
        let mut phi = 0.0;
        for j in 0..rep.z.len() {
            if rep.z[j] {
                phi += self.algo.query_value(&rep.z[..j], x);
            }
        }
        phi /= self.params.queries as f64;
        scale * ((1.0 - eps / 2.0) * self.hyp_value(&rep.h, x) + eps / 2.0 * phi)
    }
}

impl<A: CsqAlgorithm> EvolutionAlgorithm for Reduction<A> {
    fn neighborhood(&self, rep: &Self::Rep, _rng: &mut dyn RngCore) -> Result<NeighborSet<Self::Rep>> {
        let q = self.params.queries;
        let eta = self.params.eta;
        let big_k = self.params.stages;
        if rep.z.len() > q || (rep.z.len() < q && rep.stage != 0) || rep.stage > big_k {
            return Err(Error::InvalidParameter(format!("malformed representation {rep:?}")));
        }
        if rep.z.len() < q {
            let half = (1.0 - eta) / 2.0;
            return NeighborSet::merged(
                rep.clone(),
                eta,
                vec![(self.advance(rep, false), half), (self.advance(rep, true), half)],
            );
        }
        let reset = self.restart(Hypothesis::Zero);
        if rep.stage == big_k {
            return NeighborSet::merged(rep.clone(), eta, vec![(reset, 1.0 - eta)]);
        }
        let next = ReductionRep { stage: rep.stage + 1, ..rep.clone() };
        let adopt = self.restart(Hypothesis::Learned(self.algo.hypothesis(&rep.z)));
        let others = if self.quasi_monotonic {
            let keep = self.restart(rep.h.clone());
            let w = (eta - eta * eta) / 2.0;
            vec![(next, w), (adopt, w), (keep, 1.0 - eta)]
        } else {
            vec![(next, eta - eta * eta), (adopt, 1.0 - eta)]
        };
        NeighborSet::merged(rep.clone(), eta * eta, others)
    }

    fn tolerance(&self, rep: &Self::Rep) -> f64 {
        if rep.z.len() < self.params.queries {
            self.params.epsilon * self.algo.threshold(&rep.z) / (8.0 * self.params.queries as f64)
        } else {
            self.params.max_tolerance
        }
    }

    fn low_probability_threshold(&self) -> Option<f64> {
        Some(2.0 * self.params.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjunctions::Conjunction;
    use crate::csq::CoordinateQueryLearner;

    /// Adaptive learner with large thresholds, for parameter arithmetic.
    struct Fixed {
        q: usize,
        tau: f64,
        theta: f64,
    }

    impl CsqAlgorithm for Fixed {
        type Hypothesis = u8;
        type Target = ();
        fn query_count(&self) -> usize {
            self.q
        }
        fn tolerance(&self) -> f64 {
            self.tau
        }
        fn threshold(&self, prefix: &[bool]) -> f64 {
            if prefix.first() == Some(&true) {
                self.theta
            } else {
                self.tau
            }
        }
        fn query_value(&self, _: &[bool], _: &ExamplePoint) -> f64 {
            0.0
        }
        fn query_correlation(&self, _: &[bool], _: &()) -> f64 {
            0.0
        }
        fn hypothesis(&self, _: &[bool]) -> u8 {
            0
        }
        fn hypothesis_value(&self, _: &u8, _: &ExamplePoint) -> f64 {
            0.0
        }
        fn hypothesis_correlation(&self, _: &u8, _: &()) -> f64 {
            0.0
        }
        fn sample_point(&self, _: &mut dyn RngCore) -> ExamplePoint {
            ExamplePoint(vec![])
        }
        fn target_value(&self, _: &(), _: &ExamplePoint) -> f64 {
            0.0
        }
    }

    #[test]
    fn parameters_from_enumerated_thresholds() {
        let r = Reduction::new(Fixed { q: 4, tau: 0.1, theta: 0.5 }, 0.25, false).unwrap();
        let p = r.params();
        assert_eq!(p.max_tolerance, 0.00390625);
        assert_eq!(p.stages, 512);
        assert!((p.eta - 2.4038e-4).abs() < 1e-8);
        assert_eq!(p.generations, 8 + 512 + 1);
        assert!(p.drift_within_backslide_bound());
    }

    #[test]
    fn toy_learner_drift_within_backslide_bound() {
        for n in 1..=8 {
            let r = Reduction::new(crate::csq::CoordinateQueryLearner::new(n).unwrap(), 0.25, false).unwrap();
            assert!(r.params().drift_within_backslide_bound(), "n = {n}");
        }
    }

    #[test]
    fn threshold_below_tolerance_rejected() {
        assert!(matches!(
            Reduction::new(Fixed { q: 3, tau: 0.1, theta: 0.05 }, 0.25, false),
            Err(Error::InvalidAlgorithm(_))
        ));
    }

    #[test]
    fn neighborhood_weights() {
        let red = Reduction::new(CoordinateQueryLearner::new(3).unwrap(), 0.25, false).unwrap();
        let eta = red.params().eta;
        let mut rng = rand::rng();
        let s = red.neighborhood(&ReductionRep::start(Hypothesis::Zero), &mut rng).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.total_weight() - 1.0).abs() < 1e-15);
        assert_eq!(s.weights()[0], eta);

        let h = Conjunction::monotone(&[1], 3).unwrap();
        let w = red.completed(Hypothesis::Learned(h), vec![true, false, true]).unwrap();
        let s = red.neighborhood(&w, &mut rng).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.total_weight() - 1.0).abs() < 1e-15);
        assert_eq!(s.members()[1].stage, 1);
        assert_eq!(s.members()[2].h, Hypothesis::Learned(Conjunction::monotone(&[1, 3], 3).unwrap()));

        let last = ReductionRep { stage: red.params().stages, ..w.clone() };
        let s = red.neighborhood(&last, &mut rng).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.members()[1], ReductionRep::start(Hypothesis::Zero));
    }

    #[test]
    fn quasi_neighborhood_merges_equal_hypotheses() {
        let red = Reduction::new(CoordinateQueryLearner::new(3).unwrap(), 0.25, true).unwrap();
        let h = Conjunction::monotone(&[1, 3], 3).unwrap();
        let w = red.completed(Hypothesis::Learned(h), vec![true, false, true]).unwrap();
        let s = red.neighborhood(&w, &mut rand::rng()).unwrap();
        // adopting h_z and keeping h coincide
        assert_eq!(s.len(), 3);
        assert!((s.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_performance_matches_cube_average() {
        let n = 4;
        let red = Reduction::new(CoordinateQueryLearner::new(n).unwrap(), 0.25, false).unwrap();
        let f = Conjunction::monotone(&[2, 4], n).unwrap();
        let reps = [
            ReductionRep::start(Hypothesis::Zero),
            ReductionRep { h: Hypothesis::Learned(Conjunction::monotone(&[1], n).unwrap()), z: vec![true, true], stage: 0 },
            ReductionRep { h: Hypothesis::Learned(f), z: vec![false, true, false, true], stage: 37 },
        ];
        for rep in reps {
            let mut avg = 0.0;
            for m in 0..16u32 {
                let x = ExamplePoint((0..n).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect());
                avg += red.target_value(&f, &x) * red.rep_value(&rep, &x);
            }
            avg /= 16.0;
            assert!((avg - red.performance(&f, &rep)).abs() < 1e-14, "{rep}");
        }
    }
}
