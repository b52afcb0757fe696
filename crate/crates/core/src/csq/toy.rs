use rand::RngCore;

use super::CsqAlgorithm;
use crate::conjunctions::{self, Conjunction};
use crate::distributions::{DistributionSpec, ExamplePoint};
use crate::{Error, Result};

/// Learns a monotone conjunction over `{-1, 1}^n` with `n` fixed queries.
///
/// Query `j` is `phi_j(x) = (x_j - [x = 1^n]) / 2` with threshold
/// `tau = 2^(-n-2)`. Against a monotone target its correlation is `2 tau`
/// or more when `x_j` is in the target and `-2 tau` otherwise, so every
/// answer is forced and the answer string is the target's indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateQueryLearner {
    n: usize,
    tau: f64,
    distribution: DistributionSpec,
}

impl CoordinateQueryLearner {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::InvalidParameter(format!("n = {n} must be in 1..=30")));
        }
        Ok(CoordinateQueryLearner {
            n,
            tau: (-(n as f64) - 2.0).exp2(),
            distribution: DistributionSpec::UniformHypercube { n },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl CsqAlgorithm for CoordinateQueryLearner {
    type Hypothesis = Conjunction;
    type Target = Conjunction;

    fn query_count(&self) -> usize {
        self.n
    }
    fn tolerance(&self) -> f64 {
        self.tau
    }
    fn threshold(&self, _prefix: &[bool]) -> f64 {
        self.tau
    }
    fn query_value(&self, prefix: &[bool], x: &ExamplePoint) -> f64 {
        let corner = if x.iter().all(|&v| v > 0.0) { 1.0 } else { 0.0 };
        (x[prefix.len()] - corner) / 2.0
    }
    fn query_correlation(&self, prefix: &[bool], target: &Conjunction) -> f64 {
        let j = prefix.len() as i32 + 1;
        let lits = target.literals();
        let mass = (1.0 - target.len() as f64).exp2();
        let coord = if lits.contains(&j) {
            mass
        } else if lits.contains(&-j) {
            -mass
        } else {
            0.0
        };
        let at_corner = if target.is_monotone() { 1.0 } else { -1.0 };
        (coord - (-(self.n as f64)).exp2() * at_corner) / 2.0
    }
    fn hypothesis(&self, answers: &[bool]) -> Conjunction {
        let vars: Vec<usize> = answers.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i + 1).collect();
        Conjunction::monotone(&vars, self.n).expect("answers fit in n")
    }
    fn hypothesis_value(&self, h: &Conjunction, x: &ExamplePoint) -> f64 {
        h.value(x)
    }
    fn hypothesis_correlation(&self, h: &Conjunction, target: &Conjunction) -> f64 {
        conjunctions::performance(target, h)
    }
    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        self.distribution.sample(rng)
    }
    fn target_value(&self, target: &Conjunction, x: &ExamplePoint) -> f64 {
        target.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csq::check_consistency;

    fn cube(n: usize) -> Vec<ExamplePoint> {
        (0..1u64 << n)
            .map(|m| ExamplePoint((0..n).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()))
            .collect()
    }

    #[test]
    fn correlations_match_cube_average() {
        let n = 5;
        let learner = CoordinateQueryLearner::new(n).unwrap();
        let pts = cube(n);
        for t in ["", "2", "1,3,5", "-2,4", "1,2,3,4,5"] {
            let f = Conjunction::parse(t, n).unwrap();
            for j in 0..n {
                let prefix = vec![false; j];
                let avg: f64 = pts.iter().map(|x| learner.query_value(&prefix, x) * f.value(x)).sum::<f64>()
                    / pts.len() as f64;
                assert!((avg - learner.query_correlation(&prefix, &f)).abs() < 1e-15, "{t} j={j}");
            }
        }
    }

    #[test]
    fn indicator_is_the_only_valid_answer() {
        let n = 4;
        let learner = CoordinateQueryLearner::new(n).unwrap();
        let f = Conjunction::monotone(&[2, 3], n).unwrap();
        let mut valid = Vec::new();
        for m in 0..16u32 {
            let z: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
            if check_consistency(&z, &f, &learner).unwrap().is_none() {
                valid.push(z);
            }
        }
        assert_eq!(valid, vec![vec![false, true, true, false]]);
        assert_eq!(learner.hypothesis(&valid[0]), f);
    }
}
