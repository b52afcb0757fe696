//! Homogeneous halfspaces `x -> sign(v . x)` with unit normal `v`.
//!
//! Two learners: small rotations under the uniform sphere distribution, and
//! single-coordinate flips and shifts under an axis-aligned Gaussian.

use std::f64::consts::PI;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{random_unit_vector, DistributionSpec, ExamplePoint};
use crate::drift::{DriftPolicy, DriftSchedule};
use crate::engine::{EvolutionAlgorithm, NeighborSet, PerformanceOracle};
use crate::{Error, Result};

/// A unit-length normal vector. Normalized on construction.
#[derive(Clone, PartialEq)]
pub struct UnitNormal(Vec<f64>);

impl UnitNormal {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameter("normal must have dimension >= 1".into()));
        }
        if v.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("normal has non-finite entries".into()));
        }
        let norm = norm(&v);
        if norm < 1e-300 {
            return Err(Error::InvalidParameter("normal is the zero vector".into()));
        }
        Ok(UnitNormal(v.into_iter().map(|a| a / norm).collect()))
    }

    pub fn random(n: usize, rng: &mut dyn RngCore) -> Self {
        UnitNormal(random_unit_vector(n, rng))
    }

    /// Comma-separated decimals, e.g. `"0.6,0.8"`.
    pub fn parse(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        UnitNormal::new(v)
    }

    pub fn encode(&self) -> String {
        self.0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `sign(v . x)`, with `0` mapped to `+1`.
    pub fn value(&self, x: &[f64]) -> f64 {
        if dot(&self.0, x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Debug for UnitNormal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitNormal[{}]", self.encode())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(v: Vec<f64>) -> UnitNormal {
    let n = norm(&v);
    UnitNormal(v.into_iter().map(|a| a / n).collect())
}

/// `1 - 2 angle(f, r) / pi`: exact under any rotation-invariant distribution.
pub fn performance_spherical(f: &UnitNormal, r: &UnitNormal) -> f64 {
    1.0 - 2.0 * dot(&f.0, &r.0).clamp(-1.0, 1.0).acos() / PI
}

/// Maps a normal so that the Gaussian with scales `sigma` becomes spherical.
fn whiten(v: &UnitNormal, sigma: &[f64]) -> UnitNormal {
    normalized(v.0.iter().zip(sigma).map(|(a, s)| a * s).collect())
}

fn unwhiten(v: &UnitNormal, sigma: &[f64]) -> UnitNormal {
    normalized(v.0.iter().zip(sigma).map(|(a, s)| a / s).collect())
}

/// Exact performance under the axis-aligned Gaussian with scales `sigma`.
pub fn performance_product_normal(f: &UnitNormal, r: &UnitNormal, sigma: &[f64]) -> f64 {
    performance_spherical(&whiten(f, sigma), &whiten(r, sigma))
}

pub fn rotation_benefit_bound(n: usize, epsilon: f64) -> f64 {
    PI.powi(3) * n as f64 / (2.0 * epsilon)
}

pub fn rotation_neighborhood_bound(n: usize) -> f64 {
    (2 * n - 1) as f64
}

pub fn componentwise_benefit_bound(n: usize, epsilon: f64) -> f64 {
    144.0 * n as f64 / epsilon.powi(6)
}

pub fn componentwise_neighborhood_bound(n: usize, k: u32) -> f64 {
    let n = n as f64;
    8.0 * n.powi(2 * k as i32 + 1) + 2.0 * n
}

/// Orthonormal vectors completing `r` to a basis, from random Gaussian draws.
pub fn random_orthonormal_completion(r: &UnitNormal, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
    let n = r.dim();
    let mut basis: Vec<Vec<f64>> = vec![r.0.clone()];
    while basis.len() < n {
        let mut v = random_unit_vector(n, rng);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
            }
        }
        let l = norm(&v);
        if l > 1e-6 {
            basis.push(v.into_iter().map(|a| a / l).collect());
        }
    }
    basis.remove(0);
    basis
}

/// `r` plus `cos(a) r +- sin(a) u` for each `u` in a random orthonormal
/// completion, with `a = epsilon / (pi sqrt(n))`.
pub fn neighborhood_rotation(r: &UnitNormal, epsilon: f64, rng: &mut dyn RngCore) -> Result<NeighborSet<UnitNormal>> {
    let n = r.dim();
    let a = epsilon / (PI * (n as f64).sqrt());
    let (c, s) = (a.cos(), a.sin());
    let mut out = Vec::with_capacity(2 * n);
    for u in random_orthonormal_completion(r, rng) {
        for sign in [1.0, -1.0] {
            let v = r.0.iter().zip(&u).map(|(x, y)| c * x + sign * s * y).collect();
            out.push((normalized(v), 1.0));
        }
    }
    NeighborSet::new(r.clone(), 1.0, out)
}

/// Coordinate flips `r - 2 r_i e_i` and shifts `r +- j d e_i` (renormalized)
/// for `j = 1..=4 n^k`, `d = epsilon^2 / (12 n^k sqrt(n))`.
pub fn neighborhood_componentwise(r: &UnitNormal, epsilon: f64, k: u32) -> Result<NeighborSet<UnitNormal>> {
    let n = r.dim();
    let nk = (n as f64).powi(k as i32);
    let step = epsilon * epsilon / (12.0 * nk * (n as f64).sqrt());
    let count = (4.0 * nk).round() as usize;
    let mut out = Vec::with_capacity(n + 2 * n * count);
    for i in 0..n {
        if r.0[i] != 0.0 {
            let mut v = r.0.clone();
            v[i] = -v[i];
            out.push((UnitNormal(v), 1.0));
        }
    }
    for i in 0..n {
        for j in 1..=count {
            for sign in [1.0, -1.0] {
                let mut v = r.0.clone();
                v[i] += sign * j as f64 * step;
                if norm(&v) > 1e-12 {
                    out.push((normalized(v), 1.0));
                }
            }
        }
    }
    NeighborSet::new(r.clone(), 1.0, out)
}

/// Rotation learner under the uniform sphere distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationEvolution {
    pub n: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    distribution: DistributionSpec,
}

impl RotationEvolution {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        Self::with_tolerance(n, epsilon, 1.0 / (2.0 * rotation_benefit_bound(n, epsilon)))
    }

    pub fn with_tolerance(n: usize, epsilon: f64, tolerance: f64) -> Result<Self> {
        check(n, epsilon)?;
        Ok(RotationEvolution { n, epsilon, tolerance, distribution: DistributionSpec::UnitSphere { n } })
    }

    pub fn benefit(&self) -> f64 {
        rotation_benefit_bound(self.n, self.epsilon)
    }

    pub fn neighborhood_bound(&self) -> f64 {
        rotation_neighborhood_bound(self.n)
    }
}

fn check(n: usize, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be in (0, 1)")));
    }
    Ok(())
}

fn check_dim(v: &UnitNormal, n: usize) -> Result<()> {
    if v.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
    }
    Ok(())
}

impl PerformanceOracle for RotationEvolution {
    type Target = UnitNormal;
    type Rep = UnitNormal;

    fn performance(&self, target: &UnitNormal, rep: &UnitNormal) -> f64 {
        performance_spherical(target, rep)
    }
    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        self.distribution.sample(rng)
    }
    fn target_value(&self, target: &UnitNormal, x: &ExamplePoint) -> f64 {
        target.value(x)
    }
    fn rep_value(&self, rep: &UnitNormal, x: &ExamplePoint) -> f64 {
        rep.value(x)
    }
}

impl EvolutionAlgorithm for RotationEvolution {
    fn neighborhood(&self, rep: &UnitNormal, rng: &mut dyn RngCore) -> Result<NeighborSet<UnitNormal>> {
        check_dim(rep, self.n)?;
        neighborhood_rotation(rep, self.epsilon, rng)
    }
    fn tolerance(&self, _rep: &UnitNormal) -> f64 {
        self.tolerance
    }
}

/// Coordinate-wise learner under an axis-aligned Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentwiseEvolution {
    pub n: usize,
    pub epsilon: f64,
    pub k: u32,
    pub sigma: Vec<f64>,
    pub tolerance: f64,
    distribution: DistributionSpec,
}

impl ComponentwiseEvolution {
    pub fn new(sigma: Vec<f64>, k: u32, epsilon: f64) -> Result<Self> {
        let n = sigma.len();
        Self::with_tolerance(sigma, k, epsilon, 1.0 / (2.0 * componentwise_benefit_bound(n, epsilon)))
    }

    pub fn with_tolerance(sigma: Vec<f64>, k: u32, epsilon: f64, tolerance: f64) -> Result<Self> {
        let n = sigma.len();
        check(n, epsilon)?;
        let distribution = DistributionSpec::product_normal(sigma.clone(), k)?;
        Ok(ComponentwiseEvolution { n, epsilon, k, sigma, tolerance, distribution })
    }

    pub fn benefit(&self) -> f64 {
        componentwise_benefit_bound(self.n, self.epsilon)
    }

    pub fn neighborhood_bound(&self) -> f64 {
        componentwise_neighborhood_bound(self.n, self.k)
    }
}

impl PerformanceOracle for ComponentwiseEvolution {
    type Target = UnitNormal;
    type Rep = UnitNormal;

    fn performance(&self, target: &UnitNormal, rep: &UnitNormal) -> f64 {
        performance_product_normal(target, rep, &self.sigma)
    }
    fn sample_point(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        self.distribution.sample(rng)
    }
    fn target_value(&self, target: &UnitNormal, x: &ExamplePoint) -> f64 {
        target.value(x)
    }
    fn rep_value(&self, rep: &UnitNormal, x: &ExamplePoint) -> f64 {
        rep.value(x)
    }
}

impl EvolutionAlgorithm for ComponentwiseEvolution {
    fn neighborhood(&self, rep: &UnitNormal, _rng: &mut dyn RngCore) -> Result<NeighborSet<UnitNormal>> {
        check_dim(rep, self.n)?;
        neighborhood_componentwise(rep, self.epsilon, self.k)
    }
    fn tolerance(&self, _rep: &UnitNormal) -> f64 {
        self.tolerance
    }
}

/// Rotates the target by exactly `pi * delta` per step, so each step has
/// error exactly `delta`. With `sigma`, the rotation happens after whitening
/// so the error is exact under the matching Gaussian.
#[derive(Debug, Clone)]
pub struct RotationDrift {
    target: UnitNormal,
    /// Current target in whitened coordinates.
    white: Vec<f64>,
    direction: Vec<f64>,
    sigma: Option<Vec<f64>>,
    policy: DriftPolicy,
    angle: f64,
    rng: ChaCha8Rng,
}

impl RotationDrift {
    pub fn new(target: UnitNormal, policy: DriftPolicy, delta: f64, sigma: Option<Vec<f64>>, seed: u64) -> Result<Self> {
        if !matches!(policy, DriftPolicy::Constant | DriftPolicy::SteadyRotation | DriftPolicy::RandomWalk) {
            return Err(Error::InvalidParameter(format!("{policy:?} drift does not apply to hyperplanes")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::DriftInfeasible(format!("delta {delta} must be in [0, 1]")));
        }
        if policy != DriftPolicy::Constant && target.dim() < 2 {
            return Err(Error::DriftInfeasible("rotation needs n >= 2".into()));
        }
        if let Some(s) = &sigma {
            if s.len() != target.dim() {
                return Err(Error::DimensionMismatch { expected: target.dim(), got: s.len() });
            }
        }
        let white = match &sigma {
            Some(s) => whiten(&target, s).0,
            None => target.0.clone(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let direction = if target.dim() >= 2 {
            random_orthonormal_completion(&UnitNormal(white.clone()), &mut rng).swap_remove(0)
        } else {
            Vec::new()
        };
        Ok(RotationDrift { target, white, direction, sigma, policy, angle: PI * delta, rng })
    }
}

impl DriftSchedule for RotationDrift {
    type Target = UnitNormal;
    fn current(&self) -> &UnitNormal {
        &self.target
    }
    fn advance(&mut self) -> Result<bool> {
        if self.policy == DriftPolicy::Constant || self.angle == 0.0 {
            return Ok(false);
        }
        if self.policy == DriftPolicy::RandomWalk {
            self.direction = random_orthonormal_completion(&UnitNormal(self.white.clone()), &mut self.rng).swap_remove(0);
        }
        let (c, s) = (self.angle.cos(), self.angle.sin());
        let f: Vec<f64> = self.white.iter().zip(&self.direction).map(|(a, d)| c * a + s * d).collect();
        let d: Vec<f64> = self.white.iter().zip(&self.direction).map(|(a, d)| -s * a + c * d).collect();
        self.white = normalized(f).0;
        self.direction = normalized(d).0;
        self.target = match &self.sigma {
            Some(sig) => unwhiten(&UnitNormal(self.white.clone()), sig),
            None => UnitNormal(self.white.clone()),
        };
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::verify_drift_sequence;
    use crate::engine::empirical_performance;

    #[test]
    fn spherical_known_values() {
        let e1 = UnitNormal::new(vec![1.0, 0.0]).unwrap();
        let e2 = UnitNormal::new(vec![0.0, 3.0]).unwrap();
        let m1 = UnitNormal::new(vec![-1.0, 0.0]).unwrap();
        assert!((performance_spherical(&e1, &e1) - 1.0).abs() < 1e-15);
        assert!(performance_spherical(&e1, &e2).abs() < 1e-15);
        assert!((performance_spherical(&e1, &m1) + 1.0).abs() < 1e-15);
        assert_eq!(e2.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn zero_maps_to_positive() {
        let v = UnitNormal::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(v.value(&[0.0, 5.0]), 1.0);
        assert_eq!(v.value(&[-0.1, 5.0]), -1.0);
    }

    #[test]
    fn text_roundtrip() {
        let v = UnitNormal::parse("3,4").unwrap();
        assert_eq!(v.as_slice(), &[0.6, 0.8]);
        assert_eq!(UnitNormal::parse(&v.encode()).unwrap(), v);
        assert!(UnitNormal::parse("0,0").is_err());
        assert!(UnitNormal::parse("x").is_err());
    }

    #[test]
    fn product_normal_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = vec![1.0, 0.25, 0.5, 0.3];
        let alg = ComponentwiseEvolution::new(sigma.clone(), 1, 0.5).unwrap();
        let f = UnitNormal::new(vec![0.3, -0.9, 0.1, 0.4]).unwrap();
        let r = UnitNormal::new(vec![0.5, 0.2, -0.6, 0.1]).unwrap();
        let exact = performance_product_normal(&f, &r, &sigma);
        let est = empirical_performance(&alg, &f, &r, 200_000, &mut rng).unwrap();
        assert!((exact - est).abs() < 0.01, "{exact} vs {est}");
    }

    #[test]
    fn rotation_neighbors_at_fixed_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = UnitNormal::random(5, &mut rng);
        let eps = 0.2;
        let set = neighborhood_rotation(&r, eps, &mut rng).unwrap();
        assert_eq!(set.len(), 9);
        let a = eps / (PI * 5f64.sqrt());
        for m in &set.members()[1..] {
            assert!((dot(&m.0, &r.0) - a.cos()).abs() < 1e-12);
            assert!((norm(&m.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn componentwise_count() {
        let r = UnitNormal::new(vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let set = neighborhood_componentwise(&r, 0.5, 1).unwrap();
        // 4 flips, 2 * 4 * 16 shifts, plus r
        assert_eq!(set.len(), 4 + 128 + 1);
        assert!(set.len() as f64 <= componentwise_neighborhood_bound(4, 1));
    }

    #[test]
    fn parameter_values() {
        let b = rotation_benefit_bound(5, 0.2);
        assert!((1.0 / (2.0 * b) - 1.290e-3).abs() < 1e-6);
        assert!((1.0 / (16.0 * b) - 1.613e-4).abs() < 1e-6);
        let b = componentwise_benefit_bound(4, 0.5);
        assert!((1.0 / (2.0 * b) - 1.356e-5).abs() < 1e-8);
    }

    #[test]
    fn rotation_drift_error_is_delta() {
        for (policy, sigma) in [
            (DriftPolicy::SteadyRotation, None),
            (DriftPolicy::RandomWalk, None),
            (DriftPolicy::SteadyRotation, Some(vec![1.0, 0.25, 0.5, 0.3])),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let n = sigma.as_ref().map_or(5, |s: &Vec<f64>| s.len());
            let delta = 1.6e-4;
            let mut s = RotationDrift::new(UnitNormal::random(n, &mut rng), policy, delta, sigma.clone(), 3).unwrap();
            let mut seq = vec![s.current().clone()];
            for _ in 0..500 {
                assert!(s.advance().unwrap());
                seq.push(s.current().clone());
            }
            let perf = |a: &UnitNormal, b: &UnitNormal| match &sigma {
                Some(sig) => performance_product_normal(a, b, sig),
                None => performance_spherical(a, b),
            };
            let rep = verify_drift_sequence(&seq, perf, delta);
            assert!(rep.ok(), "{policy:?}");
            assert!((rep.max_err - delta).abs() < 1e-10);
        }
    }
}
