//! Example distributions over `R^n`.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A single example `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamplePoint(pub Vec<f64>);

impl ExamplePoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Deref for ExamplePoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// Uniform over `{-1, +1}^n`.
    UniformHypercube { n: usize },
    /// Uniform over the unit sphere `S^{n-1}`.
    UnitSphere { n: usize },
    /// Axis-aligned Gaussian with per-coordinate scales in `[(1/n)^k, 1]`.
    ProductNormal { sigma: Vec<f64>, k: u32 },
}

impl DistributionSpec {
    pub fn product_normal(sigma: Vec<f64>, k: u32) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::InvalidParameter("product normal needs n >= 1".into()));
        }
        let lo = (1.0 / n as f64).powi(k as i32);
        for (i, &s) in sigma.iter().enumerate() {
            if !(s.is_finite() && s >= lo - 1e-15 && s <= 1.0 + 1e-15) {
                return Err(Error::InvalidParameter(format!(
                    "sigma[{i}] = {s} outside [{lo}, 1]"
                )));
            }
        }
        Ok(DistributionSpec::ProductNormal { sigma, k })
    }

    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::UniformHypercube { n } | DistributionSpec::UnitSphere { n } => *n,
            DistributionSpec::ProductNormal { sigma, .. } => sigma.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if let DistributionSpec::ProductNormal { sigma, k } = self {
            DistributionSpec::product_normal(sigma.clone(), *k)?;
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> ExamplePoint {
        match self {
            DistributionSpec::UniformHypercube { n } => ExamplePoint(
                (0..*n)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect(),
            ),
            DistributionSpec::UnitSphere { n } => ExamplePoint(random_unit_vector(*n, rng)),
            DistributionSpec::ProductNormal { sigma, .. } => ExamplePoint(
                sigma
                    .iter()
                    .map(|s| s * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            ),
        }
    }
}

/// Draw uniformly from the unit sphere by normalizing a Gaussian vector.
pub fn random_unit_vector(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hypercube_points_are_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = DistributionSpec::UniformHypercube { n: 7 };
        let mut ones = 0usize;
        for _ in 0..2000 {
            let x = d.sample(&mut rng);
            assert_eq!(x.dim(), 7);
            assert!(x.iter().all(|&v| v == 1.0 || v == -1.0));
            ones += x.iter().filter(|&&v| v == 1.0).count();
        }
        let frac = ones as f64 / 14000.0;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = DistributionSpec::UnitSphere { n: 5 };
        for _ in 0..500 {
            let x = d.sample(&mut rng);
            let norm: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_normal_band_enforced() {
        assert!(DistributionSpec::product_normal(vec![1.0, 0.25, 0.5, 0.3], 1).is_ok());
        assert!(DistributionSpec::product_normal(vec![1.0, 0.2, 0.5, 0.3], 1).is_err());
        assert!(DistributionSpec::product_normal(vec![1.1], 1).is_err());
        assert!(DistributionSpec::product_normal(vec![], 1).is_err());
    }

    #[test]
    fn product_normal_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = DistributionSpec::product_normal(vec![1.0, 0.5], 1).unwrap();
        let m = 20000;
        let mut var = [0.0f64; 2];
        for _ in 0..m {
            let x = d.sample(&mut rng);
            var[0] += x[0] * x[0];
            var[1] += x[1] * x[1];
        }
        assert!((var[0] / m as f64 - 1.0).abs() < 0.05);
        assert!((var[1] / m as f64 - 0.25).abs() < 0.01);
    }
}
