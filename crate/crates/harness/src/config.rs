//! Flat JSON experiment configuration.

use std::path::{Path, PathBuf};

use driftevo_core::drift::DriftPolicy;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MonotoneConj,
    GeneralConj,
    HyperplaneRotation,
    HyperplaneComponentwise,
    CsqReduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Oracle,
    NoiseUniform,
    NoiseAdversarial,
    Sampling,
}

/// Low-probability events in the reduction: suppressed (deterministic
/// selection among high-weight mutations) or full (plain sampling).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lpe {
    Suppressed,
    Full,
}

/// A generation count, or `"g"` / `"2g"` / `"theorem-default"` (= `"2g"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonSpec {
    Count(usize),
    Keyword(String),
}

impl HorizonSpec {
    pub fn resolve(&self, g: u64) -> Result<usize> {
        match self {
            HorizonSpec::Count(c) => Ok(*c),
            HorizonSpec::Keyword(k) => match k.as_str() {
                "g" => Ok(g as usize),
                "2g" | "theorem-default" => Ok(2 * g as usize),
                other => Err(HarnessError::Config(format!("unknown horizon {other:?}"))),
            },
        }
    }
}

fn default_n() -> usize {
    10
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_trials() -> usize {
    10
}
fn default_horizon() -> HorizonSpec {
    HorizonSpec::Keyword("theorem-default".into())
}
fn default_k() -> u32 {
    1
}
fn default_mode() -> ModeName {
    ModeName::Oracle
}
fn default_drift() -> DriftPolicy {
    DriftPolicy::Constant
}
fn default_lpe() -> Lpe {
    Lpe::Suppressed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    /// Noise magnitude; defaults to `1/(8b)`.
    #[serde(default)]
    pub noise_bound: Option<f64>,
    /// Samples per generation in sampling mode; defaults to the derived size.
    #[serde(default)]
    pub sample_size: Option<usize>,
    #[serde(default = "default_drift")]
    pub drift: DriftPolicy,
    /// Per-step drift budget; defaults to the derived rate.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub schedule_file: Option<PathBuf>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: HorizonSpec,
    #[serde(default)]
    pub seed: u64,
    /// Fixed target encoding; random per trial when absent.
    #[serde(default)]
    pub target: Option<String>,
    /// Length of random conjunction targets.
    #[serde(default)]
    pub target_length: Option<usize>,
    /// Fixed starting representation; random per trial when absent.
    #[serde(default)]
    pub initial: Option<String>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
    #[serde(default)]
    pub quasi_monotonic: bool,
    #[serde(default = "default_lpe")]
    pub lpe: Lpe,
    /// Overrides the derived tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_value(v).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} must be in (0, 1)", self.epsilon));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("delta {d} must be >= 0"));
            }
        }
        if self.drift == DriftPolicy::Scripted && self.schedule_file.is_none() {
            return bad("scripted drift needs schedule_file".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Read a JSON object from `path` (empty object when `None`).
pub fn load_object(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(HarnessError::Config(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(HarnessError::Config(format!("{}: {e}", path.display()))),
    }
}

/// Apply `key=value` overrides; values are parsed as JSON, falling back to a string.
pub fn apply_overrides(map: &mut Map<String, Value>, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override {s:?} is not key=value")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        map.insert(k.trim().to_string(), value);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_value(json!({"family": "monotone-conj"})).unwrap();
        assert_eq!(c.n, 10);
        assert_eq!(c.mode, ModeName::Oracle);
        assert_eq!(c.horizon.resolve(100).unwrap(), 200);
        assert_eq!(c.lpe, Lpe::Suppressed);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(ExperimentConfig::from_value(json!({"family": "monotone-conj", "bogus": 1})).is_err());
        assert!(ExperimentConfig::from_value(json!({"family": "monotone-conj", "epsilon": 1.5})).is_err());
        assert!(ExperimentConfig::from_value(json!({"family": "spline"})).is_err());
        assert!(ExperimentConfig::from_value(json!({"family": "monotone-conj", "drift": "scripted"})).is_err());
        assert!(HorizonSpec::Keyword("3g".into()).resolve(5).is_err());
    }

    #[test]
    fn overrides_parse_json_then_string() {
        let mut m = Map::new();
        apply_overrides(&mut m, &["n=12".into(), "family=general-conj".into(), "horizon=\"g\"".into()]).unwrap();
        assert_eq!(m["n"], json!(12));
        assert_eq!(m["family"], json!("general-conj"));
        assert_eq!(m["horizon"], json!("g"));
        assert!(apply_overrides(&mut m, &["oops".into()]).is_err());
    }
}
