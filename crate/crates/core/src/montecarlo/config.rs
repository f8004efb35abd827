use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::TailModel;

pub const SCHEMA_VERSION: u32 = 1;

/// How the outer fraction `k` is derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `k = floor(f * n)`
    FixedFraction(f64),
    /// `k = floor(n^e)`
    Power(f64),
    Explicit(usize),
}

impl Default for KRule {
    fn default() -> Self {
        KRule::FixedFraction(0.5)
    }
}

impl KRule {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match *self {
            KRule::FixedFraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::Config(format!("fixed_fraction must lie in (0, 1), got {f}")));
                }
                (f * n as f64).floor() as usize
            }
            KRule::Power(e) => {
                if !(e > 0.0 && e < 1.0) {
                    return Err(Error::Config(format!("power exponent must lie in (0, 1), got {e}")));
                }
                (n as f64).powf(e).floor() as usize
            }
            KRule::Explicit(k) => k,
        };
        if k < 2 || k >= n {
            return Err(Error::Config(format!("k = {k} is infeasible for n = {n} (need 2 <= k < n)")));
        }
        Ok(k)
    }
}

/// How the inner fraction `k0` is derived from `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum K0Rule {
    /// MSE-optimal `k0` from the true `(gamma, rho, c)` of the model, at
    /// `alpha = 1`; falls back to `OptimalRate` where the formula is singular.
    TheoremOpt,
    /// `k0 = floor(k^(2γ/(2γ+1)))` with the model's true `gamma`.
    OptimalRate,
    /// `k0 = floor(k^e)`
    Power(f64),
    Explicit(usize),
    /// Every `k0` in `lo, lo + step, ..., <= hi` that satisfies `1 <= k0 < k`.
    Sweep { lo: usize, hi: usize, step: usize },
}

impl Default for K0Rule {
    fn default() -> Self {
        K0Rule::Power(0.75)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha0Mode {
    /// `alpha0` evaluated at the model's true `gamma`.
    #[default]
    OracleTrueGamma,
    /// `alpha0` evaluated per replication at the Fraga Alves pilot estimate.
    PilotPlugin,
}

fn default_alphas() -> Vec<f64> {
    vec![1.0]
}

fn default_level() -> f64 {
    0.95
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// One simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub model: TailModel,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub k_rule: KRule,
    #[serde(default)]
    pub k0_rule: K0Rule,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub alpha0_mode: Alpha0Mode,
}

impl ExperimentConfig {
    pub fn new(model: TailModel, n_values: Vec<usize>, replications: usize, base_seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model,
            n_values,
            replications,
            base_seed,
            k_rule: KRule::default(),
            k0_rule: K0Rule::default(),
            alphas: default_alphas(),
            level: default_level(),
            alpha0_mode: Alpha0Mode::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values is empty".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 50) {
            return Err(Error::Config(format!("every n must be at least 50, got {n}")));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 1.0) || !a.is_finite()) {
            return Err(Error::Config(format!("every alpha must be >= 1, got {a}")));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if let K0Rule::Sweep { lo, hi, step } = self.k0_rule {
            if step == 0 || lo == 0 || lo > hi {
                return Err(Error::Config(format!("bad sweep lo = {lo}, hi = {hi}, step = {step}")));
            }
        }
        for &n in &self.n_values {
            let k = self.k_rule.resolve(n)?;
            if !matches!(self.k0_rule, K0Rule::Sweep { .. }) {
                crate::montecarlo::resolve_k0(&self.k0_rule, &self.model, k, n)?;
            }
        }
        Ok(())
    }
}
