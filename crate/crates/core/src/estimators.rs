//! Order statistics and the tail-index estimators built on them.
//!
//! Indices follow the usual convention: `X_{n-i,n}` is the `(i+1)`-th largest
//! observation, so `i = 0` is the sample maximum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::ConfidenceInterval;
use crate::special::{gamma_positive, CompensatedSum};

/// A batch of finite observations, sorted ascending on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Parameter(format!("a sample needs at least 3 values, got {}", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("value at position {pos} is not finite")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending order statistics.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `X_{n-i,n}`.
    pub fn from_top(&self, i: usize) -> f64 {
        self.values[self.values.len() - 1 - i]
    }

    /// Affine image `scale * x + shift` of every observation.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Sample::new(self.values.iter().map(|v| scale * v + shift).collect())
    }
}

/// The two intermediate sequence values `(k0, k)`, `1 <= k0 < k < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FractionPair {
    pub k0: usize,
    pub k: usize,
}

impl FractionPair {
    pub fn new(k0: usize, k: usize) -> Self {
        Self { k0, k }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.k0 < 1 || self.k0 >= self.k || self.k >= n {
            return Err(Error::Bounds(format!(
                "need 1 <= k0 < k < n, got k0 = {}, k = {}, n = {n}",
                self.k0, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Hill,
    Moment,
    FragaAlves,
    NewFamily,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hill => "hill",
            Method::Moment => "moment",
            Method::FragaAlves => "fraga_alves",
            Method::NewFamily => "new_family",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point estimate with the tuning values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub method: Method,
    pub alpha: Option<f64>,
    pub k0: Option<usize>,
    pub k: usize,
    pub ci: Option<ConfidenceInterval>,
}

fn check_k(sample: &Sample, k: usize) -> Result<f64> {
    if k < 1 || k >= sample.len() {
        return Err(Error::Bounds(format!("need 1 <= k < n, got k = {k}, n = {}", sample.len())));
    }
    let threshold = sample.from_top(k);
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("threshold X_(n-k,n) = {threshold} must be positive")));
    }
    Ok(threshold)
}

fn log_moments(sample: &Sample, k: usize) -> Result<(f64, f64)> {
    let ln_threshold = check_k(sample, k)?.ln();
    let mut m1 = CompensatedSum::new();
    let mut m2 = CompensatedSum::new();
    for i in 0..k {
        let d = sample.from_top(i).ln() - ln_threshold;
        m1.add(d);
        m2.add(d * d);
    }
    Ok((m1.total() / k as f64, m2.total() / k as f64))
}

/// Hill estimator over the top `k` log-excesses.
///
/// The sum runs over `i = 0..k` with divisor `k` (some printings start the
/// sum at `i = 1`, which drops the maximum).
pub fn hill(sample: &Sample, k: usize) -> Result<f64> {
    Ok(log_moments(sample, k)?.0)
}

/// Dekkers–Einmahl–de Haan moment estimator.
pub fn moment(sample: &Sample, k: usize) -> Result<f64> {
    let (m1, m2) = log_moments(sample, k)?;
    if !(m2 > 0.0) {
        return Err(Error::Degenerate("second log-moment is zero".into()));
    }
    let gap = 1.0 - m1 * m1 / m2;
    if gap == 0.0 {
        return Err(Error::Degenerate("first and second log-moments are collinear".into()));
    }
    Ok(m1 + 1.0 - 0.5 / gap)
}

/// Location-invariant statistic
/// `M^(alpha)(k0, k) = (1/k0) Σ_{i<k0} ln^alpha[(X_{n-i} - X_{n-k}) / (X_{n-k0} - X_{n-k})]`.
pub fn m_alpha(sample: &Sample, fp: FractionPair, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    fp.check(sample.len())?;
    let threshold = sample.from_top(fp.k);
    let denom = sample.from_top(fp.k0) - threshold;
    if !(denom > 0.0) {
        return Err(Error::Tie(format!("X_(n-k0,n) == X_(n-k,n) at k0 = {}, k = {}", fp.k0, fp.k)));
    }
    let mut acc = CompensatedSum::new();
    for i in 0..fp.k0 {
        let log_ratio = ((sample.from_top(i) - threshold) / denom).ln();
        acc.add(if alpha == 1.0 { log_ratio } else { log_ratio.powf(alpha) });
    }
    Ok(acc.total() / fp.k0 as f64)
}

/// Fraga Alves' location- and scale-invariant Hill-type estimator; identical to
/// `m_alpha(sample, fp, 1)`.
pub fn fraga_alves(sample: &Sample, fp: FractionPair) -> Result<f64> {
    m_alpha(sample, fp, 1.0)
}

/// Fraga Alves' estimator wrapped as an [`Estimate`].
pub fn fraga_alves_estimate(sample: &Sample, fp: FractionPair) -> Result<Estimate> {
    Ok(Estimate {
        value: fraga_alves(sample, fp)?,
        method: Method::FragaAlves,
        alpha: None,
        k0: Some(fp.k0),
        k: fp.k,
        ci: None,
    })
}

/// `gamma_hat^(alpha)(k0, k) = Γ(alpha) / M^(alpha-1) · (M^(2 alpha) / Γ(2 alpha + 1))^(1/2)`.
pub fn gamma_hat_value(sample: &Sample, fp: FractionPair, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("gamma_hat requires alpha >= 1, got {alpha}")));
    }
    let m_double = m_alpha(sample, fp, 2.0 * alpha)?;
    if alpha == 1.0 {
        // M^(0) ≡ 1, Γ(1) = 1, Γ(3) = 2.
        return Ok((m_double / 2.0).sqrt());
    }
    let m_lower = m_alpha(sample, fp, alpha - 1.0)?;
    if !(m_lower > 0.0) {
        return Err(Error::Degenerate(format!("M^(alpha-1) is zero at alpha = {alpha}")));
    }
    Ok(gamma_positive(alpha) / m_lower * (m_double / gamma_positive(2.0 * alpha + 1.0)).sqrt())
}

pub fn gamma_hat(sample: &Sample, fp: FractionPair, alpha: f64) -> Result<Estimate> {
    Ok(Estimate {
        value: gamma_hat_value(sample, fp, alpha)?,
        method: Method::NewFamily,
        alpha: Some(alpha),
        k0: Some(fp.k0),
        k: fp.k,
        ci: None,
    })
}
