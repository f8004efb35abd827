//! Asymptotic confidence intervals for the tail index.

use serde::{Deserialize, Serialize};

use crate::asymptotics::v_alpha;
use crate::error::{Error, Result};
use crate::special::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CiMethod {
    /// `γ̃ / (1 ± z/√k0)` around the Fraga Alves estimate.
    FragaAlvesCI,
    /// `γ̂ / (1 ± z√(V_alpha/k0))` around the new-family estimate.
    NewFamilyCI,
}

/// Interval `[lower, upper]`; `upper == None` means unbounded above, which
/// happens when the half-width factor reaches 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: Option<f64>,
    pub level: f64,
    pub method: CiMethod,
}

impl ConfidenceInterval {
    pub fn is_bounded(&self) -> bool {
        self.upper.is_some()
    }

    /// `upper - lower`, or `None` if unbounded.
    pub fn length(&self) -> Option<f64> {
        self.upper.map(|u| u - self.lower)
    }

    /// Coverage rule: a bounded interval covers `x` if `lower <= x <= upper`;
    /// an unbounded one covers it if `x >= lower`.
    pub fn covers(&self, x: f64) -> bool {
        match self.upper {
            Some(u) => self.lower <= x && x <= u,
            None => x >= self.lower,
        }
    }
}

/// `z` with `1 - Φ(z) = theta_half`, for `0 < theta_half < 0.5`.
pub fn z_quantile(theta_half: f64) -> Result<f64> {
    if !(theta_half > 0.0 && theta_half < 0.5) {
        return Err(Error::Domain(format!("z_quantile requires 0 < theta_half < 0.5, got {theta_half}")));
    }
    Ok(-normal_quantile(theta_half)?)
}

fn check_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    z_quantile((1.0 - level) / 2.0)
}

fn ratio_interval(estimate: f64, k0: usize, variance_factor: f64, level: f64, method: CiMethod) -> Result<ConfidenceInterval> {
    if !(estimate > 0.0) || !estimate.is_finite() {
        return Err(Error::Domain(format!("point estimate must be positive, got {estimate}")));
    }
    if k0 < 1 {
        return Err(Error::Domain("k0 must be at least 1".into()));
    }
    let z = check_level(level)?;
    let half = (variance_factor / k0 as f64).sqrt() * z;
    let denom = 1.0 - half;
    Ok(ConfidenceInterval {
        lower: estimate / (1.0 + half),
        upper: if denom > 0.0 { Some(estimate / denom) } else { None },
        level,
        method,
    })
}

/// Interval built from the Fraga Alves estimate `gamma_tilde` at inner fraction `k0`.
pub fn ci_fraga_alves(gamma_tilde: f64, k0: usize, level: f64) -> Result<ConfidenceInterval> {
    ratio_interval(gamma_tilde, k0, 1.0, level, CiMethod::FragaAlvesCI)
}

/// Interval built from `gamma_hat^(alpha)`, scaled by `V_alpha`.
pub fn ci_new(gamma_hat: f64, k0: usize, alpha: f64, level: f64) -> Result<ConfidenceInterval> {
    ci_new_with_variance(gamma_hat, k0, v_alpha(alpha)?, level)
}

/// [`ci_new`] with an explicit variance factor; `v = 1` reproduces
/// [`ci_fraga_alves`] bit for bit (apart from the method tag).
pub fn ci_new_with_variance(gamma_hat: f64, k0: usize, v: f64, level: f64) -> Result<ConfidenceInterval> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("variance factor must be positive, got {v}")));
    }
    ratio_interval(gamma_hat, k0, v, level, CiMethod::NewFamilyCI)
}
