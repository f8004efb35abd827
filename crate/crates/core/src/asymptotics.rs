//! Closed-form asymptotic constants of the location-invariant estimator
//! family, the null-bias tuning value `alpha0`, and MSE-optimal choices of
//! the inner fraction `k0`.
//!
//! Notation: `gamma > 0` is the tail index, `rho < 0` the second-order
//! parameter (or `-inf` when `A ≡ 0`), and `A(t) ~ c t^rho`.

use crate::error::{Error, Result};
use crate::special::{bisect, gamma_positive, ln_gamma};

pub use crate::special::gamma_fn;

/// `(gamma, rho, c, alpha)` as used by the MSE and `k0` formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticContext {
    pub gamma: f64,
    pub rho: f64,
    pub c: Option<f64>,
    pub alpha: f64,
}

impl AsymptoticContext {
    pub fn new(gamma: f64, rho: f64, c: Option<f64>, alpha: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if rho.is_nan() || rho == f64::INFINITY || (rho.is_finite() && rho >= 0.0) {
            return Err(Error::Parameter(format!("rho must be negative or -inf, got {rho}")));
        }
        if let Some(c) = c {
            if !c.is_finite() {
                return Err(Error::Parameter(format!("c must be finite, got {c}")));
            }
            if !rho.is_finite() {
                return Err(Error::Parameter("c must be absent when rho = -inf".into()));
            }
        }
        Ok(Self { gamma, rho, c, alpha })
    }

    /// `gamma > -rho`: the second-order term enters the leading MSE.
    pub fn second_order_dominates(&self) -> bool {
        self.rho.is_finite() && self.gamma > -self.rho
    }

    fn require_c(&self) -> Result<f64> {
        if !self.rho.is_finite() {
            return Err(Error::Parameter("rho = -inf: no second-order term".into()));
        }
        match self.c {
            Some(c) if c != 0.0 => Ok(c),
            _ => Err(Error::Parameter("second-order constant c is missing or zero".into())),
        }
    }

    /// `c gamma b_alpha(-rho) / (gamma + rho)`, the coefficient of `(k0/n)^(-rho)`.
    fn second_order_coef(&self) -> Result<f64> {
        let c = self.require_c()?;
        Ok(c * self.gamma * bias_coef(self.alpha, -self.rho) / (self.gamma + self.rho))
    }
}

/// `sigma_alpha = sqrt(Γ(2 alpha + 1) - Γ(alpha + 1)^2)`.
pub fn sigma_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("sigma_alpha requires alpha > 0, got {alpha}")));
    }
    let g = gamma_positive(alpha + 1.0);
    Ok((gamma_positive(2.0 * alpha + 1.0) - g * g).max(0.0).sqrt())
}

/// `mu_beta(rho) / Γ(beta) = ((1 - rho)^(-beta) - 1) / rho`.
///
/// This is smooth in `beta` and vanishes at `beta = 0`, which gives the
/// `alpha = 1` value of the `mu_{alpha-1} / Γ(alpha-1)` term.
pub fn mu_over_gamma(beta: f64, rho: f64) -> Result<f64> {
    if !(rho < 1.0) || rho == 0.0 {
        return Err(Error::Domain(format!("mu requires rho < 1 and rho != 0, got {rho}")));
    }
    Ok((-beta * (-rho).ln_1p()).exp_m1() / rho)
}

/// `mu_alpha(rho) = (Γ(alpha)/rho) (1 - (1 - rho)^alpha) / (1 - rho)^alpha`.
pub fn mu_alpha(alpha: f64, rho: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("mu_alpha requires alpha > 0, got {alpha}")));
    }
    Ok(gamma_positive(alpha) * mu_over_gamma(alpha, rho)?)
}

/// Asymptotic variance factor
/// `V_alpha = ¼{Γ(4α)/(αΓ²(2α)) + 4Γ(2α-1)/Γ²(α) - 2Γ(3α)/(αΓ(α)Γ(2α)) - 1}`.
pub fn v_alpha(alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("v_alpha requires alpha >= 1, got {alpha}")));
    }
    let (t1, t2, t3) = if alpha <= 20.0 {
        let g1 = gamma_positive(alpha);
        let g2 = gamma_positive(2.0 * alpha);
        (
            gamma_positive(4.0 * alpha) / (alpha * g2 * g2),
            4.0 * gamma_positive(2.0 * alpha - 1.0) / (g1 * g1),
            2.0 * gamma_positive(3.0 * alpha) / (alpha * g1 * g2),
        )
    } else {
        let l1 = ln_gamma(alpha);
        let l2 = ln_gamma(2.0 * alpha);
        (
            (ln_gamma(4.0 * alpha) - 2.0 * l2).exp() / alpha,
            4.0 * (ln_gamma(2.0 * alpha - 1.0) - 2.0 * l1).exp(),
            2.0 * (ln_gamma(3.0 * alpha) - l1 - l2).exp() / alpha,
        )
    };
    Ok(0.25 * (t1 + t2 - t3 - 1.0))
}

/// `|b_alpha(gamma)|` at or below this is treated as the null-bias point.
pub const NULL_BIAS_TOL: f64 = 1e-12;

pub(crate) fn bias_coef(alpha: f64, gamma: f64) -> f64 {
    let l = gamma.ln_1p();
    ((1.0 - alpha) * l).exp() - 0.5 * (-2.0 * alpha * l).exp() - 0.5
}

/// Dominant bias coefficient `b_alpha(gamma) = (1+gamma)^(1-alpha) - ½(1+gamma)^(-2 alpha) - ½`.
pub fn b_alpha(alpha: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("b_alpha requires gamma >= 0, got {gamma}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("b_alpha requires finite alpha, got {alpha}")));
    }
    Ok(bias_coef(alpha, gamma))
}

/// Null-bias tuning value `alpha0(gamma) = ln(1+γ+sqrt((1+γ)²-1)) / ln(1+γ)`.
pub fn alpha0(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("alpha0 requires gamma > 0, got {gamma}")));
    }
    Ok((gamma + (gamma * (gamma + 2.0)).sqrt()).ln_1p() / gamma.ln_1p())
}

/// Root of `alpha -> b_alpha(gamma)` on `[1, 64]` by bisection; an independent
/// route to [`alpha0`]. Fails with a bracket error when `alpha0(gamma) > 64`
/// (`gamma` below roughly `3e-4`).
pub fn alpha0_bisect(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("alpha0_bisect requires gamma > 0, got {gamma}")));
    }
    bisect(|a| bias_coef(a, gamma), 1.0, 64.0, 0.0)
}

/// Asymptotic efficiency relative to the Fraga Alves estimator,
/// `V^(-γ/(2γ+1)) [γ / ((1+γ)|b_alpha(γ)|)]^(1/(2γ+1))`.
pub fn areff(alpha: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("areff requires gamma > 0, got {gamma}")));
    }
    let v = v_alpha(alpha)?;
    let b = bias_coef(alpha, gamma);
    if b.abs() <= NULL_BIAS_TOL {
        return Err(Error::NullBias { alpha, gamma });
    }
    let e = 2.0 * gamma + 1.0;
    Ok(v.powf(-gamma / e) * (gamma / ((1.0 + gamma) * b.abs())).powf(1.0 / e))
}

/// `(alpha, areff)` for `alpha = 1, 1 + step, ...` strictly below `alpha0(gamma)`.
pub fn areff_curve(gamma: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    let a0 = alpha0(gamma)?;
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let alpha = 1.0 + step * i as f64;
        if alpha >= a0 {
            break;
        }
        out.push((alpha, areff(alpha, gamma)?));
        i += 1;
    }
    Ok(out)
}

fn check_fractions(k0: f64, k: f64, n: f64) -> Result<()> {
    if !(k0 > 0.0 && k0 < k && k < n) || !n.is_finite() {
        return Err(Error::Parameter(format!("need 0 < k0 < k < n, got k0 = {k0}, k = {k}, n = {n}")));
    }
    Ok(())
}

/// Asymptotic MSE of `gamma_hat^(alpha)(k0, k)`.
///
/// For `gamma <= -rho` (including `rho = -inf`): `γ²V/k0 + b²(γ)(k0/k)^(2γ)`.
/// For `gamma > -rho` the second-order term joins the bias:
/// `γ²V/k0 + [b(γ)(k0/k)^γ - cγb(-ρ)/(γ+ρ) (k0/n)^(-ρ)]²`.
pub fn mse_asymptotic(ctx: &AsymptoticContext, k0: f64, k: f64, n: f64) -> Result<f64> {
    check_fractions(k0, k, n)?;
    let g = ctx.gamma;
    let variance = g * g * v_alpha(ctx.alpha)? / k0;
    let gamma_bias = bias_coef(ctx.alpha, g) * (k0 / k).powf(g);
    if !ctx.second_order_dominates() {
        return Ok(variance + gamma_bias * gamma_bias);
    }
    let bias = gamma_bias - ctx.second_order_coef()? * (k0 / n).powf(-ctx.rho);
    Ok(variance + bias * bias)
}

/// Log-correction remainder `γ b(γ) A(n/k) (k0/k)^γ ln(k0/k)` that appears when
/// `gamma + rho == 0`; `None` away from that boundary or without `c`.
/// Diagnostic only: `k0` selection ignores it.
pub fn boundary_log_term(ctx: &AsymptoticContext, k0: f64, k: f64, n: f64) -> Result<Option<f64>> {
    check_fractions(k0, k, n)?;
    if !ctx.rho.is_finite() || ctx.gamma + ctx.rho != 0.0 {
        return Ok(None);
    }
    let Some(c) = ctx.c else { return Ok(None) };
    let g = ctx.gamma;
    let a_nk = c * (n / k).powf(ctx.rho);
    Ok(Some(g * bias_coef(ctx.alpha, g) * a_nk * (k0 / k).powf(g) * (k0 / k).ln()))
}

/// `k0^(1) = [γV/(2b²(γ))]^(1/(2γ+1)) k^(2γ/(2γ+1))`, the minimizer of the
/// variance plus the `(k0/k)^γ` bias.
pub fn k0_opt1(ctx: &AsymptoticContext, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!("k must be positive, got {k}")));
    }
    let g = ctx.gamma;
    let b = bias_coef(ctx.alpha, g);
    if b.abs() <= NULL_BIAS_TOL {
        return Err(Error::NullBias { alpha: ctx.alpha, gamma: g });
    }
    let e = 2.0 * g + 1.0;
    Ok((g * v_alpha(ctx.alpha)? / (2.0 * b * b)).powf(1.0 / e) * k.powf(2.0 * g / e))
}

/// `k0^(2) = [(γ+ρ)²V / (-2c²ρ b²(-ρ))]^(1/(1-2ρ)) n^(-2ρ/(1-2ρ))`, the minimizer
/// of the variance plus the second-order bias.
pub fn k0_opt2(ctx: &AsymptoticContext, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Parameter(format!("n must be positive, got {n}")));
    }
    let c = ctx.require_c()?;
    let (g, r) = (ctx.gamma, ctx.rho);
    let b = bias_coef(ctx.alpha, -r);
    if b == 0.0 {
        return Err(Error::Parameter(format!("b_alpha(-rho) = 0 at alpha = {}, rho = {r}", ctx.alpha)));
    }
    if g + r == 0.0 {
        return Err(Error::Parameter("gamma + rho = 0".into()));
    }
    let e = 1.0 - 2.0 * r;
    let bracket = (g + r).powi(2) * v_alpha(ctx.alpha)? / (-2.0 * c * c * r * b * b);
    Ok(bracket.powf(1.0 / e) * n.powf(-2.0 * r / e))
}

/// `k0^(3) = [cγb(-ρ) / ((γ+ρ)b(γ))]^(1/(γ+ρ)) k^(γ/(γ+ρ)) n^(ρ/(γ+ρ))`, where
/// the two bias contributions cancel.
pub fn k0_opt3(ctx: &AsymptoticContext, k: f64, n: f64) -> Result<f64> {
    if !(k > 0.0 && n > 0.0) {
        return Err(Error::Parameter(format!("k and n must be positive, got {k}, {n}")));
    }
    if !ctx.second_order_dominates() {
        return Err(Error::Parameter("k0^(3) needs gamma > -rho".into()));
    }
    let c = ctx.require_c()?;
    let (g, r) = (ctx.gamma, ctx.rho);
    let b_g = bias_coef(ctx.alpha, g);
    let b_r = bias_coef(ctx.alpha, -r);
    if !(c * b_r * b_g > 0.0) {
        return Err(Error::Sign(format!("c * b_alpha(-rho) * b_alpha(gamma) = {} is not positive", c * b_r * b_g)));
    }
    let s = g + r;
    Ok((c * g * b_r / (s * b_g)).powf(1.0 / s) * k.powf(g / s) * n.powf(r / s))
}

/// Exponent `-ρ(2γ+1) / (γ(1-2ρ))` of the `k` threshold separating the regimes
/// when `gamma > -rho`.
pub fn regime_exponent(gamma: f64, rho: f64) -> f64 {
    -rho * (2.0 * gamma + 1.0) / (gamma * (1.0 - 2.0 * rho))
}

/// Ratio bounds that resolve "k much smaller / much larger than the threshold".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub below: f64,
    pub above: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { below: 0.1, above: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `gamma <= -rho` or `rho = -inf`.
    FirstOrderBias,
    /// `gamma > -rho` with `k` well below the threshold.
    KBelowThreshold,
    /// `gamma > -rho` with `k` well above the threshold.
    KAboveThreshold,
    /// `gamma > -rho` with `k` comparable to the threshold.
    KAtThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K0Branch {
    Opt1,
    Opt2,
    Opt3,
    /// `D1 n^(-2ρ/(1-2ρ))` with `k = D n^e`.
    Balanced { d: f64, d1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K0Choice {
    pub value: f64,
    pub branch: K0Branch,
    pub regime: Regime,
}

pub fn k0_opt_select(ctx: &AsymptoticContext, k: f64, n: f64) -> Result<K0Choice> {
    k0_opt_select_with(ctx, k, n, RegimeThresholds::default())
}

/// MSE-optimal `k0` following the regime case analysis; `k ≪ / ≫ / ∼`
/// threshold is decided by `r = k / n^e` against `thresholds`.
pub fn k0_opt_select_with(ctx: &AsymptoticContext, k: f64, n: f64, thresholds: RegimeThresholds) -> Result<K0Choice> {
    if !(k > 0.0 && k < n) {
        return Err(Error::Parameter(format!("need 0 < k < n, got k = {k}, n = {n}")));
    }
    if !ctx.second_order_dominates() {
        return Ok(K0Choice { value: k0_opt1(ctx, k)?, branch: K0Branch::Opt1, regime: Regime::FirstOrderBias });
    }
    let c = ctx.require_c()?;
    let r = k / n.powf(regime_exponent(ctx.gamma, ctx.rho));
    if r < thresholds.below {
        return Ok(K0Choice { value: k0_opt1(ctx, k)?, branch: K0Branch::Opt1, regime: Regime::KBelowThreshold });
    }
    if r > thresholds.above {
        let b_g = bias_coef(ctx.alpha, ctx.gamma);
        let b_r = bias_coef(ctx.alpha, -ctx.rho);
        let sign = c * b_r * b_g;
        let (value, branch) = if sign > 0.0 {
            (k0_opt3(ctx, k, n)?, K0Branch::Opt3)
        } else if b_r == 0.0 {
            // only the (k0/k)^gamma bias is left
            (k0_opt1(ctx, k)?, K0Branch::Opt1)
        } else {
            (k0_opt2(ctx, n)?, K0Branch::Opt2)
        };
        return Ok(K0Choice { value, branch, regime: Regime::KAboveThreshold });
    }
    let d1 = solve_d1(ctx, r)?;
    let rho = ctx.rho;
    Ok(K0Choice {
        value: d1 * n.powf(-2.0 * rho / (1.0 - 2.0 * rho)),
        branch: K0Branch::Balanced { d: r, d1 },
        regime: Regime::KAtThreshold,
    })
}

/// Coefficients `(a1, a2, a3)` of the `D1` stationarity equation.
pub fn d1_coefficients(ctx: &AsymptoticContext, d: f64) -> Result<(f64, f64, f64)> {
    if !ctx.second_order_dominates() {
        return Err(Error::Parameter("D1 equation needs gamma > -rho with finite rho".into()));
    }
    let c = ctx.require_c()?;
    let (g, r, a) = (ctx.gamma, ctx.rho, ctx.alpha);
    let b_g = bias_coef(a, g);
    let b_r = bias_coef(a, -r);
    let a1 = 2.0 * g * b_g * b_g * d.powf(-2.0 * g);
    let a2 = 2.0 * c * g * (r - g) / (g + r) * b_g * b_r * d.powf(-g);
    let q = c * g * b_r / (g + r);
    let a3 = -2.0 * r * q * q;
    Ok((a1, a2, a3))
}

/// Smallest positive root `D1` of
/// `a1 D1^(2γ+1) + a2 D1^(γ-ρ+1) + a3 D1^(1-2ρ) = γ²V_alpha`.
pub fn solve_d1(ctx: &AsymptoticContext, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Parameter(format!("D must be positive, got {d}")));
    }
    let (a1, a2, a3) = d1_coefficients(ctx, d)?;
    let (g, r) = (ctx.gamma, ctx.rho);
    let target = g * g * v_alpha(ctx.alpha)?;
    let (e1, e2, e3) = (2.0 * g + 1.0, g - r + 1.0, 1.0 - 2.0 * r);
    let excess = |x: f64| a1 * x.powf(e1) + a2 * x.powf(e2) + a3 * x.powf(e3) - target;

    // Walk up a geometric grid from near zero (where the excess is -target)
    // to the first sign change, then bisect inside that cell.
    let mut lo = 1e-12;
    let mut hi = lo;
    let mut found = false;
    for _ in 0..400 {
        hi = lo * 1.5;
        if excess(hi) >= 0.0 {
            found = true;
            break;
        }
        lo = hi;
    }
    if !found {
        return Err(Error::NoRoot(format!("no sign change up to D1 = {hi:e}")));
    }
    let root = bisect(excess, lo, hi, 0.0)?;
    let residual = excess(root).abs();
    if residual > 1e-10 * target {
        return Err(Error::NoRoot(format!("bisection stalled with residual {residual:e}")));
    }
    Ok(root)
}

/// Integer `k0` from a real optimum: round half up, then clamp to `[2, k-1]`.
pub fn round_k0(value: f64, k: usize) -> usize {
    let upper = k.saturating_sub(1).max(2);
    let r = (value + 0.5).floor();
    if !(r >= 2.0) {
        2
    } else if r >= upper as f64 {
        upper
    } else {
        r as usize
    }
}
