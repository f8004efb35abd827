//! Heavy-tailed benchmark models, their closed-form quantiles, and the
//! portable random source used by the simulation harness.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimators::Sample;

/// A heavy-tailed distribution with a closed-form quantile function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// `F(x) = exp(-x^(-1/gamma))`, `x > 0`.
    Frechet { gamma: f64 },
    /// `F(x) = 1 - (1 + x^a)^(-b)`, `x >= 0`.
    Burr { a: f64, b: f64 },
    /// `F(x) = 1 - x^(-1/gamma)`, `x >= 1`.
    Pareto { gamma: f64 },
}

/// Tail index, second-order parameter and the constant `c` in `A(t) ~ c t^rho`.
///
/// `rho == f64::NEG_INFINITY` marks a model whose first-order approximation is
/// exact (`A ≡ 0`); `c` is then absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderTriple {
    pub gamma: f64,
    pub rho: f64,
    pub c: Option<f64>,
}

impl SecondOrderTriple {
    pub fn has_finite_rho(&self) -> bool {
        self.rho.is_finite()
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parameter(format!("{name} must be a finite positive number, got {v}")))
    }
}

impl TailModel {
    pub fn frechet(gamma: f64) -> Result<Self> {
        Ok(TailModel::Frechet { gamma: positive("gamma", gamma)? })
    }

    pub fn burr(a: f64, b: f64) -> Result<Self> {
        Ok(TailModel::Burr { a: positive("a", a)?, b: positive("b", b)? })
    }

    pub fn pareto(gamma: f64) -> Result<Self> {
        Ok(TailModel::Pareto { gamma: positive("gamma", gamma)? })
    }

    /// Re-checks the shape parameters; useful after deserializing or after
    /// building a variant literal directly.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TailModel::Frechet { gamma } | TailModel::Pareto { gamma } => positive("gamma", gamma).map(|_| ()),
            TailModel::Burr { a, b } => {
                positive("a", a)?;
                positive("b", b).map(|_| ())
            }
        }
    }

    /// True tail index `gamma`.
    pub fn gamma(&self) -> f64 {
        match *self {
            TailModel::Frechet { gamma } | TailModel::Pareto { gamma } => gamma,
            TailModel::Burr { a, b } => 1.0 / (a * b),
        }
    }

    /// `F⁻¹(p)` for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        Ok(match *self {
            TailModel::Frechet { gamma } => (-p.ln()).powf(-gamma),
            TailModel::Burr { a, b } => ((-p).ln_1p() * (-1.0 / b)).exp_m1().powf(1.0 / a),
            TailModel::Pareto { gamma } => ((-p).ln_1p() * -gamma).exp(),
        })
    }

    /// Upper-tail quantile `F⁻¹(1 - q)` for `0 < q < 1`, evaluated without
    /// forming `1 - q`. This is `U(1/q)` in tail-quantile notation.
    pub fn tail_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("tail quantile requires 0 < q < 1, got {q}")));
        }
        Ok(match *self {
            TailModel::Frechet { gamma } => (-(-q).ln_1p()).powf(-gamma),
            TailModel::Burr { a, b } => (-q.ln() / b).exp_m1().powf(1.0 / a),
            TailModel::Pareto { gamma } => q.powf(-gamma),
        })
    }

    /// Distribution function, used to check the quantile inversion.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            TailModel::Frechet { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-1.0 / gamma)).exp()
                }
            }
            TailModel::Burr { a, b } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -((x.powf(a)).ln_1p() * -b).exp_m1()
                }
            }
            TailModel::Pareto { gamma } => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-1.0 / gamma)
                }
            }
        }
    }

    /// Exceedance probability `1 - F(x)`, evaluated directly in the tail.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            TailModel::Frechet { gamma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-x.powf(-1.0 / gamma)).exp_m1()
                }
            }
            TailModel::Burr { a, b } => {
                if x <= 0.0 {
                    1.0
                } else {
                    ((x.powf(a)).ln_1p() * -b).exp()
                }
            }
            TailModel::Pareto { gamma } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-1.0 / gamma)
                }
            }
        }
    }

    /// Second-order rate `rho` in the location-scale framework, where the
    /// expansion is `U(t) = C t^gamma (1 + d t^rho + ...)` up to an additive
    /// constant. Constants cancel in `U(tx) - U(t)`, which moves `rho` to the
    /// next term when `gamma + rho` would be zero.
    pub fn rho(&self) -> f64 {
        match *self {
            // U(t) = t^g (1 - g/(2t) + ...); for g = 1 the t^0 term is a constant.
            TailModel::Frechet { gamma } => {
                if gamma == 1.0 {
                    -2.0
                } else {
                    -1.0
                }
            }
            // U(t) = (t^(1/b) - 1)^(1/a); for a = 1 this is exactly t^(1/b) - 1.
            TailModel::Burr { a, b } => {
                if a == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    -1.0 / b
                }
            }
            TailModel::Pareto { .. } => f64::NEG_INFINITY,
        }
    }

    /// `(gamma, rho, c)`; `c` is fitted numerically once per model and cached.
    pub fn true_params(&self) -> SecondOrderTriple {
        let gamma = self.gamma();
        let rho = self.rho();
        if !rho.is_finite() {
            return SecondOrderTriple { gamma, rho, c: None };
        }
        SecondOrderTriple { gamma, rho, c: Some(cached_c(self)) }
    }

    /// Fits `a(t)` and `A(t)` from two probes of the exact tail quantile
    /// (see [`a_numeric`]).
    pub fn a_numeric(&self, t: f64, x1: f64, x2: f64) -> Result<AuxiliaryFit> {
        a_numeric(self, t, x1, x2)
    }

    fn key(&self) -> (u8, u64, u64) {
        match *self {
            TailModel::Frechet { gamma } => (0, gamma.to_bits(), 0),
            TailModel::Burr { a, b } => (1, a.to_bits(), b.to_bits()),
            TailModel::Pareto { gamma } => (2, gamma.to_bits(), 0),
        }
    }
}

impl fmt::Display for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TailModel::Frechet { gamma } => write!(f, "frechet:g={gamma}"),
            TailModel::Burr { a, b } => write!(f, "burr:a={a},b={b}"),
            TailModel::Pareto { gamma } => write!(f, "pareto:g={gamma}"),
        }
    }
}

impl FromStr for TailModel {
    type Err = Error;

    /// Parses `frechet:g=1`, `burr:a=2,b=1` or `pareto:g=2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parameter(format!("model spec {s:?}: {why}"));
        let (family, params) = s.trim().split_once(':').ok_or_else(|| bad("expected <family>:<key>=<value>,..."))?;
        let mut kv: HashMap<String, f64> = HashMap::new();
        for part in params.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let key = k.trim().to_ascii_lowercase();
            let val: f64 = v.trim().parse().map_err(|_| bad(&format!("value for {key} is not a number")))?;
            if kv.insert(key.clone(), val).is_some() {
                return Err(bad(&format!("duplicate key {key}")));
            }
        }
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| bad(&format!("missing key {key}")));
        let model = match family.trim().to_ascii_lowercase().as_str() {
            "frechet" => TailModel::frechet(take("g")?)?,
            "pareto" => TailModel::pareto(take("g")?)?,
            "burr" => {
                let a = take("a")?;
                let b = take("b")?;
                TailModel::burr(a, b)?
            }
            other => return Err(bad(&format!("unknown family {other}"))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(bad(&format!("unknown key {extra}")));
        }
        Ok(model)
    }
}

impl Serialize for TailModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TailModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of [`a_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryFit {
    pub a_t: f64,
    pub big_a_t: f64,
}

fn d_gamma(gamma: f64, x: f64) -> f64 {
    (gamma * x.ln()).exp_m1() / gamma
}

/// `Psi_{gamma,rho}(x)`: `(x^(gamma+rho) - 1)/(gamma+rho)`, or `ln x` when
/// `gamma + rho == 0`.
pub fn psi(gamma: f64, rho: f64, x: f64) -> f64 {
    let s = gamma + rho;
    if s == 0.0 {
        x.ln()
    } else {
        (s * x.ln()).exp_m1() / s
    }
}

/// Solves `U(t x_i) - U(t) = a(t) D_gamma(x_i) + a(t) A(t) Psi(x_i)` for
/// `i = 1, 2` with the model's exact tail quantile.
///
/// Models with `rho = -inf` are probed with the `rho = -1` shape; the fitted
/// `A(t)` is then zero up to rounding.
pub fn a_numeric(model: &TailModel, t: f64, x1: f64, x2: f64) -> Result<AuxiliaryFit> {
    if !(t > 10.0) || !t.is_finite() {
        return Err(Error::Domain(format!("a_numeric requires t > 10, got {t}")));
    }
    if !(x1 > 1.0 && x2 > 1.0) || !x1.is_finite() || !x2.is_finite() {
        return Err(Error::Domain(format!("a_numeric requires x1, x2 > 1, got {x1}, {x2}")));
    }
    if x1 == x2 {
        return Err(Error::DegenerateProbe("x1 == x2".into()));
    }
    let gamma = model.gamma();
    let rho = if model.rho().is_finite() { model.rho() } else { -1.0 };
    let u = |s: f64| model.tail_quantile(1.0 / s);
    let base = u(t)?;
    let delta1 = u(t * x1)? - base;
    let delta2 = u(t * x2)? - base;
    let (d1, d2) = (d_gamma(gamma, x1), d_gamma(gamma, x2));
    let (p1, p2) = (psi(gamma, rho, x1), psi(gamma, rho, x2));
    let det = d1 * p2 - d2 * p1;
    let scale = (d1 * p2).abs().max((d2 * p1).abs());
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateProbe(format!("probe pair ({x1}, {x2}) gives a singular system")));
    }
    let a_t = (delta1 * p2 - delta2 * p1) / det;
    let a_a = (d1 * delta2 - d2 * delta1) / det;
    Ok(AuxiliaryFit { a_t, big_a_t: a_a / a_t })
}

/// Estimates `c` in `A(t) ~ c t^rho` from a probe at the `t` where `t^rho ≈ 1e-7`.
pub fn estimate_c(model: &TailModel) -> Option<f64> {
    let rho = model.rho();
    if !rho.is_finite() {
        return None;
    }
    let t = 10f64.powf(7.0 / rho.abs()).clamp(1e2, 1e9);
    let fit = a_numeric(model, t, 2.0, 4.0).ok()?;
    Some(fit.big_a_t / t.powf(rho))
}

type CCache = Mutex<HashMap<(u8, u64, u64), f64>>;

fn cached_c(model: &TailModel) -> f64 {
    static CACHE: OnceLock<CCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("c cache poisoned").get(&model.key()) {
        return *c;
    }
    let c = estimate_c(model).unwrap_or(f64::NAN);
    cache.lock().expect("c cache poisoned").insert(model.key(), c);
    c
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One step of the splitmix64 output function.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ seeded through splitmix64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    state: [u64; 4],
    seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm), splitmix64(&mut sm)];
        Self { state, seed }
    }

    /// Independent stream for replication `index` of a run seeded with `base_seed`.
    /// `tag` separates streams that share a replication index (e.g. one per `n`).
    pub fn for_replication(base_seed: u64, index: u64, tag: u64) -> Self {
        let mut a = base_seed ^ index;
        let mut b = tag;
        Self::new(splitmix64(&mut a) ^ splitmix64(&mut b).rotate_left(17))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in the open interval `(0, 1)` from the top 53 bits.
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}

/// `n` i.i.d. draws from `model` by inverse transform.
pub fn sample(model: &TailModel, n: usize, stream: &mut RandomStream) -> Result<Sample> {
    if n < 3 {
        return Err(Error::Parameter(format!("sample size must be at least 3, got {n}")));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(model.quantile(stream.next_uniform())?);
    }
    Sample::new(values)
}
