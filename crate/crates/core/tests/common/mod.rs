//! Test-only reference implementations. Nothing here calls into the library's
//! numerical kernels, so agreement is independent evidence.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

fn refine<S: Fn(f64) -> f64>(sum_at: S) -> f64 {
    let mut h = 0.5;
    let mut prev = sum_at(h);
    loop {
        h /= 2.0;
        let cur = sum_at(h);
        if (cur - prev).abs() <= 1e-15 * cur.abs() || h < 1.0 / 1024.0 {
            return cur;
        }
        prev = cur;
    }
}

/// `∫_0^∞ f(s) ds` with the exp-sinh substitution `s = exp(π/2 sinh t)`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F) -> f64 {
    refine(|h| {
        let n = (5.0 / h) as i64;
        let mut acc = 0.0;
        for j in -n..=n {
            let t = j as f64 * h;
            let s = (FRAC_PI_2 * t.sinh()).exp();
            let w = FRAC_PI_2 * t.cosh() * s;
            let v = f(s) * w;
            if v.is_finite() {
                acc += v;
            }
        }
        acc * h
    })
}

/// `∫_a^b f(x) dx` with the tanh-sinh substitution.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    refine(|h| {
        let n = (3.5 / h) as i64;
        let mut acc = 0.0;
        for j in -n..=n {
            let t = j as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let x = u.tanh();
            let w = FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
            let v = f(mid + half * x) * w;
            if v.is_finite() {
                acc += v;
            }
        }
        acc * h * half
    })
}

/// `Γ(x) = ∫_0^∞ s^(x-1) e^(-s) ds`.
pub fn gamma_quad(x: f64) -> f64 {
    exp_sinh(|s| ((x - 1.0) * s.ln() - s).exp())
}

/// `E[(ln Y)^(α-1) (Y^ρ - 1)/ρ]` for standard Pareto `Y`, written with `ln Y ~ Exp(1)`.
pub fn mu_quad(alpha: f64, rho: f64) -> f64 {
    exp_sinh(|s| ((alpha - 1.0) * s.ln() - s).exp() * (rho * s).exp_m1() / rho)
}

/// `Var[E^α]` for standard exponential `E`.
pub fn sigma_sq_quad(alpha: f64) -> f64 {
    let m1 = exp_sinh(|s| (alpha * s.ln() - s).exp());
    let m2 = exp_sinh(|s| (2.0 * alpha * s.ln() - s).exp());
    m2 - m1 * m1
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper normal tail `1 - Φ(z)` for `z >= 0`, i.e. `erfc(z/√2)/2` by quadrature.
pub fn normal_upper_tail(z: f64) -> f64 {
    exp_sinh(|s| phi(z + s))
}

/// `z` with `1 - Φ(z) = p` by bisecting the quadrature tail.
pub fn normal_upper_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_upper_tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `M^(α)(k0, k)` straight from the definition: sorts descending with a
/// different comparator and sums in reverse without compensation.
pub fn m_alpha_brute(values: &[f64], k0: usize, k: usize, alpha: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let thr = v[k];
    let den = v[k0] - thr;
    let mut acc = 0.0;
    for i in (0..k0).rev() {
        acc += ((v[i] - thr) / den).ln().powf(alpha);
    }
    acc / k0 as f64
}

/// `Γ(α)/M^(α-1) · sqrt(M^(2α)/Γ(2α+1))` on top of [`m_alpha_brute`] and [`gamma_quad`].
pub fn gamma_hat_brute(values: &[f64], k0: usize, k: usize, alpha: f64) -> f64 {
    let lower = if alpha == 1.0 { 1.0 } else { m_alpha_brute(values, k0, k, alpha - 1.0) };
    gamma_quad(alpha) / lower * (m_alpha_brute(values, k0, k, 2.0 * alpha) / gamma_quad(2.0 * alpha + 1.0)).sqrt()
}

/// `b_α(γ)` written out independently.
pub fn b_ref(alpha: f64, gamma: f64) -> f64 {
    (1.0 + gamma).powf(1.0 - alpha) - 0.5 * (1.0 + gamma).powf(-2.0 * alpha) - 0.5
}

/// Small deterministic generator for test inputs (SplitMix64 outputs mapped to [0, 1)).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard exponential draw.
    pub fn exp1(&mut self) -> f64 {
        -(1.0 - self.next_f64()).ln()
    }
}
