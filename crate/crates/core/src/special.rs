//! Special functions and small numerical kernels shared by the other modules.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function for `x > 0`.
///
/// Lanczos (g = 7, nine terms) on `[1, 2)`, shifted into place with the
/// recurrence `Γ(x + 1) = x Γ(x)` so the relative error stays near a few ulps
/// across `[0.5, 50]`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

pub(crate) fn gamma_positive(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 171.0 {
        return (2..x as u32).fold(1.0, |acc, i| acc * i as f64);
    }
    if x < 1.0 {
        return lanczos(x + 1.0) / x;
    }
    if x < 2.0 {
        return lanczos(x);
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let mut base = x;
    let mut prod = 1.0;
    while base >= 2.0 {
        base -= 1.0;
        prod *= base;
    }
    prod * lanczos(base)
}

/// `ln Γ(x)` for `x > 0` from the same Lanczos sum, usable where `Γ(x)` overflows.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

// AS 241 (PPND16) coefficients.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1` (Wichura's AS 241).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return Ok(q * horner(&A, r) / horner(&B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        r -= 5.0;
        horner(&E, r) / horner(&F, r)
    };
    Ok(if q < 0.0 { -z } else { z })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Bisection on `[lo, hi]`; requires a sign change. Stops when the bracket is
/// narrower than `tol` (absolute) or stops shrinking.
pub fn bisect<Fn1>(f: Fn1, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    Fn1: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_at_integers_and_half() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert!(rel(gamma_fn(4.0).unwrap(), 6.0) < 1e-15);
        assert!(rel(gamma_fn(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
        let mut fact = 1.0;
        for n in 1..40 {
            assert!(rel(gamma_fn(n as f64 + 1.0).unwrap(), fact * n as f64) < 1e-13, "n = {n}");
            fact *= n as f64;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.3, 1.0, 2.5, 10.0, 42.7, 150.0] {
            assert!((ln_gamma(x) - gamma_positive(x).ln()).abs() < 1e-12 * gamma_positive(x).ln().abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn normal_quantile_symmetry_and_center() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        for p in [1e-6, 0.01, 0.2, 0.4] {
            let lo = normal_quantile(p).unwrap();
            let hi = normal_quantile(1.0 - p).unwrap();
            assert!((lo + hi).abs() < 1e-9 * lo.abs().max(1.0), "p = {p}");
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.total(), 1000.0);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!(matches!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-12), Err(Error::Bracket { .. })));
    }
}
