//! Seeded replication engine for the simulation studies: sample paths over
//! `k0`, mean/MSE grids, interval coverage, and empirical `k0` / efficiency.
//!
//! Replication `r` of sample size `n` draws from its own stream
//! `RandomStream::for_replication(base_seed, r, n)`, and per-cell results are
//! folded in replication order, so reports do not depend on the worker count.

mod config;
mod report;

pub use config::{Alpha0Mode, ExperimentConfig, K0Rule, KRule, SCHEMA_VERSION};
pub use report::{format_sig10, round_sig10, ExperimentReport, ReportRow, CSV_HEADER};

use rayon::prelude::*;

use crate::asymptotics::{alpha0, k0_opt_select, round_k0, AsymptoticContext};
use crate::error::{Error, Result};
use crate::estimators::{fraga_alves, gamma_hat_value, FractionPair, Method, Sample};
use crate::inference::{ci_fraga_alves, ci_new, ConfidenceInterval};
use crate::sampling::{sample, RandomStream, TailModel};
use crate::special::CompensatedSum;

/// Execution knobs that never change the numbers in a report.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Worker threads; `0` uses the rayon default.
    pub workers: usize,
    /// Debugging hook: added to every simulated observation before estimation.
    /// Location-invariant estimators should be unaffected.
    pub data_shift: f64,
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self { workers, ..Self::default() }
    }
}

/// `k0` for a non-sweep rule, validated against `1 <= k0 < k`.
pub fn resolve_k0(rule: &K0Rule, model: &TailModel, k: usize, n: usize) -> Result<usize> {
    let gamma = model.gamma();
    let optimal_rate = || (k as f64).powf(2.0 * gamma / (2.0 * gamma + 1.0)).floor() as usize;
    let k0 = match *rule {
        K0Rule::TheoremOpt => {
            let p = model.true_params();
            let ctx = AsymptoticContext::new(p.gamma, p.rho, p.c, 1.0).map_err(|e| Error::Config(e.to_string()))?;
            match k0_opt_select(&ctx, k as f64, n as f64) {
                Ok(choice) => round_k0(choice.value, k),
                Err(Error::NullBias { .. }) => optimal_rate(),
                Err(e) => return Err(Error::Config(format!("theorem_opt k0 unavailable: {e}"))),
            }
        }
        K0Rule::OptimalRate => optimal_rate(),
        K0Rule::Power(e) => {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("k0 power exponent must lie in (0, 1), got {e}")));
            }
            (k as f64).powf(e).floor() as usize
        }
        K0Rule::Explicit(k0) => k0,
        K0Rule::Sweep { .. } => return Err(Error::Config("a k0 sweep has no single value".into())),
    };
    if k0 < 1 || k0 >= k {
        return Err(Error::Config(format!("k0 = {k0} is infeasible for k = {k} (need 1 <= k0 < k)")));
    }
    Ok(k0)
}

/// Values of a sweep rule that are feasible for `k`.
pub fn sweep_values(lo: usize, hi: usize, step: usize, k: usize) -> Vec<usize> {
    if step == 0 {
        return Vec::new();
    }
    (lo..=hi).step_by(step).filter(|&k0| k0 >= 1 && k0 < k).collect()
}

/// Mean, bias, MSE and variance of a set of estimates around `truth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub variance: f64,
}

impl Aggregate {
    /// `None` for an empty slice. Sums are compensated and taken in slice order.
    pub fn from_values(values: &[f64], truth: f64) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let m = values.len() as f64;
        let mean = values.iter().copied().collect::<CompensatedSum>().total() / m;
        let mse = values.iter().map(|x| (x - truth) * (x - truth)).collect::<CompensatedSum>().total() / m;
        let variance = values.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().total() / m;
        Some(Self { count: values.len(), mean, bias: mean - truth, mse, variance })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AlphaSpec {
    Fixed(f64),
    /// `alpha0` at the per-replication Fraga Alves pilot.
    Pilot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    method: Method,
    alpha: Option<AlphaSpec>,
    fp: FractionPair,
    with_ci: bool,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    value: f64,
    alpha: f64,
    covered: Option<bool>,
    length: Option<f64>,
}

fn evaluate(s: &Sample, cell: &Cell, level: f64, truth: f64) -> Result<Outcome> {
    let (value, alpha, ci): (f64, f64, Option<ConfidenceInterval>) = match cell.method {
        Method::FragaAlves => {
            let v = fraga_alves(s, cell.fp)?;
            let ci = if cell.with_ci { Some(ci_fraga_alves(v, cell.fp.k0, level)?) } else { None };
            (v, f64::NAN, ci)
        }
        Method::NewFamily => {
            let alpha = match cell.alpha {
                Some(AlphaSpec::Fixed(a)) => a,
                Some(AlphaSpec::Pilot) => alpha0(fraga_alves(s, cell.fp)?)?,
                None => 1.0,
            };
            let v = gamma_hat_value(s, cell.fp, alpha)?;
            let ci = if cell.with_ci { Some(ci_new(v, cell.fp.k0, alpha, level)?) } else { None };
            (v, alpha, ci)
        }
        other => return Err(Error::Parameter(format!("{other} is not simulated by the harness"))),
    };
    Ok(Outcome { value, alpha, covered: ci.map(|c| c.covers(truth)), length: ci.and_then(|c| c.length()) })
}

fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs every replication for one `n` and folds each cell into a row. Rows of
/// cells where every replication failed carry `NaN` statistics.
fn simulate<F>(config: &ExperimentConfig, n: usize, cells: &[Cell], opts: RunOptions, eval: F) -> Result<Vec<ReportRow>>
where
    F: Fn(&Sample, &Cell) -> Result<Outcome> + Sync,
{
    let reps = config.replications;
    let per_rep: Vec<Vec<Option<Outcome>>> = run_pool(opts.workers, || {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut stream = RandomStream::for_replication(config.base_seed, r as u64, n as u64);
                let drawn = sample(&config.model, n, &mut stream).and_then(|s| {
                    if opts.data_shift != 0.0 {
                        s.affine(1.0, opts.data_shift)
                    } else {
                        Ok(s)
                    }
                });
                match drawn {
                    Ok(s) => cells.iter().map(|c| eval(&s, c).ok()).collect(),
                    Err(_) => vec![None; cells.len()],
                }
            })
            .collect()
    })?;

    let truth = config.model.gamma();
    let model = config.model.to_string();
    let mut rows = Vec::with_capacity(cells.len());
    for (j, cell) in cells.iter().enumerate() {
        let ok: Vec<Outcome> = per_rep.iter().filter_map(|outs| outs[j]).collect();
        let failures = reps - ok.len();
        let values: Vec<f64> = ok.iter().map(|o| o.value).collect();
        let agg = Aggregate::from_values(&values, truth);
        let alpha = match cell.alpha {
            Some(AlphaSpec::Fixed(a)) => Some(a),
            Some(AlphaSpec::Pilot) if !ok.is_empty() => {
                Some(ok.iter().map(|o| o.alpha).collect::<CompensatedSum>().total() / ok.len() as f64)
            }
            Some(AlphaSpec::Pilot) => Some(f64::NAN),
            None => None,
        };
        let (coverage, avg_length) = if cell.with_ci && !ok.is_empty() {
            let covered = ok.iter().filter(|o| o.covered == Some(true)).count();
            let lengths: Vec<f64> = ok.iter().filter_map(|o| o.length).collect();
            let avg = (!lengths.is_empty())
                .then(|| lengths.iter().copied().collect::<CompensatedSum>().total() / lengths.len() as f64);
            (Some(covered as f64 / ok.len() as f64), avg)
        } else {
            (None, None)
        };
        rows.push(ReportRow {
            n,
            model: model.clone(),
            method: cell.method.as_str().to_string(),
            alpha,
            k0: cell.fp.k0,
            k: cell.fp.k,
            mean: agg.map_or(f64::NAN, |a| a.mean),
            bias: agg.map_or(f64::NAN, |a| a.bias),
            mse: agg.map_or(f64::NAN, |a| a.mse),
            coverage,
            avg_length,
            failures,
        });
    }
    Ok(rows)
}

fn enforce_failure_limit(rows: &[ReportRow], replications: usize) -> Result<()> {
    if let Some(worst) = rows.iter().map(|r| r.failures).max() {
        if worst * 100 > replications {
            return Err(Error::ExcessFailures { failures: worst, replications });
        }
    }
    Ok(())
}

fn single_n(config: &ExperimentConfig) -> Result<usize> {
    config.validate()?;
    match config.n_values.as_slice() {
        [n] => Ok(*n),
        _ => Err(Error::Config(format!("this study needs exactly one n, got {}", config.n_values.len()))),
    }
}

fn feasible_sweep(k0_sweep: &[usize], k: usize) -> Result<Vec<usize>> {
    if k0_sweep.is_empty() {
        return Err(Error::Config("k0 sweep is empty".into()));
    }
    if let Some(bad) = k0_sweep.iter().find(|&&k0| k0 < 1 || k0 >= k) {
        return Err(Error::Config(format!("sweep value k0 = {bad} is infeasible for k = {k}")));
    }
    Ok(k0_sweep.to_vec())
}

fn config_sweep(config: &ExperimentConfig, k: usize) -> Result<Vec<usize>> {
    match config.k0_rule {
        K0Rule::Sweep { lo, hi, step } => {
            let v = sweep_values(lo, hi, step, k);
            if v.is_empty() {
                return Err(Error::Config(format!("no sweep value in [{lo}, {hi}] is feasible for k = {k}")));
            }
            Ok(v)
        }
        _ => Err(Error::Config("this study needs a k0 sweep rule".into())),
    }
}

fn alpha0_spec(config: &ExperimentConfig) -> Result<AlphaSpec> {
    Ok(match config.alpha0_mode {
        Alpha0Mode::OracleTrueGamma => AlphaSpec::Fixed(alpha0(config.model.gamma())?),
        Alpha0Mode::PilotPlugin => AlphaSpec::Pilot,
    })
}

fn run_cells(config: &ExperimentConfig, n: usize, cells: &[Cell], opts: RunOptions) -> Result<Vec<ReportRow>> {
    let level = config.level;
    let truth = config.model.gamma();
    simulate(config, n, cells, opts, |s, c| evaluate(s, c, level, truth))
}

/// New-family estimates for every `alpha` in the config across `k0_sweep`.
pub fn run_paths(config: &ExperimentConfig, k0_sweep: &[usize], opts: RunOptions) -> Result<ExperimentReport> {
    let n = single_n(config)?;
    if config.alphas.is_empty() {
        return Err(Error::Config("alphas is empty".into()));
    }
    let k = config.k_rule.resolve(n)?;
    let sweep = feasible_sweep(k0_sweep, k)?;
    let cells: Vec<Cell> = config
        .alphas
        .iter()
        .flat_map(|&a| {
            sweep.iter().map(move |&k0| Cell {
                method: Method::NewFamily,
                alpha: Some(AlphaSpec::Fixed(a)),
                fp: FractionPair::new(k0, k),
                with_ci: false,
            })
        })
        .collect();
    let rows = run_cells(config, n, &cells, opts)?;
    enforce_failure_limit(&rows, config.replications)?;
    Ok(ExperimentReport::new(rows, config.base_seed))
}

/// Fraga Alves, new family at `alpha = 1`, and new family at `alpha0`, over
/// the config's `k0` sweep.
pub fn run_grid(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentReport> {
    let n = single_n(config)?;
    let k = config.k_rule.resolve(n)?;
    let sweep = config_sweep(config, k)?;
    let a0 = alpha0_spec(config)?;
    let mut cells = Vec::with_capacity(3 * sweep.len());
    for (method, alpha) in [(Method::FragaAlves, None), (Method::NewFamily, Some(AlphaSpec::Fixed(1.0))), (Method::NewFamily, Some(a0))] {
        for &k0 in &sweep {
            cells.push(Cell { method, alpha, fp: FractionPair::new(k0, k), with_ci: false });
        }
    }
    let rows = run_cells(config, n, &cells, opts)?;
    enforce_failure_limit(&rows, config.replications)?;
    Ok(ExperimentReport::new(rows, config.base_seed))
}

/// Coverage and mean length of the Fraga Alves interval and the new-family
/// interval at `alpha0`, sharing `(k0, k)`, for every `n` in the config.
pub fn run_coverage(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let a0 = alpha0_spec(config)?;
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let k = config.k_rule.resolve(n)?;
        let k0 = resolve_k0(&config.k0_rule, &config.model, k, n)?;
        let fp = FractionPair::new(k0, k);
        let cells = [
            Cell { method: Method::FragaAlves, alpha: None, fp, with_ci: true },
            Cell { method: Method::NewFamily, alpha: Some(a0), fp, with_ci: true },
        ];
        let part = run_cells(config, n, &cells, opts)?;
        enforce_failure_limit(&part, config.replications)?;
        rows.extend(part);
    }
    Ok(ExperimentReport::new(rows, config.base_seed))
}

/// Estimators the empirical `k0` search can drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepEstimator {
    FragaAlves,
    NewFamily { alpha: f64 },
}

/// Sweep value with the smallest empirical MSE; ties go to the smaller `k0`.
pub fn empirical_k0_opt(
    config: &ExperimentConfig,
    method: SweepEstimator,
    k0_sweep: &[usize],
    opts: RunOptions,
) -> Result<usize> {
    match method {
        SweepEstimator::FragaAlves => empirical_k0_opt_with(config, k0_sweep, opts, fraga_alves),
        SweepEstimator::NewFamily { alpha } => {
            empirical_k0_opt_with(config, k0_sweep, opts, move |s, fp| gamma_hat_value(s, fp, alpha))
        }
    }
}

/// [`empirical_k0_opt`] with an arbitrary estimator. Sweep points where more
/// than 1% of replications failed are skipped.
pub fn empirical_k0_opt_with<F>(config: &ExperimentConfig, k0_sweep: &[usize], opts: RunOptions, estimator: F) -> Result<usize>
where
    F: Fn(&Sample, FractionPair) -> Result<f64> + Sync,
{
    let rows = sweep_mse(config, k0_sweep, opts, estimator)?;
    rows.iter()
        .filter(|r| r.failures * 100 <= config.replications && r.mse.is_finite())
        .fold(None::<&ReportRow>, |best, r| match best {
            Some(b) if b.mse <= r.mse => Some(b),
            _ => Some(r),
        })
        .map(|r| r.k0)
        .ok_or(Error::EmptyResult)
}

fn sweep_mse<F>(config: &ExperimentConfig, k0_sweep: &[usize], opts: RunOptions, estimator: F) -> Result<Vec<ReportRow>>
where
    F: Fn(&Sample, FractionPair) -> Result<f64> + Sync,
{
    let n = single_n(config)?;
    let k = config.k_rule.resolve(n)?;
    let mut sweep = feasible_sweep(k0_sweep, k)?;
    sweep.sort_unstable();
    sweep.dedup();
    let cells: Vec<Cell> = sweep
        .iter()
        .map(|&k0| Cell { method: Method::FragaAlves, alpha: None, fp: FractionPair::new(k0, k), with_ci: false })
        .collect();
    simulate(config, n, &cells, opts, |s, c| {
        Ok(Outcome { value: estimator(s, c.fp)?, alpha: f64::NAN, covered: None, length: None })
    })
}

/// `sqrt(min MSE of Fraga Alves / min MSE of gamma_hat^(alpha))` over `k0_sweep`.
pub fn empirical_areff(config: &ExperimentConfig, alpha: f64, k0_sweep: &[usize], opts: RunOptions) -> Result<f64> {
    let min_mse = |rows: Vec<ReportRow>| {
        rows.iter()
            .filter(|r| r.failures * 100 <= config.replications)
            .map(|r| r.mse)
            .filter(|m| m.is_finite())
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))))
            .ok_or(Error::EmptyResult)
    };
    let fa = min_mse(sweep_mse(config, k0_sweep, opts, fraga_alves)?)?;
    let new = min_mse(sweep_mse(config, k0_sweep, opts, move |s, fp| gamma_hat_value(s, fp, alpha))?)?;
    Ok((fa / new).sqrt())
}
