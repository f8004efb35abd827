//! `tailfrac` command-line front end.
//!
//! Exit codes: `0` success, `2` input or configuration error, `3` infeasible
//! parameters, `4` more than 1% of replications failed.

mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use input::{parse_values, read_values, MIN_OBSERVATIONS};

use crate::asymptotics::{alpha0, areff_curve};
use crate::error::Error;
use crate::estimators::{fraga_alves, gamma_hat_value, hill, moment, FractionPair, Sample};
use crate::inference::{ci_fraga_alves, ci_new, ConfidenceInterval};
use crate::montecarlo::{
    format_sig10, run_coverage, run_grid, run_paths, ExperimentConfig, ExperimentReport, K0Rule, KRule, RunOptions,
};
use crate::sampling::TailModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_FAILURES: i32 = 4;

/// Gamma grid printed by `table-alpha0` when no other values are requested.
pub const ALPHA0_GRID: [f64; 9] = [0.1, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0];

const AFTER_HELP: &str = "Exit codes: 0 success, 2 input/config error, 3 infeasible parameters, \
4 more than 1% of replications failed.\nTAILFRAC_SEED sets the seed when --seed is absent and overrides the config file.";

#[derive(Debug, Parser)]
#[command(name = "tailfrac", version, about = "Location-invariant tail-index estimation and simulation studies", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the tail index of a data file (one value per line, `#` comments).
    Estimate(EstimateArgs),
    /// Print alpha0(gamma) on a gamma grid as CSV.
    TableAlpha0(TableArgs),
    /// Run a simulation study and write its report as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub input: PathBuf,
    /// Outer fraction k [default: floor(n/2)].
    #[arg(long)]
    pub k: Option<usize>,
    /// Inner fraction k0 [default: floor(k^(2g/(2g+1))), g a Fraga Alves pilot at floor(k^0.75)].
    #[arg(long)]
    pub k0: Option<usize>,
    /// Tuning values for gamma_hat^(alpha); repeatable [default: 1 and the plug-in alpha0].
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Confidence level; adds intervals for the location-invariant estimators.
    #[arg(long)]
    pub level: Option<f64>,
    /// Add a constant to every observation before estimating.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
    /// Also write the estimates as CSV (with a manifest alongside).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Extra gamma values; repeatable.
    #[arg(long = "gamma")]
    pub gammas: Vec<f64>,
    /// Print only the requested values instead of adding them to the default grid.
    #[arg(long)]
    pub custom_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// gamma_hat^(alpha) over a k0 sweep for each alpha.
    Paths,
    /// Fraga Alves, alpha = 1 and alpha0 over a k0 sweep.
    Grid,
    /// Interval coverage and length.
    Coverage,
    /// Asymptotic relative efficiency over alpha in [1, alpha0).
    Areff,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub study: Study,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model id such as `burr:a=2,b=1`, `frechet:g=1`, `pareto:g=2`.
    #[arg(long)]
    pub model: Option<TailModel>,
    /// Sample size; repeatable.
    #[arg(long = "n")]
    pub n: Vec<usize>,
    /// Replications per cell [default: 2000].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed [default: 1].
    #[arg(long, env = "TAILFRAC_SEED")]
    pub seed: Option<u64>,
    /// Fixed outer fraction k.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fixed inner fraction k0.
    #[arg(long)]
    pub k0: Option<usize>,
    /// k0 sweep as `lo:hi:step` (paths, grid).
    #[arg(long)]
    pub sweep: Option<String>,
    /// Tuning values (paths); repeatable.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    /// Interval level (coverage) [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
    /// Gamma values (areff); repeatable.
    #[arg(long = "gamma")]
    pub gammas: Vec<f64>,
    /// Alpha step (areff).
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Worker threads [default: all cores].
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Report CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Wide k0-by-series CSV for plotting (paths, grid).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self { code: EXIT_INFEASIBLE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ExcessFailures { .. } => EXIT_FAILURES,
            Error::Config(_) => EXIT_INPUT,
            _ => EXIT_INFEASIBLE,
        };
        Self { code, message: e.to_string() }
    }
}

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub output_path: PathBuf,
    pub emitted_at: String,
    pub tool_version: String,
}

impl RunManifest {
    fn new(command: &str, config: serde_json::Value, seed: Option<u64>, output_path: &Path) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            output_path: output_path.to_path_buf(),
            emitted_at: chrono::Utc::now().to_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_output(path: &Path, body: &str, manifest: &RunManifest) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    let mpath = manifest_path(path);
    std::fs::write(&mpath, json + "\n").map_err(|e| CliError::input(format!("{}: {e}", mpath.display())))
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_from_env() -> i32 {
    main_with(std::env::args_os())
}

pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, out),
        Command::TableAlpha0(a) => cmd_table_alpha0(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::input(format!("stdout: {e}")))
}

#[derive(Debug)]
struct EstimateRow {
    method: &'static str,
    alpha: Option<f64>,
    k0: Option<usize>,
    k: usize,
    estimate: f64,
    ci: Option<ConfidenceInterval>,
}

/// `floor(k^(2g/(2g+1)))` with `g` a Fraga Alves pilot at `floor(k^0.75)`.
fn default_k0(sample: &Sample, k: usize) -> Result<usize, CliError> {
    let pilot_k0 = (k as f64).powf(0.75).floor() as usize;
    let pilot = FractionPair::new(pilot_k0, k);
    pilot.check(sample.len()).map_err(|e| CliError::infeasible(format!("{e} (k0 < k < n is required)")))?;
    let g = fraga_alves(sample, pilot)?;
    let k0 = (k as f64).powf(2.0 * g / (2.0 * g + 1.0)).floor() as usize;
    Ok(k0.clamp(1, k.saturating_sub(1).max(1)))
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let values = read_values(&a.input).map_err(CliError::input)?;
    if !a.shift.is_finite() {
        return Err(CliError::input("--shift must be finite"));
    }
    let sample = Sample::new(values.iter().map(|v| v + a.shift).collect()).map_err(|e| CliError::input(e.to_string()))?;
    let n = sample.len();
    let k = a.k.unwrap_or(n / 2);
    let k0 = match a.k0 {
        Some(k0) => k0,
        None => default_k0(&sample, k)?,
    };
    let fp = FractionPair::new(k0, k);
    fp.check(n).map_err(|e| CliError::infeasible(format!("{e} (k0 < k < n is required)")))?;
    if let Some(level) = a.level {
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::input(format!("--level must lie in (0, 1), got {level}")));
        }
    }
    if let Some(bad) = a.alphas.iter().find(|x| !(**x >= 1.0) || !x.is_finite()) {
        return Err(CliError::input(format!("--alpha must be >= 1, got {bad}")));
    }

    let fa = fraga_alves(&sample, fp)?;
    let alphas: Vec<(f64, &'static str)> = if a.alphas.is_empty() {
        vec![(1.0, "new_family"), (alpha0(fa)?, "new_family_alpha0")]
    } else {
        a.alphas.iter().map(|&x| (x, "new_family")).collect()
    };

    let mut rows = Vec::new();
    // Hill and moment are not location invariant; they are reported at threshold k.
    if sample.from_top(k) > 0.0 {
        rows.push(EstimateRow { method: "hill", alpha: None, k0: None, k, estimate: hill(&sample, k)?, ci: None });
        if let Ok(m) = moment(&sample, k) {
            rows.push(EstimateRow { method: "moment", alpha: None, k0: None, k, estimate: m, ci: None });
        }
    }
    let ci = |r: crate::error::Result<ConfidenceInterval>| r.ok();
    rows.push(EstimateRow {
        method: "fraga_alves",
        alpha: None,
        k0: Some(k0),
        k,
        estimate: fa,
        ci: a.level.and_then(|l| ci(ci_fraga_alves(fa, k0, l))),
    });
    for (alpha, method) in alphas {
        let g = gamma_hat_value(&sample, fp, alpha)?;
        rows.push(EstimateRow {
            method,
            alpha: Some(alpha),
            k0: Some(k0),
            k,
            estimate: g,
            ci: a.level.and_then(|l| ci(ci_new(g, k0, alpha, l))),
        });
    }

    let mut text = format!("n = {n}, k = {k}, k0 = {k0}\n");
    text.push_str(&format!("{:<18} {:>12} {:>14} {:>14} {:>14}\n", "method", "alpha", "estimate", "ci_lower", "ci_upper"));
    for r in &rows {
        let alpha = r.alpha.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        let (lo, hi) = match r.ci {
            Some(c) => (format!("{:.6}", c.lower), c.upper.map(|u| format!("{u:.6}")).unwrap_or_else(|| "unbounded".into())),
            None => ("-".into(), "-".into()),
        };
        text.push_str(&format!("{:<18} {:>12} {:>14.6} {:>14} {:>14}\n", r.method, alpha, r.estimate, lo, hi));
    }
    emit(out, &text)?;

    if let Some(path) = &a.out {
        let mut csv = String::from("method,alpha,k0,k,estimate,ci_lower,ci_upper,level\n");
        for r in &rows {
            let opt = |v: Option<f64>| v.map(format_sig10).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.method,
                opt(r.alpha),
                r.k0.map(|x| x.to_string()).unwrap_or_default(),
                r.k,
                format_sig10(r.estimate),
                opt(r.ci.map(|c| c.lower)),
                opt(r.ci.and_then(|c| c.upper)),
                opt(r.ci.map(|c| c.level)),
            ));
        }
        let params = serde_json::json!({
            "input": a.input,
            "n": n,
            "k": k,
            "k0": k0,
            "alphas": a.alphas,
            "level": a.level,
            "shift": a.shift,
        });
        write_output(path, &csv, &RunManifest::new("estimate", params, None, path))?;
    }
    Ok(())
}

fn cmd_table_alpha0(a: &TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut grid: Vec<f64> = if a.custom_only { Vec::new() } else { ALPHA0_GRID.to_vec() };
    grid.extend(a.gammas.iter().copied());
    if let Some(bad) = grid.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(CliError::input(format!("gamma must be positive, got {bad}")));
    }
    if grid.is_empty() {
        return Err(CliError::input("no gamma values requested"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut csv = String::from("gamma,alpha0,alpha0_2dp\n");
    for g in &grid {
        let a0 = alpha0(*g)?;
        csv.push_str(&format!("{},{},{a0:.2}\n", format_sig10(*g), format_sig10(a0)));
    }
    match &a.out {
        Some(path) => {
            let cfg = serde_json::json!({ "gammas": grid });
            write_output(path, &csv, &RunManifest::new("table-alpha0", cfg, None, path))
        }
        None => emit(out, &csv),
    }
}

fn parse_sweep(s: &str) -> Result<K0Rule, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Option<Vec<usize>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match nums.as_deref() {
        Some([lo, hi, step]) => Ok(K0Rule::Sweep { lo: *lo, hi: *hi, step: *step }),
        _ => Err(CliError::input(format!("--sweep expects lo:hi:step, got {s:?}"))),
    }
}

/// Builds the experiment from `--config` and flags (flags win).
pub fn build_config(a: &SimulateArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            cfg
        }
        None => {
            let model = a.model.ok_or_else(|| CliError::input("--model is required without --config"))?;
            if a.n.is_empty() {
                return Err(CliError::input("--n is required without --config"));
            }
            let mut c = ExperimentConfig::new(model, a.n.clone(), 2000, 1);
            if matches!(a.study, Study::Paths | Study::Grid) {
                c.k0_rule = K0Rule::Sweep { lo: 0, hi: 0, step: 0 };
            }
            if a.study == Study::Paths {
                c.alphas = vec![1.0, (alpha0(model.gamma())? * 100.0).round() / 100.0, 3.0];
            }
            c
        }
    };
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if !a.n.is_empty() {
        cfg.n_values = a.n.clone();
    }
    if let Some(r) = a.reps {
        cfg.replications = r;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    if let Some(k) = a.k {
        cfg.k_rule = KRule::Explicit(k);
    }
    if let Some(k0) = a.k0 {
        cfg.k0_rule = K0Rule::Explicit(k0);
    }
    if let Some(s) = &a.sweep {
        cfg.k0_rule = parse_sweep(s)?;
    }
    if !a.alphas.is_empty() {
        cfg.alphas = a.alphas.clone();
    }
    if let Some(l) = a.level {
        cfg.level = l;
    }
    // Placeholder sweep from flag-only runs: cover [k/100, k/2] in ~50 steps.
    if cfg.k0_rule == (K0Rule::Sweep { lo: 0, hi: 0, step: 0 }) {
        let n = *cfg.n_values.first().unwrap_or(&0);
        let k = cfg.k_rule.resolve(n).map_err(CliError::from)?;
        let step = (k / 100).max(1);
        cfg.k0_rule = K0Rule::Sweep { lo: step.max(5), hi: k / 2, step };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.study == Study::Areff {
        return cmd_areff(a, out);
    }
    let cfg = build_config(a)?;
    let opts = RunOptions::with_workers(a.workers);
    let report: ExperimentReport = match a.study {
        Study::Paths => {
            let n = cfg.n_values[0];
            let k = cfg.k_rule.resolve(n)?;
            let sweep = match cfg.k0_rule {
                K0Rule::Sweep { lo, hi, step } => crate::montecarlo::sweep_values(lo, hi, step, k),
                _ => vec![crate::montecarlo::resolve_k0(&cfg.k0_rule, &cfg.model, k, n)?],
            };
            run_paths(&cfg, &sweep, opts)?
        }
        Study::Grid => run_grid(&cfg, opts)?,
        Study::Coverage => run_coverage(&cfg, opts)?,
        Study::Areff => unreachable!(),
    };
    let cfg_json = serde_json::to_value(&cfg).expect("config serializes");
    let command = format!("simulate {}", study_name(a.study));
    match &a.out {
        Some(path) => write_output(path, &report.to_csv(), &RunManifest::new(&command, cfg_json.clone(), Some(cfg.base_seed), path))?,
        None => emit(out, &report.to_csv())?,
    }
    if let Some(path) = &a.plot {
        write_output(path, &report.to_plot_csv(), &RunManifest::new(&command, cfg_json, Some(cfg.base_seed), path))?;
    }
    Ok(())
}

fn study_name(s: Study) -> &'static str {
    match s {
        Study::Paths => "paths",
        Study::Grid => "grid",
        Study::Coverage => "coverage",
        Study::Areff => "areff",
    }
}

fn cmd_areff(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut gammas = a.gammas.clone();
    if gammas.is_empty() {
        gammas = match (a.model, &a.config) {
            (Some(m), _) => vec![m.gamma()],
            (None, Some(_)) => vec![build_config(a)?.model.gamma()],
            (None, None) => vec![0.5, 1.0, 2.0],
        };
    }
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let mut csv = String::from("gamma,alpha,areff\n");
    for g in &gammas {
        if !(*g > 0.0) || !g.is_finite() {
            return Err(CliError::input(format!("gamma must be positive, got {g}")));
        }
        for (alpha, eff) in areff_curve(*g, a.step).map_err(|e| CliError::input(e.to_string()))? {
            csv.push_str(&format!("{},{},{}\n", format_sig10(*g), format_sig10(alpha), format_sig10(eff)));
        }
    }
    match &a.out {
        Some(path) => {
            let cfg = serde_json::json!({ "gammas": gammas, "step": a.step });
            write_output(path, &csv, &RunManifest::new("simulate areff", cfg, None, path))
        }
        None => emit(out, &csv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tailfrac").chain(args.iter().copied())).unwrap()
    }

    fn run_to_string(args: &[&str]) -> Result<String, CliError> {
        let mut buf = Vec::new();
        run(parse(args), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn table_is_sorted_and_contains_reference_rows() {
        let text = run_to_string(&["table-alpha0", "--gamma", "3.5", "--gamma", "0.2"]).unwrap();
        let gammas: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert!(gammas.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\n1,1.899968"));
        assert!(text.lines().any(|l| l.starts_with("1,") && l.ends_with(",1.90")));
        assert!(text.lines().any(|l| l.starts_with("0.1,") && l.ends_with(",4.65")));
    }

    #[test]
    fn areff_default_grid_has_gain() {
        let text = run_to_string(&["simulate", "areff", "--gamma", "1"]).unwrap();
        assert!(text.lines().skip(1).any(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() > 1.0));
    }

    #[test]
    fn sweep_flag_parses() {
        assert_eq!(parse_sweep("10:300:5").unwrap(), K0Rule::Sweep { lo: 10, hi: 300, step: 5 });
        assert_eq!(parse_sweep("10:300").unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::Config("x".into())).code, EXIT_INPUT);
        assert_eq!(CliError::from(Error::Bounds("x".into())).code, EXIT_INFEASIBLE);
        assert_eq!(CliError::from(Error::ExcessFailures { failures: 5, replications: 10 }).code, EXIT_FAILURES);
    }

    #[test]
    fn flag_only_config_gets_a_sweep() {
        let cli = parse(&["simulate", "grid", "--model", "pareto:g=2", "--n", "1000", "--reps", "5"]);
        let Command::Simulate(a) = cli.command else { panic!() };
        let cfg = build_config(&a).unwrap();
        assert_eq!(cfg.k0_rule, K0Rule::Sweep { lo: 5, hi: 250, step: 5 });
        assert_eq!(cfg.replications, 5);
    }
}
