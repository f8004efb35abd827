use tailfrac::asymptotics::{alpha0, k0_opt1, round_k0, AsymptoticContext};
use tailfrac::montecarlo::{
    empirical_k0_opt, run_coverage, run_grid, run_paths, Aggregate, Alpha0Mode, ExperimentConfig, ExperimentReport,
    K0Rule, KRule, RunOptions, SweepEstimator,
};
use tailfrac::sampling::TailModel;

fn cfg(model: TailModel, n: usize, reps: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(model, vec![n], reps, seed)
}

fn sweep(lo: usize, hi: usize, step: usize) -> K0Rule {
    K0Rule::Sweep { lo, hi, step }
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let mut c = cfg(TailModel::burr(2.0, 1.0).unwrap(), 400, 300, 5);
    c.k0_rule = sweep(20, 150, 10);
    let one = run_grid(&c, RunOptions::with_workers(1)).unwrap().to_csv();
    let many = run_grid(&c, RunOptions::with_workers(6)).unwrap().to_csv();
    assert_eq!(one, many);

    c.n_values = vec![300, 600];
    c.k0_rule = K0Rule::Power(0.75);
    let one = run_coverage(&c, RunOptions::with_workers(1)).unwrap().to_csv();
    let many = run_coverage(&c, RunOptions::with_workers(5)).unwrap().to_csv();
    assert_eq!(one, many);
}

#[test]
fn shifting_the_data_leaves_estimates_unchanged() {
    let mut c = cfg(TailModel::frechet(1.0).unwrap(), 500, 200, 11);
    c.k0_rule = sweep(20, 120, 20);
    let base = run_grid(&c, RunOptions::with_workers(2)).unwrap();
    let shifted = run_grid(&c, RunOptions { workers: 2, data_shift: 1000.0 }).unwrap();
    assert_eq!(base.rows.len(), shifted.rows.len());
    for (a, b) in base.rows.iter().zip(&shifted.rows) {
        assert_eq!((a.k0, &a.method), (b.k0, &b.method));
        // shifting by 1e3 costs a few digits of the data themselves
        let rel = ((a.mean - b.mean) / a.mean).abs();
        assert!(rel < 1e-9, "{} k0={} rel={rel:e}", a.method, a.k0);
    }
}

#[test]
fn mse_is_bias_squared_plus_variance() {
    let mut c = cfg(TailModel::pareto(0.5).unwrap(), 300, 400, 3);
    c.k0_rule = sweep(10, 100, 15);
    for r in run_grid(&c, RunOptions::default()).unwrap().rows {
        let lhs = r.mse;
        let rhs = r.bias * r.bias + r.variance();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300), "{lhs} vs {rhs}");
        assert!(r.mse >= r.bias * r.bias - 1e-12);
    }
    let agg = Aggregate::from_values(&[1.0, 2.0, 3.0, 4.0], 2.0).unwrap();
    assert_eq!((agg.mean, agg.bias), (2.5, 0.5));
    assert!((agg.mse - 1.5).abs() < 1e-15);
}

#[test]
fn coverage_agrees_across_seeds_within_sampling_error() {
    let reps = 1500;
    let mut covs = Vec::new();
    for seed in [101, 202] {
        let mut c = cfg(TailModel::pareto(1.0).unwrap(), 800, reps, seed);
        c.k0_rule = K0Rule::Explicit(60);
        let rep = run_coverage(&c, RunOptions::default()).unwrap();
        covs.push(rep.rows_for("fraga_alves").next().unwrap().coverage.unwrap());
    }
    let p = 0.5 * (covs[0] + covs[1]);
    let se = (2.0 * p * (1.0 - p) / reps as f64).sqrt();
    assert!((covs[0] - covs[1]).abs() <= 4.0 * se, "{covs:?} se={se}");
}

#[test]
fn very_high_level_covers_almost_always() {
    let mut c = cfg(TailModel::pareto(1.0).unwrap(), 1000, 500, 17);
    c.level = 0.9999;
    c.k0_rule = K0Rule::Explicit(80);
    let rep = run_coverage(&c, RunOptions::default()).unwrap();
    for r in &rep.rows {
        assert!(r.coverage.unwrap() >= 0.99, "{} {:?}", r.method, r.coverage);
    }
}

#[test]
fn empirical_optimum_is_interior_for_burr_at_alpha0() {
    let mut c = cfg(TailModel::burr(2.0, 1.0).unwrap(), 1500, 400, 23);
    c.k_rule = KRule::FixedFraction(0.5);
    let a0 = alpha0(0.5).unwrap();
    assert!((a0 - 2.37).abs() < 0.01);
    let grid: Vec<usize> = (10..=740).step_by(10).collect();
    let opt = empirical_k0_opt(&c, SweepEstimator::NewFamily { alpha: a0 }, &grid, RunOptions::default()).unwrap();
    assert!(opt > grid[0] && opt < *grid.last().unwrap(), "k0 = {opt}");
}

#[test]
fn empirical_optimum_tracks_theory_for_pareto_at_alpha_one() {
    let model = TailModel::pareto(2.0).unwrap();
    let n = 2000;
    let k = 1000;
    let mut c = cfg(model, n, 600, 29);
    c.k_rule = KRule::Explicit(k);
    let p = model.true_params();
    let ctx = AsymptoticContext::new(p.gamma, p.rho, p.c, 1.0).unwrap();
    let theory = round_k0(k0_opt1(&ctx, k as f64).unwrap(), k);
    let grid: Vec<usize> = (10..k).step_by(10).collect();
    let opt = empirical_k0_opt(&c, SweepEstimator::NewFamily { alpha: 1.0 }, &grid, RunOptions::default()).unwrap();
    let ratio = opt as f64 / theory as f64;
    assert!((0.5..=2.0).contains(&ratio), "empirical {opt}, theory {theory}");
}

#[test]
fn frechet_alpha0_mean_is_close_to_truth() {
    let mut c = cfg(TailModel::frechet(1.0).unwrap(), 3000, 500, 31);
    c.k_rule = KRule::Explicit(1500);
    c.alphas = vec![1.90];
    let rep = run_paths(&c, &[150], RunOptions::default()).unwrap();
    let row = &rep.rows[0];
    assert_eq!((row.k0, row.k), (150, 1500));
    assert!((row.mean - 1.0).abs() < 0.05, "mean {}", row.mean);
}

#[test]
fn pareto_null_bias_alpha_beats_alpha_one() {
    let model = TailModel::pareto(2.0).unwrap();
    let mut c = cfg(model, 2000, 1000, 37);
    c.k_rule = KRule::Explicit(1000);
    c.alphas = vec![1.0, 1.60];
    let rep = run_paths(&c, &[300, 500, 700], RunOptions::default()).unwrap();
    let mean_abs_bias = |a: f64| {
        let v: Vec<f64> = rep.rows.iter().filter(|r| r.alpha == Some(a)).map(|r| r.bias.abs()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (b1, b16) = (mean_abs_bias(1.0), mean_abs_bias(1.60));
    assert!(b16 < b1, "alpha=1.60: {b16}, alpha=1: {b1}");
}

#[test]
fn pilot_mode_reports_mean_alpha0() {
    let mut c = cfg(TailModel::burr(2.0, 1.0).unwrap(), 600, 200, 41);
    c.alpha0_mode = Alpha0Mode::PilotPlugin;
    let rep = run_coverage(&c, RunOptions::default()).unwrap();
    let row = rep.rows_for("new_family").next().unwrap();
    let a = row.alpha.unwrap();
    assert!(a > 1.0 && a < 10.0, "{a}");
}

#[test]
fn csv_round_trip_after_rounding() {
    let mut c = cfg(TailModel::burr(1.0, 1.0).unwrap(), 300, 100, 43);
    c.n_values = vec![300, 500];
    let rep = run_coverage(&c, RunOptions::default()).unwrap();
    let text = rep.to_csv();
    let back = ExperimentReport::from_csv(&text, rep.seed).unwrap();
    assert_eq!(back, rep.rounded());
    assert_eq!(back.to_csv(), text);
}

#[test]
fn bad_configs_are_rejected() {
    let mut c = cfg(TailModel::pareto(1.0).unwrap(), 500, 10, 1);
    c.k0_rule = K0Rule::Explicit(400);
    assert!(run_coverage(&c, RunOptions::default()).is_err());
    c.k0_rule = K0Rule::Power(0.75);
    c.n_values = vec![];
    assert!(run_coverage(&c, RunOptions::default()).is_err());
}
