mod support;

use support::{median, rng, random_vector};
use svilab_core::metrics::yosida_residual;
use svilab_core::ppawss::{inner_iterations, run_ppawss};
use svilab_core::problems::bimatrix_from_payoff;
use svilab_core::vs_ave::sample_size;
use svilab_core::{
    BudgetCounter, FeasibleSet, Matrix, MonotoneMap, NoiseModel, PpawssConfig, ProblemInstance, StochasticOracle,
    TraceOptions, Vector,
};

fn matching_pennies() -> ProblemInstance {
    let payoff = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
    bimatrix_from_payoff(payoff, 0.0, 1).unwrap()
}

/// F(z) = Sz + b with S skew-symmetric, so μ = 0, on [−1, 1]^4 with an
/// interior root; Gaussian noise keeps large batches cheap.
fn skew_problem(sigma: f64, seed: u64) -> ProblemInstance {
    let s = Matrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, 0.5, 0.0, -1.0, 0.0, 0.0, 0.3, -0.5, 0.0, 0.0, 0.8, 0.0, -0.3, -0.8, 0.0],
    );
    let root = Vector::from_row_slice(&[0.2, -0.1, 0.3, 0.0]);
    let b = -(&s * &root);
    let map = MonotoneMap::affine_tight(s, b).unwrap();
    let oracle = StochasticOracle::new(map, NoiseModel::AdditiveGaussian { sigma }, seed).unwrap();
    ProblemInstance::new(oracle, FeasibleSet::cube(4, -1.0, 1.0).unwrap())
        .unwrap()
        .with_reference(root, 1e-12)
        .unwrap()
}

#[test]
fn matching_pennies_reaches_the_mixed_equilibrium() {
    let p = matching_pennies();
    let cfg = PpawssConfig {
        lambda: 10.0,
        eta: 1.0,
        outer_iterations: 100,
        ..Default::default()
    };
    let u0 = Vector::from_row_slice(&[1.0, 0.0, 0.0, 1.0]);
    let out = run_ppawss(&p, &u0, &cfg, BudgetCounter::unlimited(), &TraceOptions::off()).unwrap();
    assert!((out.point - Vector::from_element(4, 0.5)).norm() <= 1e-3);
}

#[test]
fn zero_map_leaves_every_iterate_in_place() {
    let map = MonotoneMap::zero(3);
    let p = ProblemInstance::new(StochasticOracle::deterministic(map), FeasibleSet::simplex(3).unwrap()).unwrap();
    let u0 = Vector::from_row_slice(&[0.2, 0.3, 0.5]);
    for lambda in [0.1, 1.0, 50.0] {
        let cfg = PpawssConfig {
            lambda,
            outer_iterations: 20,
            ..Default::default()
        };
        let out = run_ppawss(&p, &u0, &cfg, BudgetCounter::unlimited(), &TraceOptions::off()).unwrap();
        assert!((out.point - &u0).amax() <= 1e-15);
    }
}

#[test]
fn solution_is_a_fixed_point() {
    let p = matching_pennies();
    let star = Vector::from_element(4, 0.5);
    let cfg = PpawssConfig {
        lambda: 3.0,
        outer_iterations: 30,
        ..Default::default()
    };
    let out = run_ppawss(&p, &star, &cfg, BudgetCounter::unlimited(), &TraceOptions::every(1)).unwrap();
    assert!((out.point - &star).amax() <= 1e-12);
    assert!(out.trace.rows.iter().all(|r| r.metrics.natural_residual <= 1e-12));
}

#[test]
fn call_count_is_the_nested_schedule_sum() {
    let p = skew_problem(0.5, 3);
    let cfg = PpawssConfig {
        lambda: 2.0,
        outer_iterations: 12,
        ..Default::default()
    };
    let l = p.mean_map().lipschitz();
    let out = run_ppawss(&p, &p.feasible_set.default_point(), &cfg, BudgetCounter::unlimited(), &TraceOptions::off())
        .unwrap();
    let q = cfg.inner_q(l);
    let rho = q.powf(cfg.beta);
    let expected: u64 = (0..12)
        .map(|k| {
            let ell = inner_iterations(k, q, cfg.alpha, 1);
            (0..ell).map(|s| 2 * sample_size(s, rho, 1).unwrap()).sum::<u64>()
        })
        .sum();
    assert_eq!(out.calls, expected);
    assert_eq!(out.inner_iterations.len(), 12);
}

#[test]
fn budget_stops_at_batch_granularity() {
    let p = skew_problem(0.5, 3);
    let cfg = PpawssConfig {
        lambda: 2.0,
        outer_iterations: 1000,
        ..Default::default()
    };
    let out = run_ppawss(&p, &p.feasible_set.default_point(), &cfg, BudgetCounter::new(20_000), &TraceOptions::off())
        .unwrap();
    assert!(out.trace.truncated);
    assert!(out.calls <= 20_000);
    assert!(p.feasible_set.contains(&out.point, 1e-12));
    let last = out.trace.last().unwrap();
    assert_eq!(last.calls, out.calls);
}

#[test]
fn stochastic_yosida_residual_trends_down() {
    let lambda = 1.0;
    let cfg = PpawssConfig {
        lambda,
        outer_iterations: 200,
        ..Default::default()
    };
    let mut at20 = Vec::new();
    let mut at200 = Vec::new();
    let mut r = rng(12);
    for seed in 0..7 {
        let p = skew_problem(0.5, seed);
        let u0 = p.feasible_set.project(&random_vector(&mut r, 4, 1.0)).unwrap();
        let short = run_ppawss(&p, &u0, &PpawssConfig { outer_iterations: 20, ..cfg }, BudgetCounter::unlimited(), &TraceOptions::off())
            .unwrap();
        let long = run_ppawss(&p, &u0, &cfg, BudgetCounter::unlimited(), &TraceOptions::off()).unwrap();
        at20.push(yosida_residual(&short.point, lambda, &p, 1e-10).unwrap().powi(2));
        at200.push(yosida_residual(&long.point, lambda, &p, 1e-10).unwrap().powi(2));
    }
    let (m20, m200) = (median(&mut at20), median(&mut at200));
    assert!(m200 < m20, "median ‖T‖² at K=200 {m200} vs K=20 {m20}");
}

#[test]
fn inner_metadata_for_table_rows() {
    for (l, lambda, kappa) in [(7.05, 3500.0, 24676.0), (70.5, 1200.0, 84601.0), (705.0, 40.0, 28201.0)] {
        let cfg = PpawssConfig {
            lambda,
            ..Default::default()
        };
        assert!((cfg.inner_kappa(l) - kappa).abs() < 1e-6);
        assert!(cfg.inner_config(1, l).validate().is_ok());
    }
}
