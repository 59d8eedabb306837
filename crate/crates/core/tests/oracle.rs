mod common;

use common::*;
use gheat::corpus;
use gheat::oracle::{fd_solve, nested_evaluate, oracle_value_x3, FdConfig, NestedConfig};
use gheat::{expectation, semi_g_expectation, Backend, SemiGNormal, SolverConfig1D, TerminalFunction, VarianceInterval};

fn one_dim_corpus() -> Vec<TerminalFunction> {
    corpus::entries()
        .iter()
        .filter_map(|e| corpus::lookup_1d(e.name))
        .collect()
}

#[test]
fn frozen_constants_reproduce() {
    assert!((oracle_value_x3(&unit()).unwrap() - ORACLE_X3_HALF_ONE).abs() < 1e-12);
    let n2 = nested_evaluate(&cube(), &unit(), 2, 0.0, &NestedConfig::default()).unwrap();
    assert!((n2 - NESTED_X3_N2).abs() < 1e-10, "{n2}");
}

#[test]
fn single_nested_step_is_the_semi_g_value() {
    let w = SemiGNormal::new(unit());
    for phi in one_dim_corpus() {
        let nested = nested_evaluate(&phi, &unit(), 1, 0.0, &NestedConfig::default()).unwrap();
        let semi = semi_g_expectation(&phi, &w, &Backend::default()).unwrap().value;
        assert!((nested - semi).abs() < 1e-6, "{}: {nested} vs {semi}", phi.name());
    }
}

#[test]
fn solver_tracks_fd_across_the_corpus() {
    let cfg = SolverConfig1D::new(unit(), 100).unwrap();
    let fd_cfg = FdConfig::with_cfl_fraction(unit(), 0.01, 10.0, 0.9, 1).unwrap();
    for phi in one_dim_corpus() {
        let solver = expectation(&phi, &cfg).unwrap().value;
        let fd = fd_solve(&phi, &fd_cfg).unwrap().value_at_zero_time(0.0);
        assert!((solver - fd).abs() < 1e-2, "{}: {solver} vs {fd}", phi.name());
    }
}

#[test]
fn degenerate_fd_matches_gaussian_moments() {
    let flat = VarianceInterval::new(0.8, 0.8).unwrap();
    let fd_cfg = FdConfig::with_cfl_fraction(flat, 0.01, 10.0, 0.9, 1).unwrap();
    let s2 = 0.64;
    let cases: [(&str, fn(f64) -> f64, f64); 5] = [
        ("one", |_| 1.0, 1.0),
        ("x", |x| x, 0.0),
        ("x^2", |x| x * x, s2),
        ("x^3 + x", |x| x * x * x + x, 0.0),
        ("x^4", |x| x.powi(4), 3.0 * s2 * s2),
    ];
    for (name, f, exact) in cases {
        let phi = TerminalFunction::new(name, 3, f);
        let fd = fd_solve(&phi, &fd_cfg).unwrap().value_at_zero_time(0.0);
        assert!((fd - exact).abs() < 1e-3, "{name}: {fd} vs {exact}");
    }
}

#[test]
fn fd_rejects_steps_beyond_the_stability_limit() {
    assert!(FdConfig::new(unit(), 0.01, 5.0, 2e-4, 1).is_err());
    assert!(FdConfig::new(unit(), 0.01, 5.0, 5e-5, 1).is_ok());
}
