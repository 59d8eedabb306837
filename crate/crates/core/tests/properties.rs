mod common;

use common::*;
use gheat::solver2d::{solve_2d, ScatterGrid2D, SolverConfig2D};
use gheat::{
    expectation, semi_g_expectation_2d, solve, CovarianceSet2D, SolverConfig1D, TerminalFunction, TerminalFunction2D,
};
use proptest::prelude::*;

fn quick(n: usize) -> SolverConfig1D {
    SolverConfig1D::new(unit(), n).unwrap().with_grid(6.0, 300).unwrap()
}

fn poly(c: [f64; 4]) -> TerminalFunction {
    TerminalFunction::polynomial(c.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn translation_moves_the_surface(c in prop::array::uniform4(-1.0f64..1.0), shift in -1.0f64..1.0) {
        let phi = poly(c);
        let cfg = SolverConfig1D::new(unit(), 4).unwrap().with_grid(6.0, 600).unwrap();
        let surface = solve(&phi, &cfg).unwrap();
        let moved = expectation(&phi.shifted(shift), &cfg).unwrap().value;
        // off-node spline read against a solve on a shifted lattice, plus optimizer tolerance
        prop_assert!((surface.last().eval(shift) - moved).abs() < 1e-4);
    }

    #[test]
    fn constants_pass_through(c in prop::array::uniform4(-1.0f64..1.0), k in -10.0f64..10.0) {
        let phi = poly(c);
        let lifted = poly([c[0] + k, c[1], c[2], c[3]]);
        let a = expectation(&phi, &quick(4)).unwrap().value;
        let b = expectation(&lifted, &quick(4)).unwrap().value;
        prop_assert!((b - a - k).abs() < 1e-9);
    }

    #[test]
    fn positive_homogeneity(c in prop::array::uniform4(-1.0f64..1.0), lambda in 0.0f64..5.0) {
        let a = expectation(&poly(c), &quick(4)).unwrap().value;
        let b = expectation(&poly(c.map(|x| lambda * x)), &quick(4)).unwrap().value;
        prop_assert!((b - lambda * a).abs() < 1e-8 * (1.0 + lambda * a.abs()));
    }

    #[test]
    fn subadditivity(c in prop::array::uniform4(-1.0f64..1.0), d in prop::array::uniform4(-1.0f64..1.0)) {
        let sum: [f64; 4] = std::array::from_fn(|i| c[i] + d[i]);
        let lhs = expectation(&poly(sum), &quick(4)).unwrap().value;
        let rhs = expectation(&poly(c), &quick(4)).unwrap().value + expectation(&poly(d), &quick(4)).unwrap().value;
        // splines are linear in the data but not order preserving
        prop_assert!(lhs <= rhs + 1e-4);
    }

    #[test]
    fn g_expectation_dominates_both_means(c in prop::array::uniform4(-1.0f64..1.0)) {
        let phi = poly(c);
        let up = expectation(&phi, &quick(6)).unwrap().value;
        let neg = TerminalFunction::polynomial(c.iter().map(|x| -x).collect());
        let down = -expectation(&neg, &quick(6)).unwrap().value;
        prop_assert!(down <= up + 1e-4);
    }
}

#[test]
fn symmetric_inputs_give_symmetric_surfaces() {
    let cov = CovarianceSet2D::new(unit(), unit(), -0.4, 0.4).unwrap();
    let grid = ScatterGrid2D::symmetrized(300, cov.sigma_max(), 3).unwrap();
    let cfg = SolverConfig2D::new(cov, 3).unwrap().with_grid(grid).unwrap();
    let phi = TerminalFunction2D::new("sym", 2, |a, b| a * a * a + b * b * b + 0.5 * a * b);
    let surface = solve_2d(&phi, &cfg).unwrap();
    for i in 0..=surface.steps() {
        for (x1, x2) in [(0.3, -0.7), (1.1, 0.2), (-0.5, -0.9)] {
            let (u, w) = (surface.eval(i, x1, x2), surface.eval(i, x2, x1));
            assert!((u - w).abs() < 1e-6, "step {i}: {u} vs {w}");
        }
    }
}

#[test]
fn two_dimensional_value_is_at_least_the_semi_g_value() {
    let cov = CovarianceSet2D::new(unit(), unit(), -0.5, 0.5).unwrap();
    let cfg = SolverConfig2D::new(cov, 5).unwrap();
    for phi in [
        TerminalFunction2D::new("additive-cube-2d", 2, |a, b| a * a * a + b * b * b),
        TerminalFunction2D::new("product-2d", 1, |a, b| a * b),
        TerminalFunction2D::new("mixed", 2, |a, b| a * a * a - (b - 0.5).powi(2) + a * b),
    ] {
        let g = gheat::solver2d::expectation_2d(&phi, &cfg).unwrap().value;
        let semi = semi_g_expectation_2d(&phi, &cov, 32).unwrap().value;
        assert!(g >= semi - 1e-3, "{}: {g} < {semi}", phi.name());
    }
}
