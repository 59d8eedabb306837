//! Sublinear expectations under the semi-G-normal law `W = Z Y`, with `Z`
//! maximally distributed on `[sigma_lo, sigma_hi]` and `Y` standard normal
//! independent of `Z`.
//!
//! `Ê[phi(W)] = max_{z} E[phi(N(0, z²))]`: one bounded maximization wrapped
//! around one classical Gaussian expectation. In two dimensions the
//! maximization runs over the `(sigma1, sigma2, rho)` covariance box.

use crate::error::Result;
use crate::expectation::{
    gauss_expectation_mc, gauss_expectation_mc_cv, gauss_expectation_quad,
    gauss_expectation_quad_2d, matrix_sqrt_2x2, Backend, McSample,
};
use crate::optimize::{self, try_maximal_expectation, Maximum};
use crate::quadrature::QuadratureRule;
use crate::types::{CovariancePoint, CovarianceSet2D, TerminalFunction, TerminalFunction2D, VarianceInterval};

/// Semi-G-normal distribution with volatility interval `variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiGNormal {
    pub variance: VarianceInterval,
}

impl SemiGNormal {
    pub fn new(variance: VarianceInterval) -> Self {
        Self { variance }
    }
}

/// `max_{z in [sigma_lo, sigma_hi]} E[phi(N(0, z²))]` and the maximizing `z`.
pub fn semi_g_expectation(
    phi: &TerminalFunction,
    w: &SemiGNormal,
    backend: &Backend,
) -> Result<Maximum> {
    backend.validate()?;
    let f = |y: f64| phi.eval(y);
    match *backend {
        Backend::Quadrature { order } => {
            let rule = QuadratureRule::gauss_hermite(order)?;
            try_maximal_expectation(|z| gauss_expectation_quad(f, 0.0, z, &rule), &w.variance)
        }
        Backend::MonteCarlo { samples, seed } => {
            let sample = McSample::new(samples, seed);
            try_maximal_expectation(|z| gauss_expectation_mc(f, 0.0, z, &sample), &w.variance)
        }
        Backend::MonteCarloCv { samples, seed } => {
            let sample = McSample::new(samples, seed);
            let h = 1e-3;
            let (f1, f2) = crate::expectation::finite_diff_derivs(f, 0.0, h);
            try_maximal_expectation(
                |z| gauss_expectation_mc_cv(f, f1, f2, 0.0, z, &sample),
                &w.variance,
            )
        }
    }
}

/// Result of a maximization over a covariance box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMaximum {
    pub value: f64,
    pub argmax: CovariancePoint,
    pub evaluations: usize,
}

/// Coordinate sweeps after corner seeding.
pub const BOX_SWEEPS: usize = 3;

/// Maximizes `objective` over the `(sigma1, sigma2, rho)` box.
///
/// All 8 corners are evaluated, then the best corner is refined by
/// coordinate-wise golden-section passes. Ties keep the larger coordinates.
pub fn maximize_covariance<F>(mut objective: F, cov: &CovarianceSet2D) -> Result<BoxMaximum>
where
    F: FnMut(CovariancePoint) -> Result<f64>,
{
    let mut evaluations = 0;
    let mut best: Option<(CovariancePoint, f64)> = None;
    for corner in cov.corners() {
        let v = objective(corner)?;
        evaluations += 1;
        best = match best {
            // corners arrive in increasing coordinate order, so ties move on
            Some((p, bv)) if optimize::beats(bv, 0.0, v, 1.0) => Some((p, bv)),
            _ => Some((corner, v)),
        };
    }
    let (mut point, mut value) = best.expect("box has corners");

    for _ in 0..BOX_SWEEPS {
        let mut moved = false;
        for axis in 0..3 {
            let (lo, hi) = cov.bounds(axis);
            if hi <= lo {
                continue;
            }
            let base = point;
            let m = optimize::try_maximize(|c| objective(base.with_coord(axis, c)), lo, hi)?;
            evaluations += m.evaluations;
            if optimize::beats(m.value, m.argmax, value, point.coord(axis))
                && m.argmax != point.coord(axis)
            {
                point = point.with_coord(axis, m.argmax);
                value = m.value;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(BoxMaximum {
        value,
        argmax: point,
        evaluations,
    })
}

/// `max_{V in box} E[phi(N(0, V))]` by tensor Gauss–Hermite quadrature.
pub fn semi_g_expectation_2d(
    phi: &TerminalFunction2D,
    cov: &CovarianceSet2D,
    order: usize,
) -> Result<BoxMaximum> {
    let rule = QuadratureRule::gauss_hermite(order)?;
    maximize_covariance(
        |p| {
            let root = matrix_sqrt_2x2(p.matrix())?;
            gauss_expectation_quad_2d(|a, b| phi.eval(a, b), [0.0, 0.0], root, &rule)
        },
        cov,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w() -> SemiGNormal {
        SemiGNormal::new(VarianceInterval::new(0.5, 1.0).unwrap())
    }

    fn quad() -> Backend {
        Backend::Quadrature { order: 64 }
    }

    #[test]
    fn second_moment_bounds() {
        let sq = TerminalFunction::new("square", 1, |x| x * x);
        let m = semi_g_expectation(&sq, &w(), &quad()).unwrap();
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 1e-12);
        assert_eq!(m.argmax, 1.0);
        let neg = TerminalFunction::new("neg-square", 1, |x| -x * x);
        let m = semi_g_expectation(&neg, &w(), &quad()).unwrap();
        assert_abs_diff_eq!(m.value, -0.25, epsilon = 1e-12);
        assert_eq!(m.argmax, 0.5);
    }

    #[test]
    fn odd_moment_vanishes() {
        for sign in [1.0, -1.0] {
            let cube = TerminalFunction::new("cube", 2, move |x| sign * x * x * x);
            let m = semi_g_expectation(&cube, &w(), &quad()).unwrap();
            assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-12);
            assert_eq!(m.argmax, 1.0);
        }
    }

    #[test]
    fn convex_and_concave_collapse_to_endpoints() {
        let convex = [
            TerminalFunction::new("square", 1, |x| x * x),
            TerminalFunction::new("quartic", 3, |x| x.powi(4)),
            TerminalFunction::new("exp", 1, f64::exp),
        ];
        for phi in &convex {
            let m = semi_g_expectation(phi, &w(), &quad()).unwrap();
            assert_abs_diff_eq!(m.argmax, 1.0, epsilon = 1e-9);
            let neg = TerminalFunction::new("neg", 3, {
                let phi = phi.clone();
                move |x| -phi.eval(x)
            });
            let m = semi_g_expectation(&neg, &w(), &quad()).unwrap();
            assert_abs_diff_eq!(m.argmax, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn scaling_moves_into_the_interval() {
        let phi = TerminalFunction::new("bump", 0, |x| 1.0 / (1.0 + (-x * x).exp()) + 0.3 * x.sin());
        let lambda = 1.7;
        let lhs = semi_g_expectation(&phi.rescaled(lambda), &w(), &quad()).unwrap();
        let scaled = SemiGNormal::new(w().variance.scaled(lambda).unwrap());
        let rhs = semi_g_expectation(&phi, &scaled, &quad()).unwrap();
        assert_abs_diff_eq!(lhs.value, rhs.value, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_backends_agree_roughly() {
        let sq = TerminalFunction::new("square", 1, |x| x * x);
        for backend in [
            Backend::MonteCarlo { samples: 20_000, seed: 1 },
            Backend::MonteCarloCv { samples: 20_000, seed: 1 },
        ] {
            let m = semi_g_expectation(&sq, &w(), &backend).unwrap();
            assert_abs_diff_eq!(m.value, 1.0, epsilon = 0.05);
        }
    }

    fn box_set() -> CovarianceSet2D {
        let s = VarianceInterval::new(0.5, 1.0).unwrap();
        CovarianceSet2D::new(s, s, -0.5, 0.5).unwrap()
    }

    #[test]
    fn two_dimensional_cases() {
        let sum_sq = TerminalFunction2D::new("sum-sq", 1, |a, b| a * a + b * b);
        let m = semi_g_expectation_2d(&sum_sq, &box_set(), 8).unwrap();
        assert_abs_diff_eq!(m.value, 2.0, epsilon = 1e-10);
        assert_eq!((m.argmax.sigma1, m.argmax.sigma2), (1.0, 1.0));

        let prod = TerminalFunction2D::new("prod", 1, |a, b| a * b);
        let m = semi_g_expectation_2d(&prod, &box_set(), 8).unwrap();
        assert_abs_diff_eq!(m.value, 0.5, epsilon = 1e-10);
        assert_eq!((m.argmax.sigma1, m.argmax.sigma2, m.argmax.rho), (1.0, 1.0, 0.5));

        let neg_prod = TerminalFunction2D::new("neg-prod", 1, |a, b| -a * b);
        let m = semi_g_expectation_2d(&neg_prod, &box_set(), 8).unwrap();
        assert_abs_diff_eq!(m.value, 0.5, epsilon = 1e-10);
        assert_eq!((m.argmax.sigma1, m.argmax.sigma2, m.argmax.rho), (1.0, 1.0, -0.5));
    }

    #[test]
    fn box_interior_maximizer() {
        // peak at sigma1 = 0.8, independent of the rest
        let m = maximize_covariance(
            |p| Ok(-(p.sigma1 - 0.8).powi(2) - (p.rho - 0.1).powi(2)),
            &box_set(),
        )
        .unwrap();
        assert_abs_diff_eq!(m.argmax.sigma1, 0.8, epsilon = 1e-5);
        assert_abs_diff_eq!(m.argmax.rho, 0.1, epsilon = 1e-5);
        assert_eq!(m.argmax.sigma2, 1.0);
    }
}
