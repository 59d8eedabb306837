//! The iteration in two dimensions under covariance uncertainty.
//!
//! Nodes are a fixed Gaussian point cloud; each step maximizes the Gaussian
//! expectation of the previous iterate over the `(sigma1, sigma2, rho)` box at
//! every node and refits an additive surface ([`SurfaceFit2D`]) through the
//! results.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gam::{FitOptions, Surface2D, SurfaceFit2D};
use crate::quadrature::QuadratureRule;
use crate::semi_g::{maximize_covariance, BoxMaximum};
use crate::types::{CovariancePoint, CovarianceSet2D, TerminalFunction2D};

pub const MIN_SCATTER_POINTS: usize = 50;
pub const DEFAULT_SCATTER_POINTS: usize = 800;

/// Nodes drawn from `N(0, sigma² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterGrid2D {
    points: Vec<[f64; 2]>,
    sigma: f64,
    seed: u64,
}

impl ScatterGrid2D {
    pub fn sample(count: usize, sigma: f64, seed: u64) -> Result<Self> {
        Self::check(count, sigma)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                [sigma * a, sigma * b]
            })
            .collect();
        Ok(Self { points, sigma, seed })
    }

    /// `count / 2` draws followed by their coordinate swaps; `count` must be even.
    pub fn symmetrized(count: usize, sigma: f64, seed: u64) -> Result<Self> {
        if !count.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "symmetrized scatter grid needs an even count, got {count}"
            )));
        }
        Self::check(count, sigma)?;
        let half = Self::sample(count / 2, sigma, seed).or_else(|_| {
            // `count / 2` may fall below the minimum on its own
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = (0..count / 2)
                .map(|_| {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    [sigma * a, sigma * b]
                })
                .collect();
            Ok::<_, Error>(Self { points, sigma, seed })
        })?;
        let mut points = half.points.clone();
        points.extend(half.points.iter().map(|p| [p[1], p[0]]));
        Ok(Self { points, sigma, seed })
    }

    fn check(count: usize, sigma: f64) -> Result<()> {
        if count < MIN_SCATTER_POINTS {
            return Err(Error::InvalidGrid(format!(
                "scatter grid needs at least {MIN_SCATTER_POINTS} points, got {count}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidGrid(format!("sampling sigma must be positive, got {sigma}")));
        }
        Ok(())
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig2D {
    pub n: usize,
    pub covariance: CovarianceSet2D,
    pub grid: Arc<ScatterGrid2D>,
    /// Gauss–Hermite order for expectations of fitted surfaces (per marginal).
    pub order: usize,
    /// Tensor Gauss–Hermite order for the terminal function.
    pub terminal_order: usize,
    pub fit: FitOptions,
}

impl SolverConfig2D {
    /// 800 nodes from `N(0, sigma_max² I)` with seed 0, order 64, terminal order 32.
    pub fn new(covariance: CovarianceSet2D, n: usize) -> Result<Self> {
        let grid = ScatterGrid2D::sample(DEFAULT_SCATTER_POINTS, covariance.sigma_max(), 0)?;
        let cfg = Self {
            n,
            covariance,
            grid: Arc::new(grid),
            order: 64,
            terminal_order: 32,
            fit: FitOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_grid(mut self, grid: ScatterGrid2D) -> Result<Self> {
        self.grid = Arc::new(grid);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("iteration count n must be at least 1".into()));
        }
        if self.grid.len() < MIN_SCATTER_POINTS {
            return Err(Error::InvalidGrid(format!(
                "scatter grid needs at least {MIN_SCATTER_POINTS} points, got {}",
                self.grid.len()
            )));
        }
        if self.order == 0 || self.terminal_order == 0 {
            return Err(Error::InvalidConfig("quadrature orders must be positive".into()));
        }
        if self.fit.knots < 4 {
            return Err(Error::InvalidConfig(format!(
                "surface fit needs at least 4 knots, got {}",
                self.fit.knots
            )));
        }
        Ok(())
    }
}

/// One iterate `phi_{i,n}` on the plane.
#[derive(Debug, Clone)]
pub struct IterationFunction2D {
    exact: Option<TerminalFunction2D>,
    fit: Option<SurfaceFit2D>,
    values: Vec<f64>,
    argmax: Option<Vec<CovariancePoint>>,
    step: usize,
    total_steps: usize,
}

impl IterationFunction2D {
    pub fn terminal(phi: &TerminalFunction2D, grid: &ScatterGrid2D, total_steps: usize) -> Self {
        Self {
            exact: Some(phi.clone()),
            fit: None,
            values: grid.points().iter().map(|p| phi.eval(p[0], p[1])).collect(),
            argmax: None,
            step: 0,
            total_steps,
        }
    }

    #[inline]
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match (&self.exact, &self.fit) {
            (Some(phi), _) => phi.eval(x1, x2),
            (None, Some(fit)) => fit.eval(x1, x2),
            (None, None) => unreachable!("iterate has neither terminal nor fit"),
        }
    }

    /// `E[phi_i(N(mean, cov))]`.
    pub fn expectation(&self, mean: [f64; 2], cov: [[f64; 2]; 2], cfg: &SolverConfig2D) -> Result<f64> {
        match (&self.exact, &self.fit) {
            (Some(phi), _) => {
                let rule = QuadratureRule::gauss_hermite(cfg.terminal_order)?;
                phi.gaussian_expectation(mean, cov, &rule)
            }
            (None, Some(fit)) => {
                let rule = QuadratureRule::gauss_hermite(cfg.order)?;
                fit.gaussian_expectation(mean, cov, &rule)
            }
            (None, None) => unreachable!("iterate has neither terminal nor fit"),
        }
    }

    /// Values at the scatter nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fit(&self) -> Option<&SurfaceFit2D> {
        self.fit.as_ref()
    }

    pub fn argmax(&self) -> Option<&[CovariancePoint]> {
        self.argmax.as_deref()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        1.0 - self.step as f64 / self.total_steps as f64
    }
}

/// `max_{V in box} E[prev(N(x, V / n))]`.
pub fn point_value_2d(
    prev: &IterationFunction2D,
    x: [f64; 2],
    cfg: &SolverConfig2D,
) -> Result<BoxMaximum> {
    let inv_n = 1.0 / cfg.n as f64;
    maximize_covariance(
        |p| {
            let m = p.matrix();
            let cov = [[m[0][0] * inv_n, m[0][1] * inv_n], [m[1][0] * inv_n, m[1][1] * inv_n]];
            prev.expectation(x, cov, cfg)
        },
        &cfg.covariance,
    )
}

/// One step: box maximization at every node, then a surface refit.
pub fn iterate_step_2d(prev: &IterationFunction2D, cfg: &SolverConfig2D) -> Result<IterationFunction2D> {
    let step = prev.step + 1;
    let results: Vec<BoxMaximum> = cfg
        .grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(node, x)| {
            point_value_2d(prev, *x, cfg).map_err(|e| Error::NodeFailure {
                step,
                node,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|m| m.value).collect();
    let fit = SurfaceFit2D::fit(cfg.grid.points(), &values, &cfg.fit)?;
    Ok(IterationFunction2D {
        exact: None,
        fit: Some(fit),
        values,
        argmax: Some(results.iter().map(|m| m.argmax).collect()),
        step,
        total_steps: cfg.n,
    })
}

/// The iterates `phi_{0,n}, ..., phi_{n,n}` on the scatter grid.
#[derive(Debug, Clone)]
pub struct SolutionSurface2D {
    iterations: Vec<IterationFunction2D>,
    covariance: CovarianceSet2D,
    grid: Arc<ScatterGrid2D>,
}

impl SolutionSurface2D {
    pub fn iterations(&self) -> &[IterationFunction2D] {
        &self.iterations
    }

    pub fn covariance(&self) -> &CovarianceSet2D {
        &self.covariance
    }

    pub fn grid(&self) -> &ScatterGrid2D {
        &self.grid
    }

    pub fn steps(&self) -> usize {
        self.iterations.len() - 1
    }

    pub fn time_of(&self, i: usize) -> f64 {
        1.0 - i as f64 / self.steps() as f64
    }

    pub fn last(&self) -> &IterationFunction2D {
        self.iterations.last().expect("surface has at least one iterate")
    }

    pub fn eval(&self, i: usize, x1: f64, x2: f64) -> f64 {
        self.iterations[i].eval(x1, x2)
    }
}

pub fn solve_2d(phi: &TerminalFunction2D, cfg: &SolverConfig2D) -> Result<SolutionSurface2D> {
    cfg.validate()?;
    let mut iterations = vec![IterationFunction2D::terminal(phi, &cfg.grid, cfg.n)];
    for _ in 0..cfg.n {
        let next = iterate_step_2d(iterations.last().expect("non-empty"), cfg)?;
        iterations.push(next);
    }
    Ok(SolutionSurface2D {
        iterations,
        covariance: cfg.covariance,
        grid: cfg.grid.clone(),
    })
}

/// `phi_{n,n}(0, 0)`: `n - 1` fitted steps, then the last maximization taken
/// directly at the origin.
pub fn expectation_2d(phi: &TerminalFunction2D, cfg: &SolverConfig2D) -> Result<BoxMaximum> {
    cfg.validate()?;
    let mut current = IterationFunction2D::terminal(phi, &cfg.grid, cfg.n);
    for _ in 1..cfg.n {
        current = iterate_step_2d(&current, cfg)?;
    }
    point_value_2d(&current, [0.0, 0.0], cfg)
}

/// The full surface and the value at the origin.
pub fn solve_2d_with_value(
    phi: &TerminalFunction2D,
    cfg: &SolverConfig2D,
) -> Result<(SolutionSurface2D, BoxMaximum)> {
    let surface = solve_2d(phi, cfg)?;
    let value = point_value_2d(&surface.iterations[cfg.n - 1], [0.0, 0.0], cfg)?;
    Ok((surface, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::VarianceInterval;
    use approx::assert_abs_diff_eq;

    fn box_set() -> CovarianceSet2D {
        let s = VarianceInterval::new(0.5, 1.0).unwrap();
        CovarianceSet2D::new(s, s, -0.5, 0.5).unwrap()
    }

    fn small_cfg(n: usize) -> SolverConfig2D {
        SolverConfig2D::new(box_set(), n)
            .unwrap()
            .with_grid(ScatterGrid2D::sample(200, 1.0, 11).unwrap())
            .unwrap()
    }

    #[test]
    fn scatter_grid_is_reproducible() {
        let a = ScatterGrid2D::sample(100, 1.0, 4).unwrap();
        assert_eq!(a, ScatterGrid2D::sample(100, 1.0, 4).unwrap());
        assert_ne!(a, ScatterGrid2D::sample(100, 1.0, 5).unwrap());
        assert!(ScatterGrid2D::sample(49, 1.0, 4).is_err());
        let s = ScatterGrid2D::symmetrized(100, 1.0, 4).unwrap();
        assert_eq!(s.points()[3], [s.points()[53][1], s.points()[53][0]]);
    }

    #[test]
    fn linear_terminal_is_unchanged_under_identity() {
        let cfg = SolverConfig2D::new(CovarianceSet2D::isotropic(1.0).unwrap(), 3)
            .unwrap()
            .with_grid(ScatterGrid2D::sample(100, 1.0, 2).unwrap())
            .unwrap();
        let phi = TerminalFunction2D::new("sum", 1, |a, b| a + b);
        let surface = solve_2d(&phi, &cfg).unwrap();
        for (p, v) in cfg.grid.points().iter().zip(surface.last().values()) {
            assert_abs_diff_eq!(*v, p[0] + p[1], epsilon = 1e-7);
        }
    }

    #[test]
    fn sum_of_squares_gains_two_over_n_per_step() {
        let cfg = SolverConfig2D::new(box_set(), 4).unwrap();
        let phi = TerminalFunction2D::new("sum-sq", 1, |a, b| a * a + b * b);
        let (surface, value) = solve_2d_with_value(&phi, &cfg).unwrap();
        // exact until the fit's linear tails start to matter (from step 2 on
        // they leak inward through the global least-squares fit)
        for (i, it) in surface.iterations().iter().enumerate().take(3) {
            for (p, v) in cfg.grid.points().iter().zip(it.values()) {
                if p[0].hypot(p[1]) < 1.0 {
                    let expected = p[0] * p[0] + p[1] * p[1] + 2.0 * i as f64 / 4.0;
                    assert_abs_diff_eq!(*v, expected, epsilon = 1e-5);
                }
            }
        }
        assert_abs_diff_eq!(value.value, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn product_one_step_at_origin() {
        let cfg = small_cfg(5);
        let phi = TerminalFunction2D::new("prod", 1, |a, b| a * b);
        let start = IterationFunction2D::terminal(&phi, &cfg.grid, cfg.n);
        let m = point_value_2d(&start, [0.0, 0.0], &cfg).unwrap();
        assert_abs_diff_eq!(m.value, 0.5 / 5.0, epsilon = 1e-12);
        assert_eq!((m.argmax.sigma1, m.argmax.sigma2, m.argmax.rho), (1.0, 1.0, 0.5));
    }

    #[test]
    fn constant_surface_stays_constant() {
        let cfg = small_cfg(3);
        let phi = TerminalFunction2D::new("const", 0, |_, _| 1.25);
        let surface = solve_2d(&phi, &cfg).unwrap();
        for it in surface.iterations() {
            for v in it.values() {
                // ridge shrinkage only
                assert_abs_diff_eq!(*v, 1.25, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn node_failure_reports_step() {
        let cfg = small_cfg(2);
        let phi = TerminalFunction2D::new("bad", 0, |a, _| if a > 2.5 { f64::NAN } else { a });
        match solve_2d(&phi, &cfg) {
            Err(Error::NodeFailure { step, .. }) => assert_eq!(step, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
