//! Iterative approximation of the G-normal sublinear expectation in one dimension.
//!
//! Starting from `phi_0 = phi`, each step computes on every grid node
//!
//! ```text
//! phi_{i+1}(x_j) = max_{v in [sigma_lo, sigma_hi]} E[phi_i(x_j + v Z / sqrt(n))]
//! ```
//!
//! and refits a cubic spline through the new node values, so the next step can
//! evaluate `phi_{i+1}` anywhere on the real line without recursing. After `n`
//! steps `phi_{n,n}(0)` approximates `Ê[phi(X)]` for `X ~ GN(0, [sigma_lo², sigma_hi²])`,
//! and iterate `i` approximates the G-heat solution `u(1 - i/n, ·)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expectation::{
    finite_diff_derivs, gauss_expectation_mc, gauss_expectation_mc_cv, gauss_expectation_quad,
    Backend, McSample,
};
use crate::optimize::{try_maximize, try_maximize_warm, Maximum};
use crate::quadrature::QuadratureRule;
use crate::spline::EndCondition;
use crate::surface::{IterationFunction, SolutionSurface};
use crate::types::{SpatialGrid, TerminalFunction, VarianceInterval};

pub const DEFAULT_HALF_WIDTH: f64 = 5.0;
pub const DEFAULT_INTERVALS: usize = 401;

/// Nodes per warm-started run; chunks are processed in parallel.
const NODE_CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct SolverConfig1D {
    /// Number of iteration steps.
    pub n: usize,
    pub grid: Arc<SpatialGrid>,
    pub backend: Backend,
    pub end_condition: EndCondition,
    pub variance: VarianceInterval,
}

impl SolverConfig1D {
    /// Uniform grid on `[-5, 5]` with 401 intervals and order-64 quadrature.
    pub fn new(variance: VarianceInterval, n: usize) -> Result<Self> {
        let cfg = Self {
            n,
            grid: Arc::new(SpatialGrid::uniform(DEFAULT_HALF_WIDTH, DEFAULT_INTERVALS)?),
            backend: Backend::default(),
            end_condition: EndCondition::Fmm,
            variance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_grid(mut self, half_width: f64, intervals: usize) -> Result<Self> {
        self.grid = Arc::new(SpatialGrid::uniform(half_width, intervals)?);
        self.validate()?;
        Ok(self)
    }

    pub fn with_backend(mut self, backend: Backend) -> Result<Self> {
        self.backend = backend;
        self.validate()?;
        Ok(self)
    }

    pub fn with_steps(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        let k = self.grid.half_width();
        if k <= 3.0 * self.variance.sigma_hi() {
            return Err(Error::InvalidConfig(format!(
                "half width K = {k} must exceed 3 sigma_hi = {}",
                3.0 * self.variance.sigma_hi()
            )));
        }
        self.backend.validate()
    }
}

/// The inner-expectation estimator for one iteration step.
enum Kernel {
    Quad(Arc<QuadratureRule>),
    Mc(McSample),
    /// Derivatives by central differences with `h` = grid spacing. The
    /// correction amplifies node-to-node roughness by about
    /// `|mean(Z²) - 1| sigma_hi² / (n h²)`; keep that below one.
    McCv { sample: McSample, h: f64 },
}

impl Kernel {
    /// One Monte Carlo sample per step, shared by every node of that step.
    fn for_step(cfg: &SolverConfig1D, step: usize) -> Result<Self> {
        Ok(match cfg.backend {
            Backend::Quadrature { order } => Kernel::Quad(QuadratureRule::gauss_hermite(order)?),
            Backend::MonteCarlo { samples, seed } => {
                Kernel::Mc(McSample::new(samples, seed.wrapping_add(step as u64)))
            }
            Backend::MonteCarloCv { samples, seed } => Kernel::McCv {
                sample: McSample::new(samples, seed.wrapping_add(step as u64)),
                h: cfg.grid.max_spacing(),
            },
        })
    }

    fn maximize(
        &self,
        prev: &IterationFunction,
        x: f64,
        cfg: &SolverConfig1D,
        hint: Option<f64>,
    ) -> Result<Maximum> {
        let scale = 1.0 / (cfg.n as f64).sqrt();
        let f = |y: f64| prev.eval(y);
        let (lo, hi) = (cfg.variance.sigma_lo(), cfg.variance.sigma_hi());
        let run = |objective: &dyn Fn(f64) -> Result<f64>| match hint {
            Some(h) => try_maximize_warm(objective, lo, hi, h),
            None => try_maximize(objective, lo, hi),
        };
        match self {
            Kernel::Quad(rule) => run(&|v| gauss_expectation_quad(f, x, v * scale, rule)),
            Kernel::Mc(sample) => run(&|v| gauss_expectation_mc(f, x, v * scale, sample)),
            Kernel::McCv { sample, h } => {
                let (f1, f2) = finite_diff_derivs(f, x, *h);
                run(&|v| gauss_expectation_mc_cv(f, f1, f2, x, v * scale, sample))
            }
        }
    }
}

/// `phi_{i+1}(x)` at a single point, from iterate `prev = phi_i`.
pub fn point_value(prev: &IterationFunction, x: f64, cfg: &SolverConfig1D) -> Result<Maximum> {
    Kernel::for_step(cfg, prev.step())?.maximize(prev, x, cfg, None)
}

/// One step of the iteration on every grid node, followed by a spline refit.
pub fn iterate_step(prev: &IterationFunction, cfg: &SolverConfig1D) -> Result<IterationFunction> {
    let step = prev.step();
    if step >= cfg.n {
        return Err(Error::InvalidConfig(format!(
            "iterate {step} is already the last of {} steps",
            cfg.n
        )));
    }
    let kernel = Kernel::for_step(cfg, step)?;
    let points = cfg.grid.points();
    let chunks: Vec<Result<Vec<Maximum>>> = points
        .par_chunks(NODE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut out = Vec::with_capacity(chunk.len());
            let mut hint = None;
            for (k, x) in chunk.iter().enumerate() {
                let m = kernel
                    .maximize(prev, *x, cfg, hint)
                    .map_err(|e| Error::NodeFailure {
                        step: step + 1,
                        node: c * NODE_CHUNK + k,
                        source: Box::new(e),
                    })?;
                hint = Some(m.argmax);
                out.push(m);
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(points.len());
    let mut argmax = Vec::with_capacity(points.len());
    for chunk in chunks {
        for m in chunk? {
            values.push(m.value);
            argmax.push(m.argmax);
        }
    }
    IterationFunction::from_values(
        cfg.grid.clone(),
        values,
        Some(argmax),
        step + 1,
        cfg.n,
        cfg.end_condition,
    )
}

/// All iterates `phi_{0,n}, ..., phi_{n,n}`.
pub fn solve(phi: &TerminalFunction, cfg: &SolverConfig1D) -> Result<SolutionSurface> {
    cfg.validate()?;
    let mut iterations = Vec::with_capacity(cfg.n + 1);
    iterations.push(IterationFunction::terminal(
        phi,
        cfg.grid.clone(),
        cfg.n,
        cfg.end_condition,
    )?);
    for _ in 0..cfg.n {
        let next = iterate_step(iterations.last().expect("non-empty"), cfg)?;
        iterations.push(next);
    }
    Ok(SolutionSurface::new(iterations, cfg.variance))
}

/// `Ê[phi(X)] ≈ phi_{n,n}(0)`.
///
/// The last step is evaluated directly at the origin from `phi_{n-1,n}`, so
/// the result carries no interpolation error from the final refit (it equals
/// the final iterate's node value whenever 0 is a grid node).
pub fn expectation(phi: &TerminalFunction, cfg: &SolverConfig1D) -> Result<Maximum> {
    cfg.validate()?;
    let mut current = IterationFunction::terminal(phi, cfg.grid.clone(), cfg.n, cfg.end_condition)?;
    for _ in 1..cfg.n {
        current = iterate_step(&current, cfg)?;
    }
    point_value(&current, 0.0, cfg)
}

/// Surface and origin value from one pass.
pub fn solve_with_value(
    phi: &TerminalFunction,
    cfg: &SolverConfig1D,
) -> Result<(SolutionSurface, Maximum)> {
    let surface = solve(phi, cfg)?;
    let value = point_value(&surface.iterations()[cfg.n - 1], 0.0, cfg)?;
    Ok((surface, value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub value: f64,
    pub abs_error: f64,
}

/// `phi_{n,n}(0)` for each `n` in `n_list`, with its distance to `reference`.
pub fn convergence_study(
    phi: &TerminalFunction,
    base: &SolverConfig1D,
    n_list: &[usize],
    reference: f64,
) -> Result<Vec<ConvergenceRow>> {
    n_list
        .iter()
        .map(|&n| {
            let cfg = base.clone().with_steps(n)?;
            let value = expectation(phi, &cfg)?.value;
            Ok(ConvergenceRow {
                n,
                value,
                abs_error: (value - reference).abs(),
            })
        })
        .collect()
}

/// Least-squares slope of `ln(abs_error)` against `ln(n)`.
pub fn loglog_slope(rows: &[ConvergenceRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.abs_error.ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        (num + (x - mx) * (y - my), den + (x - mx) * (x - mx))
    });
    num / den
}
