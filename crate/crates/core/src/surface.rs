//! Iteration functions and the assembled solution surface `u(1 - i/n, x)`.

use std::sync::Arc;

use crate::error::Result;
use crate::spline::{CubicSpline, EndCondition};
use crate::types::{SpatialGrid, TerminalFunction, VarianceInterval};

/// Spline arguments are clamped to `[-SAFETY_FACTOR K, SAFETY_FACTOR K]`.
pub const SAFETY_FACTOR: f64 = 10.0;

/// One iterate `phi_{i,n}`: node values on the grid plus an interpolant that
/// is evaluable on the whole real line.
///
/// The step-0 iterate keeps the terminal function itself and evaluates it
/// exactly; later iterates evaluate their spline.
#[derive(Debug, Clone)]
pub struct IterationFunction {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
    spline: CubicSpline,
    exact: Option<TerminalFunction>,
    argmax: Option<Vec<f64>>,
    step: usize,
    total_steps: usize,
}

impl IterationFunction {
    /// `phi_{0,n} = phi`.
    pub fn terminal(
        phi: &TerminalFunction,
        grid: Arc<SpatialGrid>,
        total_steps: usize,
        end: EndCondition,
    ) -> Result<Self> {
        let values: Vec<f64> = grid.points().iter().map(|x| phi.eval(*x)).collect();
        let spline = CubicSpline::fit(&grid, &values, end)?;
        Ok(Self {
            grid,
            values,
            spline,
            exact: Some(phi.clone()),
            argmax: None,
            step: 0,
            total_steps,
        })
    }

    /// Fits the interpolant through freshly computed node values.
    pub fn from_values(
        grid: Arc<SpatialGrid>,
        values: Vec<f64>,
        argmax: Option<Vec<f64>>,
        step: usize,
        total_steps: usize,
        end: EndCondition,
    ) -> Result<Self> {
        let spline = CubicSpline::fit(&grid, &values, end)?;
        Ok(Self {
            grid,
            values,
            spline,
            exact: None,
            argmax,
            step,
            total_steps,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.exact {
            Some(phi) => phi.eval(x),
            None => {
                let bound = SAFETY_FACTOR * self.grid.half_width();
                self.spline.eval(x.clamp(-bound, bound))
            }
        }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }

    /// Maximizing volatility per node (absent for the terminal iterate).
    pub fn argmax(&self) -> Option<&[f64]> {
        self.argmax.as_deref()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    /// `t = 1 - i/n`.
    pub fn time(&self) -> f64 {
        1.0 - self.step as f64 / self.total_steps as f64
    }
}

/// The iterates `phi_{0,n}, ..., phi_{n,n}`; iterate `i` approximates
/// `u(1 - i/n, ·)` for the G-heat equation with terminal value `phi`.
#[derive(Debug, Clone)]
pub struct SolutionSurface {
    iterations: Vec<IterationFunction>,
    variance: VarianceInterval,
}

impl SolutionSurface {
    pub(crate) fn new(iterations: Vec<IterationFunction>, variance: VarianceInterval) -> Self {
        Self {
            iterations,
            variance,
        }
    }

    pub fn iterations(&self) -> &[IterationFunction] {
        &self.iterations
    }

    pub fn variance(&self) -> &VarianceInterval {
        &self.variance
    }

    /// Number of iteration steps `n`.
    pub fn steps(&self) -> usize {
        self.iterations.len() - 1
    }

    pub fn time_of(&self, i: usize) -> f64 {
        1.0 - i as f64 / self.steps() as f64
    }

    /// Final iterate `phi_{n,n}` (approximates `u(0, ·)`).
    pub fn last(&self) -> &IterationFunction {
        self.iterations.last().expect("surface has at least one iterate")
    }

    /// `u(1 - i/n, x)`.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        self.iterations[i].eval(x)
    }
}
