//! Interpolating cubic splines with Forsythe–Malcolm–Moler end conditions.
//!
//! The third derivative of the spline on each end interval is matched to the
//! third derivative of the cubic through the four data points at that end, so
//! cubic data are reproduced exactly. Outside the knot range the boundary
//! piece is continued as a polynomial, which keeps the extrapolation exact for
//! cubics as well.

use crate::error::{Error, Result};
use crate::types::{SpatialGrid, MIN_GRID_POINTS};

/// End-condition choice for [`CubicSpline::fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndCondition {
    /// Match the third derivative of the end cubics (exact on cubic data).
    #[default]
    Fmm,
    /// Zero second derivative at both ends.
    Natural,
}

/// Piecewise cubic `y_i + b_i t + c_i t² + d_i t³`, `t = x - x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    y: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    uniform: Option<(f64, f64)>,
    end: EndCondition,
}

/// Third divided difference of four points.
fn third_divided_difference(x: &[f64], y: &[f64]) -> f64 {
    let d1 = |i: usize| (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    let d2 = |i: usize| (d1(i + 1) - d1(i)) / (x[i + 2] - x[i]);
    (d2(1) - d2(0)) / (x[3] - x[0])
}

impl CubicSpline {
    /// Interpolates `values` at the nodes of `grid`.
    pub fn fit(grid: &SpatialGrid, values: &[f64], end: EndCondition) -> Result<Self> {
        let mut s = Self::fit_points(grid.points(), values, end)?;
        s.uniform = grid.uniform_step().map(|h| (grid.points()[0], 1.0 / h));
        Ok(s)
    }

    /// Interpolates `values` at strictly increasing `knots`.
    pub fn fit_points(knots: &[f64], values: &[f64], end: EndCondition) -> Result<Self> {
        let n = knots.len();
        if n < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "spline needs at least {MIN_GRID_POINTS} knots, got {n}"
            )));
        }
        if values.len() != n {
            return Err(Error::InvalidGrid(format!(
                "{} values for {n} knots",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData { index });
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("knots must be strictly increasing".into()));
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = values
            .windows(2)
            .zip(&h)
            .map(|(w, hi)| (w[1] - w[0]) / hi)
            .collect();

        // Tridiagonal system for sigma_i = S''(x_i) / 6.
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            lower[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i];
            rhs[i] = slope[i] - slope[i - 1];
        }
        match end {
            EndCondition::Fmm => {
                diag[0] = -h[0];
                upper[0] = h[0];
                rhs[0] = h[0] * h[0] * third_divided_difference(&knots[..4], &values[..4]);
                lower[n - 1] = h[n - 2];
                diag[n - 1] = -h[n - 2];
                rhs[n - 1] = -h[n - 2]
                    * h[n - 2]
                    * third_divided_difference(&knots[n - 4..], &values[n - 4..]);
            }
            EndCondition::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
        }

        // Thomas algorithm.
        for i in 1..n {
            let t = lower[i] / diag[i - 1];
            diag[i] -= t * upper[i - 1];
            rhs[i] -= t * rhs[i - 1];
        }
        let mut sigma = vec![0.0; n];
        sigma[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            sigma[i] = (rhs[i] - upper[i] * sigma[i + 1]) / diag[i];
        }

        let pieces = n - 1;
        let mut b = Vec::with_capacity(pieces);
        let mut c = Vec::with_capacity(pieces);
        let mut d = Vec::with_capacity(pieces);
        for i in 0..pieces {
            b.push(slope[i] - h[i] * (sigma[i + 1] + 2.0 * sigma[i]));
            c.push(3.0 * sigma[i]);
            d.push((sigma[i + 1] - sigma[i]) / h[i]);
        }

        Ok(Self {
            knots: knots.to_vec(),
            y: values.to_vec(),
            b,
            c,
            d,
            uniform: None,
            end,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn end_condition(&self) -> EndCondition {
        self.end
    }

    #[inline]
    fn piece(&self, x: f64) -> usize {
        let last = self.b.len() - 1;
        match self.uniform {
            Some((x0, inv_h)) => {
                let k = ((x - x0) * inv_h).floor();
                if k <= 0.0 {
                    0
                } else {
                    (k as usize).min(last)
                }
            }
            None => self
                .knots
                .partition_point(|k| *k <= x)
                .saturating_sub(1)
                .min(last),
        }
    }

    /// Value at `x`; the boundary cubics continue beyond the knot range.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.piece(x);
        let t = x - self.knots[i];
        self.y[i] + t * (self.b[i] + t * (self.c[i] + t * self.d[i]))
    }

    /// First and second derivatives at `x`.
    pub fn derivatives(&self, x: f64) -> (f64, f64) {
        let i = self.piece(x);
        let t = x - self.knots[i];
        (
            self.b[i] + t * (2.0 * self.c[i] + 3.0 * t * self.d[i]),
            2.0 * self.c[i] + 6.0 * t * self.d[i],
        )
    }
}
