//! Additive surface model for scattered 2D data:
//!
//! `f(x1, x2) = s1(x1) + s2(x2) + e x1 x2`
//!
//! with `s1`, `s2` cubic B-splines on quantile knots, extended linearly past
//! the end knots. Coefficients come from a ridge-regularized least-squares
//! solve (SVD on the augmented system).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expectation::{gauss_expectation_quad, gauss_expectation_quad_2d, matrix_sqrt_2x2};
use crate::quadrature::QuadratureRule;
use crate::types::TerminalFunction2D;

/// Something that can be evaluated on the plane and integrated against a
/// bivariate Gaussian.
pub trait Surface2D {
    fn eval(&self, x1: f64, x2: f64) -> f64;

    /// `E[f(N(mean, cov))]`; by default a tensor Gauss–Hermite rule.
    fn gaussian_expectation(
        &self,
        mean: [f64; 2],
        cov: [[f64; 2]; 2],
        rule: &QuadratureRule,
    ) -> Result<f64> {
        let root = matrix_sqrt_2x2(cov)?;
        gauss_expectation_quad_2d(|a, b| self.eval(a, b), mean, root, rule)
    }
}

impl Surface2D for TerminalFunction2D {
    fn eval(&self, x1: f64, x2: f64) -> f64 {
        TerminalFunction2D::eval(self, x1, x2)
    }
}

const DEGREE: usize = 3;

/// Clamped cubic B-spline basis on distinct knots `t_0 < ... < t_{m-1}`.
#[derive(Debug, Clone)]
pub struct BSplineBasis {
    knots: Vec<f64>,
    /// Full knot vector with the end knots repeated `DEGREE + 1` times.
    u: Vec<f64>,
}

impl BSplineBasis {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidGrid("B-spline basis needs at least 2 knots".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("B-spline knots must be strictly increasing".into()));
        }
        let mut u = vec![knots[0]; DEGREE];
        u.extend_from_slice(&knots);
        u.extend(std::iter::repeat_n(knots[knots.len() - 1], DEGREE));
        Ok(Self { knots, u })
    }

    /// Knots at `m` equally spaced empirical quantiles (including min and max).
    /// Duplicate quantiles are dropped.
    pub fn from_quantiles(data: &[f64], m: usize) -> Result<Self> {
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData { index });
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let last = sorted.len().saturating_sub(1);
        let mut knots: Vec<f64> = (0..m.max(2))
            .map(|k| {
                let pos = k as f64 * last as f64 / (m.max(2) - 1) as f64;
                let (i, frac) = (pos.floor() as usize, pos.fract());
                let j = (i + 1).min(last);
                sorted[i] + frac * (sorted[j] - sorted[i])
            })
            .collect();
        knots.dedup_by(|a, b| *a <= *b);
        Self::new(knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions, `m + 2`.
    pub fn len(&self) -> usize {
        self.u.len() - DEGREE - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn lo(&self) -> f64 {
        self.knots[0]
    }

    fn hi(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Index `i` of the non-zero block `i-3..=i` and the four basis values at
    /// `x`, which must lie in `[t_0, t_{m-1}]`.
    fn local(&self, x: f64) -> (usize, [f64; DEGREE + 1]) {
        let n = self.len();
        let span = if x >= self.u[n] {
            n - 1
        } else {
            // last i with u[i] <= x, restricted to DEGREE..n
            DEGREE + self.u[DEGREE + 1..=n].partition_point(|k| *k <= x)
        };
        let u = &self.u;
        let mut basis = [0.0; DEGREE + 1];
        let mut left = [0.0; DEGREE + 1];
        let mut right = [0.0; DEGREE + 1];
        basis[0] = 1.0;
        for j in 1..=DEGREE {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = basis[r] / (right[r + 1] + left[j - r]);
                basis[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            basis[j] = saved;
        }
        (span, basis)
    }

    /// Writes all basis values at `x` into `row` (linear extension outside).
    pub fn fill_row(&self, x: f64, row: &mut [f64]) {
        row.iter_mut().for_each(|v| *v = 0.0);
        let n = self.len();
        if x < self.lo() {
            // B_0(t0) = 1, slopes of B_0, B_1 at t0 are -+3 / (t1 - t0)
            let slope = DEGREE as f64 / (self.u[DEGREE + 1] - self.u[1]);
            row[0] = 1.0 - slope * (x - self.lo());
            row[1] = slope * (x - self.lo());
        } else if x > self.hi() {
            let slope = DEGREE as f64 / (self.u[n + DEGREE - 1] - self.u[n - 1]);
            row[n - 1] = 1.0 + slope * (x - self.hi());
            row[n - 2] = -slope * (x - self.hi());
        } else {
            let (span, b) = self.local(x);
            row[span - DEGREE..=span].copy_from_slice(&b);
        }
    }

    /// `Σ c_j B_j(x)`, linear beyond the end knots.
    pub fn combine(&self, coeffs: &[f64], x: f64) -> f64 {
        let n = self.len();
        if x < self.lo() {
            let slope = DEGREE as f64 * (coeffs[1] - coeffs[0]) / (self.u[DEGREE + 1] - self.u[1]);
            coeffs[0] + slope * (x - self.lo())
        } else if x > self.hi() {
            let slope = DEGREE as f64 * (coeffs[n - 1] - coeffs[n - 2])
                / (self.u[n + DEGREE - 1] - self.u[n - 1]);
            coeffs[n - 1] + slope * (x - self.hi())
        } else {
            let (span, b) = self.local(x);
            coeffs[span - DEGREE..=span]
                .iter()
                .zip(&b)
                .map(|(c, b)| c * b)
                .sum()
        }
    }
}

/// Fit settings for [`SurfaceFit2D`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Distinct knots per coordinate.
    pub knots: usize,
    pub ridge: f64,
    /// The fit fails when `rms residual > residual_abs + residual_rel · rms(values)`.
    pub residual_abs: f64,
    pub residual_rel: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            knots: 12,
            ridge: 1e-8,
            residual_abs: 1e-3,
            residual_rel: 1e-2,
        }
    }
}

/// Fitted additive surface with one bilinear interaction term.
#[derive(Debug, Clone)]
pub struct SurfaceFit2D {
    basis: [BSplineBasis; 2],
    coeffs: [Vec<f64>; 2],
    interaction: f64,
    residual_rms: f64,
}

impl SurfaceFit2D {
    pub fn fit(points: &[[f64; 2]], values: &[f64], opts: &FitOptions) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData { index });
        }
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let basis = [
            BSplineBasis::from_quantiles(&xs, opts.knots)?,
            BSplineBasis::from_quantiles(&ys, opts.knots)?,
        ];
        let (n1, n2) = (basis[0].len(), basis[1].len());
        let cols = n1 + n2 + 1;
        let rows = points.len();
        let mut a = DMatrix::<f64>::zeros(rows + cols, cols);
        let mut b = DVector::<f64>::zeros(rows + cols);
        let mut row = vec![0.0; cols];
        for (r, (p, v)) in points.iter().zip(values).enumerate() {
            basis[0].fill_row(p[0], &mut row[..n1]);
            basis[1].fill_row(p[1], &mut row[n1..n1 + n2]);
            row[cols - 1] = p[0] * p[1];
            for (c, x) in row.iter().enumerate() {
                a[(r, c)] = *x;
            }
            b[r] = *v;
        }
        let lambda = opts.ridge.sqrt();
        for c in 0..cols {
            a[(rows + c, c)] = lambda;
        }
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::InvalidConfig(format!("least-squares solve failed: {e}")))?;
        let coeffs = [sol.as_slice()[..n1].to_vec(), sol.as_slice()[n1..n1 + n2].to_vec()];
        let mut fit = Self {
            basis,
            coeffs,
            interaction: sol[cols - 1],
            residual_rms: 0.0,
        };
        let sq: f64 = points
            .iter()
            .zip(values)
            .map(|(p, v)| (fit.eval(p[0], p[1]) - v).powi(2))
            .sum();
        fit.residual_rms = (sq / rows as f64).sqrt();
        let scale = (values.iter().map(|v| v * v).sum::<f64>() / rows as f64).sqrt();
        let bound = opts.residual_abs + opts.residual_rel * scale;
        if !(fit.residual_rms <= bound) {
            return Err(Error::FitResidual {
                rms: fit.residual_rms,
                bound,
            });
        }
        Ok(fit)
    }

    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    pub fn interaction(&self) -> f64 {
        self.interaction
    }

    /// The additive component along `axis` at `x`.
    pub fn component(&self, axis: usize, x: f64) -> f64 {
        self.basis[axis].combine(&self.coeffs[axis], x)
    }

    pub fn basis(&self, axis: usize) -> &BSplineBasis {
        &self.basis[axis]
    }
}

impl Surface2D for SurfaceFit2D {
    #[inline]
    fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.component(0, x1) + self.component(1, x2) + self.interaction * x1 * x2
    }

    /// Uses the structure: each additive part only sees its own marginal and
    /// `E[X1 X2] = m1 m2 + cov12`.
    fn gaussian_expectation(
        &self,
        mean: [f64; 2],
        cov: [[f64; 2]; 2],
        rule: &QuadratureRule,
    ) -> Result<f64> {
        if cov[0][0] < 0.0 || cov[1][1] < 0.0 {
            return Err(Error::InvalidCovariance("negative variance".into()));
        }
        let e1 = gauss_expectation_quad(|x| self.component(0, x), mean[0], cov[0][0].sqrt(), rule)?;
        let e2 = gauss_expectation_quad(|x| self.component(1, x), mean[1], cov[1][1].sqrt(), rule)?;
        Ok(e1 + e2 + self.interaction * (mean[0] * mean[1] + 0.5 * (cov[0][1] + cov[1][0])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(count: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
            .collect()
    }

    #[test]
    fn partition_of_unity_and_linear_tails() {
        let b = BSplineBasis::new(vec![-2.0, -0.5, 0.0, 1.0, 3.0]).unwrap();
        assert_eq!(b.len(), 7);
        let mut row = vec![0.0; b.len()];
        for x in [-5.0, -2.0, -1.3, 0.0, 0.7, 3.0, 4.5] {
            b.fill_row(x, &mut row);
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
        // linear coefficients reproduce x exactly, including the tails
        let greville: Vec<f64> = (0..b.len())
            .map(|j| (b.u[j + 1] + b.u[j + 2] + b.u[j + 3]) / 3.0)
            .collect();
        for x in [-7.0, -2.0, -0.2, 2.9, 3.0, 8.0] {
            assert_abs_diff_eq!(b.combine(&greville, x), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn reproduces_additive_cubic_with_interaction() {
        let pts = cloud(400, 3);
        let f = |a: f64, b: f64| a * a * a - 2.0 * b * b + 0.7 * a * b + 1.5;
        let vals: Vec<f64> = pts.iter().map(|p| f(p[0], p[1])).collect();
        let fit = SurfaceFit2D::fit(&pts, &vals, &FitOptions::default()).unwrap();
        assert!(fit.residual_rms() < 1e-6, "{}", fit.residual_rms());
        assert_abs_diff_eq!(fit.interaction(), 0.7, epsilon = 1e-6);
        for (a, b) in [(0.0, 0.0), (1.2, -0.4), (-2.5, 2.1)] {
            assert_abs_diff_eq!(fit.eval(a, b), f(a, b), epsilon = 1e-5);
        }
    }

    #[test]
    fn structured_expectation_matches_tensor_rule() {
        // cubic data is reproduced exactly inside the hull, where both rules are exact
        let pts = cloud(300, 5);
        let vals: Vec<f64> = pts
            .iter()
            .map(|p| p[0].powi(3) - p[0] + 0.5 * p[1] * p[1] + 0.3 * p[0] * p[1])
            .collect();
        let fit = SurfaceFit2D::fit(&pts, &vals, &FitOptions::default()).unwrap();
        let rule = QuadratureRule::gauss_hermite(16).unwrap();
        let cov = [[0.09, 0.02], [0.02, 0.04]];
        let fast = fit.gaussian_expectation([0.3, -0.6], cov, &rule).unwrap();
        let root = matrix_sqrt_2x2(cov).unwrap();
        let slow = gauss_expectation_quad_2d(|a, b| fit.eval(a, b), [0.3, -0.6], root, &rule).unwrap();
        assert_abs_diff_eq!(fast, slow, epsilon = 1e-9);
        let exact = 0.027 + 3.0 * 0.3 * 0.09 - 0.3 + 0.5 * (0.36 + 0.04) + 0.3 * (-0.18 + 0.02);
        assert_abs_diff_eq!(fast, exact, epsilon = 1e-6);
    }

    #[test]
    fn non_additive_data_trips_the_residual_bound() {
        let pts = cloud(300, 7);
        let vals: Vec<f64> = pts.iter().map(|p| (2.0 * p[0] * p[1]).sin() * 5.0).collect();
        assert!(matches!(
            SurfaceFit2D::fit(&pts, &vals, &FitOptions::default()),
            Err(Error::FitResidual { .. })
        ));
    }

    #[test]
    fn rejects_nan_values() {
        let pts = cloud(60, 1);
        let mut vals = vec![1.0; 60];
        vals[17] = f64::NAN;
        assert!(matches!(
            SurfaceFit2D::fit(&pts, &vals, &FitOptions::default()),
            Err(Error::NonFiniteData { index: 17 })
        ));
    }
}
