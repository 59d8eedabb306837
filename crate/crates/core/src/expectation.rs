//! Classical Gaussian expectations `E[f(N(x, s²))]`, the inner kernel of every
//! iteration step.
//!
//! Three estimators are available: Gauss–Hermite quadrature (deterministic,
//! the default), plain Monte Carlo, and Monte Carlo with second-order control
//! variates, where the first two Taylor terms of `f` around `x` are integrated
//! exactly and only the remainder is sampled.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// How inner Gaussian expectations are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    Quadrature { order: usize },
    MonteCarlo { samples: usize, seed: u64 },
    MonteCarloCv { samples: usize, seed: u64 },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Quadrature { order: 64 }
    }
}

impl Backend {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Backend::Quadrature { order: 0 } => {
                Err(Error::InvalidConfig("quadrature order must be >= 1".into()))
            }
            Backend::MonteCarlo { samples, .. } | Backend::MonteCarloCv { samples, .. }
                if samples == 0 =>
            {
                Err(Error::InvalidConfig("Monte Carlo sample count must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A reproducible standard normal sample `Z_1, ..., Z_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    draws: Arc<[f64]>,
    seed: u64,
}

impl McSample {
    pub fn new(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..count).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self {
            draws: draws.into(),
            seed,
        }
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

#[inline]
fn checked(value: f64, at: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { at, value })
    }
}

/// `E[f(x + s Z)]` by Gauss–Hermite quadrature.
///
/// The sum is taken on `f(y_k) - f(x)` and `f(x)` added back, which makes
/// constants exact and reduces cancellation when `s` is small.
pub fn gauss_expectation_quad(
    f: impl Fn(f64) -> f64,
    x: f64,
    s: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let center = checked(f(x), x)?;
    if s == 0.0 {
        return Ok(center);
    }
    let mut acc = 0.0;
    for (z, p) in rule.standard_nodes().iter().zip(rule.probabilities()) {
        let y = x + s * z;
        acc += p * (checked(f(y), y)? - center);
    }
    Ok(center + acc)
}

/// Plain Monte Carlo average `(1/M) Σ f(x + s Z_k)`.
pub fn gauss_expectation_mc(
    f: impl Fn(f64) -> f64,
    x: f64,
    s: f64,
    sample: &McSample,
) -> Result<f64> {
    let mut acc = 0.0;
    for z in sample.draws() {
        let y = x + s * z;
        acc += checked(f(y), y)?;
    }
    Ok(acc / sample.len() as f64)
}

/// Monte Carlo with the first two Taylor terms of `f` at `x` as control variates.
///
/// `f1`, `f2` approximate `f'(x)` and `f''(x)`. The estimator is unbiased for
/// any values of `f1`, `f2`; good values remove the part of the error that
/// grows with `|f'|` and `|f''|`.
pub fn gauss_expectation_mc_cv(
    f: impl Fn(f64) -> f64,
    f1: f64,
    f2: f64,
    x: f64,
    s: f64,
    sample: &McSample,
) -> Result<f64> {
    let center = checked(f(x), x)?;
    let mut acc = 0.0;
    for z in sample.draws() {
        let dz = s * z;
        let y = x + dz;
        acc += checked(f(y), y)? - center - f1 * dz - 0.5 * f2 * dz * dz;
    }
    Ok(acc / sample.len() as f64 + center + 0.5 * f2 * s * s)
}

/// Central differences `(f'(x), f''(x))` with step `h`.
pub fn finite_diff_derivs(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    debug_assert!(h > 0.0);
    let (fp, f0, fm) = (f(x + h), f(x), f(x - h));
    ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
}

/// Symmetric PSD square root of a symmetric 2×2 matrix, in closed form.
///
/// Eigenvalues in `[-1e-12, 0)` are treated as rounding noise and clamped to
/// zero; anything more negative is rejected.
pub fn matrix_sqrt_2x2(m: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let (a, b, d) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let clamp = |l: f64| -> Result<f64> {
        if l < -1e-12 {
            Err(Error::InvalidCovariance(format!(
                "matrix is not positive semi-definite (eigenvalue {l})"
            )))
        } else {
            Ok(l.max(0.0))
        }
    };
    let l1 = clamp(mean + radius)?;
    let l2 = clamp(mean - radius)?;
    let (r1, r2) = (l1.sqrt(), l2.sqrt());
    if radius == 0.0 {
        return Ok([[r1, 0.0], [0.0, r1]]);
    }
    // Unit eigenvector for l1.
    let (vx, vy) = if (a - d) >= 0.0 {
        (a - d + 2.0 * radius, 2.0 * b)
    } else {
        (2.0 * b, d - a + 2.0 * radius)
    };
    let norm = (vx * vx + vy * vy).sqrt();
    let (ux, uy) = (vx / norm, vy / norm);
    // sqrt = r1 u u^T + r2 (I - u u^T)
    let diff = r1 - r2;
    Ok([
        [r2 + diff * ux * ux, diff * ux * uy],
        [diff * ux * uy, r2 + diff * uy * uy],
    ])
}

/// `E[f(mean + S (Z_1, Z_2))]` with `S` a covariance square root, by the
/// tensor product of a Gauss–Hermite rule with itself.
pub fn gauss_expectation_quad_2d(
    f: impl Fn(f64, f64) -> f64,
    mean: [f64; 2],
    cov_sqrt: [[f64; 2]; 2],
    rule: &QuadratureRule,
) -> Result<f64> {
    let center = f(mean[0], mean[1]);
    checked(center, mean[0])?;
    let nodes = rule.standard_nodes();
    let probs = rule.probabilities();
    let mut acc = 0.0;
    for (za, pa) in nodes.iter().zip(probs) {
        let (ya0, ya1) = (mean[0] + cov_sqrt[0][0] * za, mean[1] + cov_sqrt[1][0] * za);
        let mut inner = 0.0;
        for (zb, pb) in nodes.iter().zip(probs) {
            let y0 = ya0 + cov_sqrt[0][1] * zb;
            let y1 = ya1 + cov_sqrt[1][1] * zb;
            let v = f(y0, y1);
            if !v.is_finite() {
                return Err(Error::NonFinite { at: y0, value: v });
            }
            inner += pb * (v - center);
        }
        acc += pa * inner;
    }
    Ok(center + acc)
}
