//! Uncertainty sets, terminal functions and spatial grids shared by every solver.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volatility bounds `[sigma_lo, sigma_hi]` of a one-dimensional G-normal law.
///
/// The associated variance interval is `[sigma_lo^2, sigma_hi^2]`. A strictly
/// positive lower bound is required; the degenerate `sigma_lo = 0` case needs
/// viscosity-solution machinery that this crate does not provide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct VarianceInterval {
    sigma_lo: f64,
    sigma_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    sigma_lo: f64,
    sigma_hi: f64,
}

impl TryFrom<RawInterval> for VarianceInterval {
    type Error = Error;
    fn try_from(raw: RawInterval) -> Result<Self> {
        VarianceInterval::new(raw.sigma_lo, raw.sigma_hi)
    }
}

impl From<VarianceInterval> for RawInterval {
    fn from(v: VarianceInterval) -> Self {
        RawInterval {
            sigma_lo: v.sigma_lo,
            sigma_hi: v.sigma_hi,
        }
    }
}

impl VarianceInterval {
    pub fn new(sigma_lo: f64, sigma_hi: f64) -> Result<Self> {
        if !sigma_lo.is_finite() || !sigma_hi.is_finite() {
            return Err(Error::InvalidVariance(format!(
                "bounds must be finite, got [{sigma_lo}, {sigma_hi}]"
            )));
        }
        if sigma_lo <= 0.0 {
            return Err(Error::InvalidVariance(format!(
                "sigma_lo must be > 0, got {sigma_lo}"
            )));
        }
        if sigma_lo > sigma_hi {
            return Err(Error::InvalidVariance(format!(
                "sigma_lo <= sigma_hi violated: {sigma_lo} > {sigma_hi}"
            )));
        }
        Ok(Self { sigma_lo, sigma_hi })
    }

    /// The single-point interval `[sigma, sigma]` (classical normal law).
    pub fn degenerate(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn sigma_lo(&self) -> f64 {
        self.sigma_lo
    }

    pub fn sigma_hi(&self) -> f64 {
        self.sigma_hi
    }

    pub fn width(&self) -> f64 {
        self.sigma_hi - self.sigma_lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_lo == self.sigma_hi
    }

    /// `[sigma_lo^2, sigma_hi^2]`.
    pub fn variance_bounds(&self) -> (f64, f64) {
        (self.sigma_lo * self.sigma_lo, self.sigma_hi * self.sigma_hi)
    }

    /// Same interval scaled by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda * self.sigma_lo, lambda * self.sigma_hi)
    }
}

/// `G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2`, the generator of the G-heat equation.
pub fn g_function(a: f64, v: &VarianceInterval) -> f64 {
    let (lo2, hi2) = v.variance_bounds();
    0.5 * (hi2 * a.max(0.0) - lo2 * (-a).max(0.0))
}

/// Box of covariance matrices
/// `[[s1^2, rho s1 s2], [rho s1 s2, s2^2]]` with `s1`, `s2` and `rho` ranging
/// over independent intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovariance", into = "RawCovariance")]
pub struct CovarianceSet2D {
    sigma1: VarianceInterval,
    sigma2: VarianceInterval,
    rho_lo: f64,
    rho_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCovariance {
    sigma1: VarianceInterval,
    sigma2: VarianceInterval,
    rho_lo: f64,
    rho_hi: f64,
}

impl TryFrom<RawCovariance> for CovarianceSet2D {
    type Error = Error;
    fn try_from(raw: RawCovariance) -> Result<Self> {
        CovarianceSet2D::new(raw.sigma1, raw.sigma2, raw.rho_lo, raw.rho_hi)
    }
}

impl From<CovarianceSet2D> for RawCovariance {
    fn from(c: CovarianceSet2D) -> Self {
        RawCovariance {
            sigma1: c.sigma1,
            sigma2: c.sigma2,
            rho_lo: c.rho_lo,
            rho_hi: c.rho_hi,
        }
    }
}

/// A point `(sigma1, sigma2, rho)` of a [`CovarianceSet2D`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariancePoint {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
}

impl CovariancePoint {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let off = self.rho * self.sigma1 * self.sigma2;
        [
            [self.sigma1 * self.sigma1, off],
            [off, self.sigma2 * self.sigma2],
        ]
    }

    pub(crate) fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.sigma1,
            1 => self.sigma2,
            _ => self.rho,
        }
    }

    pub(crate) fn with_coord(mut self, axis: usize, value: f64) -> Self {
        match axis {
            0 => self.sigma1 = value,
            1 => self.sigma2 = value,
            _ => self.rho = value,
        }
        self
    }
}

impl CovarianceSet2D {
    /// With `sigma_i > 0` and `|rho| <= 1` every matrix in the box is positive
    /// semi-definite, so no intersection with the PSD cone is needed.
    pub fn new(
        sigma1: VarianceInterval,
        sigma2: VarianceInterval,
        rho_lo: f64,
        rho_hi: f64,
    ) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho_lo) || !(-1.0..=1.0).contains(&rho_hi) {
            return Err(Error::InvalidCovariance(format!(
                "correlation bounds must lie in [-1, 1], got [{rho_lo}, {rho_hi}]"
            )));
        }
        if rho_lo > rho_hi {
            return Err(Error::InvalidCovariance(format!(
                "rho_lo <= rho_hi violated: {rho_lo} > {rho_hi}"
            )));
        }
        Ok(Self {
            sigma1,
            sigma2,
            rho_lo,
            rho_hi,
        })
    }

    /// The single matrix `diag(sigma^2, sigma^2)`.
    pub fn isotropic(sigma: f64) -> Result<Self> {
        let v = VarianceInterval::degenerate(sigma)?;
        Self::new(v, v, 0.0, 0.0)
    }

    pub fn sigma1(&self) -> VarianceInterval {
        self.sigma1
    }

    pub fn sigma2(&self) -> VarianceInterval {
        self.sigma2
    }

    pub fn rho_bounds(&self) -> (f64, f64) {
        (self.rho_lo, self.rho_hi)
    }

    /// Largest volatility across both coordinates.
    pub fn sigma_max(&self) -> f64 {
        self.sigma1.sigma_hi().max(self.sigma2.sigma_hi())
    }

    pub(crate) fn bounds(&self, axis: usize) -> (f64, f64) {
        match axis {
            0 => (self.sigma1.sigma_lo(), self.sigma1.sigma_hi()),
            1 => (self.sigma2.sigma_lo(), self.sigma2.sigma_hi()),
            _ => (self.rho_lo, self.rho_hi),
        }
    }

    /// The 8 corners, ordered so that later entries have larger coordinates.
    pub fn corners(&self) -> Vec<CovariancePoint> {
        let mut out = Vec::with_capacity(8);
        for s1 in [self.sigma1.sigma_lo(), self.sigma1.sigma_hi()] {
            for s2 in [self.sigma2.sigma_lo(), self.sigma2.sigma_hi()] {
                for rho in [self.rho_lo, self.rho_hi] {
                    out.push(CovariancePoint {
                        sigma1: s1,
                        sigma2: s2,
                        rho,
                    });
                }
            }
        }
        out
    }

    pub fn contains(&self, p: &CovariancePoint) -> bool {
        (0..3).all(|axis| {
            let (lo, hi) = self.bounds(axis);
            (lo..=hi).contains(&p.coord(axis))
        })
    }
}

type Eval1 = dyn Fn(f64) -> f64 + Send + Sync;
type Eval2 = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A locally Lipschitz terminal function `phi` on the real line.
///
/// `lipschitz_degree` is the growth exponent `k` in
/// `|phi(x) - phi(y)| <= C (1 + |x|^k + |y|^k) |x - y|`.
#[derive(Clone)]
pub struct TerminalFunction {
    name: String,
    lipschitz_degree: u32,
    eval: Arc<Eval1>,
}

impl TerminalFunction {
    pub fn new(
        name: impl Into<String>,
        lipschitz_degree: u32,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            lipschitz_degree,
            eval: Arc::new(f),
        }
    }

    /// `sum_k coeffs[k] x^k`, evaluated by Horner's rule.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let name = format!("poly{coeffs:?}");
        Self::new(name, degree.saturating_sub(1) as u32, move |x| {
            coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz_degree(&self) -> u32 {
        self.lipschitz_degree
    }

    /// `x -> phi(x + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}(x{shift:+})", self.name),
            lipschitz_degree: self.lipschitz_degree,
            eval: Arc::new(move |x| inner(x + shift)),
        }
    }

    /// `x -> phi(lambda x)`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}({lambda}x)", self.name),
            lipschitz_degree: self.lipschitz_degree,
            eval: Arc::new(move |x| inner(lambda * x)),
        }
    }

    /// Largest ratio `|phi(x) - phi(y)| / ((1 + |x|^k + |y|^k) |x - y|)` over
    /// random pairs in `[-half_width, half_width]`: an empirical lower bound on
    /// the local Lipschitz constant `C`.
    pub fn estimate_lipschitz_constant(&self, half_width: f64, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.lipschitz_degree as i32;
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let x = rng.random_range(-half_width..=half_width);
            let y = rng.random_range(-half_width..=half_width);
            if x == y {
                continue;
            }
            let growth = 1.0 + x.abs().powi(k) + y.abs().powi(k);
            worst = worst.max((self.eval(x) - self.eval(y)).abs() / (growth * (x - y).abs()));
        }
        worst
    }
}

impl fmt::Debug for TerminalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TerminalFunction")
            .field("name", &self.name)
            .field("lipschitz_degree", &self.lipschitz_degree)
            .finish()
    }
}

/// A locally Lipschitz terminal function on the plane.
#[derive(Clone)]
pub struct TerminalFunction2D {
    name: String,
    lipschitz_degree: u32,
    eval: Arc<Eval2>,
}

impl TerminalFunction2D {
    pub fn new(
        name: impl Into<String>,
        lipschitz_degree: u32,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            lipschitz_degree,
            eval: Arc::new(f),
        }
    }

    /// `(x1, x2) -> f(x1) + g(x2)`.
    pub fn additive(f: TerminalFunction, g: TerminalFunction) -> Self {
        let name = format!("{}(x1)+{}(x2)", f.name(), g.name());
        let degree = f.lipschitz_degree().max(g.lipschitz_degree());
        Self::new(name, degree, move |a, b| f.eval(a) + g.eval(b))
    }

    #[inline]
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        (self.eval)(x1, x2)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz_degree(&self) -> u32 {
        self.lipschitz_degree
    }
}

impl fmt::Debug for TerminalFunction2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TerminalFunction2D")
            .field("name", &self.name)
            .field("lipschitz_degree", &self.lipschitz_degree)
            .finish()
    }
}

/// Strictly increasing evaluation nodes `-K = x_0 < ... < x_L = K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    points: Vec<f64>,
    uniform_step: Option<f64>,
}

/// The cubic end conditions need four points at each end.
pub const MIN_GRID_POINTS: usize = 4;

impl SpatialGrid {
    /// `intervals + 1` equally spaced nodes on `[-half_width, half_width]`.
    pub fn uniform(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if intervals + 1 < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_GRID_POINTS} points, got {}",
                intervals + 1
            )));
        }
        let step = 2.0 * half_width / intervals as f64;
        let mut points: Vec<f64> = (0..=intervals)
            .map(|j| -half_width + j as f64 * step)
            .collect();
        // pin the end points exactly
        points[0] = -half_width;
        points[intervals] = half_width;
        Ok(Self {
            half_width,
            points,
            uniform_step: Some(step),
        })
    }

    /// Arbitrary nodes; must be strictly increasing with `x_0 = -x_L`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_GRID_POINTS} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("points must be finite".into()));
        }
        if let Some(j) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing (index {j})"
            )));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if (first + last).abs() > 1e-12 * last.abs().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "bounds must be symmetric, got [{first}, {last}]"
            )));
        }
        Ok(Self {
            half_width: last,
            points,
            uniform_step: None,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spacing, if the grid is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        self.uniform_step
    }

    /// Largest gap between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.uniform_step.unwrap_or_else(|| {
            self.points
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0, f64::max)
        })
    }
}
