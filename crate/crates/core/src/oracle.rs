//! Reference solutions that share nothing with the spline/optimizer pipeline
//! of [`crate::solver1d`].
//!
//! * [`fd_solve`]: explicit finite differences for `u_t + G(u_xx) = 0`,
//!   marched backward from `u(1, ·) = phi`.
//! * [`nested_evaluate`]: the iteration evaluated exactly by recursion for
//!   `n <= 3`, with no interpolation anywhere. The cost grows like
//!   `(evaluations per maximization × quadrature order)^n`, so only tiny `n`
//!   are practical.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::types::{g_function, TerminalFunction, VarianceInterval};

/// Lattice parameters for [`fd_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    dx: f64,
    dt: f64,
    half_width: f64,
    intervals: usize,
    steps: usize,
    snapshots: usize,
    variance: VarianceInterval,
}

impl FdConfig {
    /// `dx` is shrunk so that `2 half_width / dx` is an integer and `dt` so
    /// that `1 / dt` is an integer multiple of `snapshots`. The explicit
    /// scheme requires `dt <= dx² / sigma_hi²`.
    pub fn new(
        variance: VarianceInterval,
        dx: f64,
        half_width: f64,
        dt: f64,
        snapshots: usize,
    ) -> Result<Self> {
        if !(dx > 0.0 && half_width > 0.0 && dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dx, dt and half width must be positive (dx = {dx}, dt = {dt}, K = {half_width})"
            )));
        }
        let intervals = (2.0 * half_width / dx - 1e-9).ceil() as usize;
        if intervals < 4 {
            return Err(Error::InvalidConfig("fewer than 4 lattice intervals".into()));
        }
        let dx = 2.0 * half_width / intervals as f64;
        let limit = dx * dx / (variance.sigma_hi() * variance.sigma_hi());
        if dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        let snapshots = snapshots.max(1);
        let steps = {
            let raw = (1.0 / dt - 1e-9).ceil() as usize;
            raw.div_ceil(snapshots) * snapshots
        };
        Ok(Self {
            dx,
            dt: 1.0 / steps as f64,
            half_width,
            intervals,
            steps,
            snapshots,
            variance,
        })
    }

    /// `dt = fraction · dx² / sigma_hi²`.
    pub fn with_cfl_fraction(
        variance: VarianceInterval,
        dx: f64,
        half_width: f64,
        fraction: f64,
        snapshots: usize,
    ) -> Result<Self> {
        let dt = fraction * dx * dx / (variance.sigma_hi() * variance.sigma_hi());
        Self::new(variance, dx, half_width, dt, snapshots)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// `u` on the lattice at the stored times `t_k = 1 - k / snapshots`.
#[derive(Debug, Clone)]
pub struct FdSolution {
    x: Vec<f64>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dx: f64,
}

impl FdSolution {
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Stored times, from `t = 1` down to `t = 0`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// `u(0, ·)` on the lattice.
    pub fn final_values(&self) -> &[f64] {
        self.values.last().expect("at least one snapshot")
    }

    /// `u(t_k, x)` by four-point Lagrange interpolation between lattice nodes.
    pub fn value_at(&self, k: usize, x: f64) -> f64 {
        let u = &self.values[k];
        let last = u.len() - 1;
        let pos = (x - self.x[0]) / self.dx;
        let j = (pos.floor() as isize).clamp(1, last as isize - 2) as usize;
        let s = pos - j as f64;
        let (um, u0, u1, u2) = (u[j - 1], u[j], u[j + 1], u[j + 2]);
        // nodes at s = -1, 0, 1, 2
        -um * s * (s - 1.0) * (s - 2.0) / 6.0 + u0 * (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
            - u1 * (s + 1.0) * s * (s - 2.0) / 2.0
            + u2 * (s + 1.0) * s * (s - 1.0) / 6.0
    }

    /// `u(0, x)`.
    pub fn value_at_zero_time(&self, x: f64) -> f64 {
        self.value_at(self.values.len() - 1, x)
    }
}

/// Backward explicit Euler for `u_t + G(u_xx) = 0`, `u(1, ·) = phi`:
/// `u(t - dt, x_j) = u(t, x_j) + dt G(D² u(t, x_j))`.
///
/// The two edge nodes use the one-sided second difference
/// `(2u_0 - 5u_1 + 4u_2 - u_3) / dx²`, exact for cubics. Keep the lattice wide
/// enough that the edge influence cannot reach the region of interest.
pub fn fd_solve(phi: &TerminalFunction, cfg: &FdConfig) -> Result<FdSolution> {
    let m = cfg.intervals;
    let x: Vec<f64> = (0..=m)
        .map(|j| -cfg.half_width + j as f64 * cfg.dx)
        .collect();
    let mut u: Vec<f64> = x.iter().map(|x| phi.eval(*x)).collect();
    if let Some(j) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { at: x[j], value: u[j] });
    }
    let inv_dx2 = 1.0 / (cfg.dx * cfg.dx);
    let mut next = vec![0.0; m + 1];
    let mut times = vec![1.0];
    let mut values = vec![u.clone()];
    let per_snapshot = cfg.steps / cfg.snapshots;

    for step in 1..=cfg.steps {
        for j in 1..m {
            let d2 = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_dx2;
            next[j] = u[j] + cfg.dt * g_function(d2, &cfg.variance);
        }
        let left = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv_dx2;
        let right = (2.0 * u[m] - 5.0 * u[m - 1] + 4.0 * u[m - 2] - u[m - 3]) * inv_dx2;
        next[0] = u[0] + cfg.dt * g_function(left, &cfg.variance);
        next[m] = u[m] + cfg.dt * g_function(right, &cfg.variance);
        std::mem::swap(&mut u, &mut next);

        let t = 1.0 - step as f64 * cfg.dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { t });
        }
        if step % per_snapshot == 0 {
            times.push(if step == cfg.steps { 0.0 } else { t });
            values.push(u.clone());
        }
    }
    Ok(FdSolution {
        x,
        times,
        values,
        dx: cfg.dx,
    })
}

/// Reference `Ê[X³]` for `X ~ GN(0, [sigma_lo², sigma_hi²])`: `u(0, 0)` from
/// [`fd_solve`] with `dx = 0.01`, `K = 10`, `dt = 0.9 dx² / sigma_hi²`.
pub fn oracle_value_x3(v: &VarianceInterval) -> Result<f64> {
    let cube = TerminalFunction::new("cube", 2, |x| x * x * x);
    let cfg = FdConfig::with_cfl_fraction(*v, 0.01, 10.0, 0.9, 1)?;
    Ok(fd_solve(&cube, &cfg)?.value_at_zero_time(0.0))
}

/// Settings for [`nested_evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedConfig {
    /// Gauss–Hermite order for every expectation.
    pub order: usize,
    /// Equally spaced volatilities scanned before the golden-section refine.
    pub scan_points: usize,
    /// Golden-section termination width relative to `sigma_hi - sigma_lo`.
    pub refine_tolerance: f64,
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self {
            order: 64,
            scan_points: 5,
            refine_tolerance: 1e-4,
        }
    }
}

struct Nested<'a> {
    phi: &'a TerminalFunction,
    lo: f64,
    hi: f64,
    scale: f64,
    nodes: &'a [f64],
    probs: &'a [f64],
    cfg: NestedConfig,
}

impl Nested<'_> {
    /// `phi_k(x)`, recursing down to `phi_0 = phi`.
    fn level(&self, k: usize, x: f64) -> Result<f64> {
        if k == 0 {
            let v = self.phi.eval(x);
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { at: x, value: v })
            };
        }
        let objective = |v: f64| -> Result<f64> {
            let s = v * self.scale;
            let mut acc = 0.0;
            for (z, p) in self.nodes.iter().zip(self.probs) {
                acc += p * self.level(k - 1, x + s * z)?;
            }
            Ok(acc)
        };
        self.maximize(objective)
    }

    fn maximize(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        if self.hi <= self.lo {
            return f(self.hi);
        }
        let m = self.cfg.scan_points.max(2);
        let step = (self.hi - self.lo) / (m - 1) as f64;
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..m {
            let v = f(self.lo + i as f64 * step)?;
            if v >= best {
                best = v;
                best_i = i;
            }
        }
        let mut a = self.lo + best_i.saturating_sub(1) as f64 * step;
        let mut b = (self.lo + (best_i + 1) as f64 * step).min(self.hi);
        let tol = self.cfg.refine_tolerance * (self.hi - self.lo);
        const R: f64 = 0.618_033_988_749_894_9;
        let mut c = b - R * (b - a);
        let mut d = a + R * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        while b - a > tol {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - R * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + R * (b - a);
                fd = f(d)?;
            }
        }
        Ok(best.max(fc).max(fd))
    }
}

/// `phi_{n,n}(x)` by direct recursion through the definition, `n in {1, 2, 3}`.
pub fn nested_evaluate(
    phi: &TerminalFunction,
    v: &VarianceInterval,
    n: usize,
    x: f64,
    cfg: &NestedConfig,
) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidConfig(format!(
            "nested evaluation supports n in 1..=3, got {n}"
        )));
    }
    let rule = QuadratureRule::gauss_hermite(cfg.order)?;
    let ctx = Nested {
        phi,
        lo: v.sigma_lo(),
        hi: v.sigma_hi(),
        scale: 1.0 / (n as f64).sqrt(),
        nodes: rule.standard_nodes(),
        probs: rule.probabilities(),
        cfg: *cfg,
    };
    ctx.level(n, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit() -> VarianceInterval {
        VarianceInterval::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn cfl_violation_rejected() {
        let v = unit();
        assert!(matches!(
            FdConfig::new(v, 0.1, 5.0, 0.011, 1),
            Err(Error::Cfl { .. })
        ));
        assert!(FdConfig::new(v, 0.1, 5.0, 0.01, 1).is_ok());
    }

    #[test]
    fn square_is_classical_heat_with_upper_volatility() {
        let phi = TerminalFunction::new("square", 1, |x| x * x);
        let cfg = FdConfig::with_cfl_fraction(unit(), 0.05, 6.0, 0.9, 4).unwrap();
        let sol = fd_solve(&phi, &cfg).unwrap();
        assert_eq!(sol.times(), &[1.0, 0.75, 0.5, 0.25, 0.0]);
        assert_abs_diff_eq!(sol.value_at_zero_time(0.0), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.value_at(2, 1.3), 1.69 + 0.5, epsilon = 1e-9);
    }

    #[test]
    fn constant_is_exact() {
        let phi = TerminalFunction::new("const", 0, |_| -2.5);
        let cfg = FdConfig::with_cfl_fraction(unit(), 0.1, 3.0, 0.9, 1).unwrap();
        let sol = fd_solve(&phi, &cfg).unwrap();
        assert!(sol.final_values().iter().all(|v| *v == -2.5));
    }

    #[test]
    fn degenerate_cube_matches_gaussian_moment() {
        let phi = TerminalFunction::new("cube", 2, |x| x * x * x);
        let v = VarianceInterval::degenerate(1.0).unwrap();
        let cfg = FdConfig::with_cfl_fraction(v, 0.05, 8.0, 0.9, 1).unwrap();
        let sol = fd_solve(&phi, &cfg).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert_abs_diff_eq!(sol.value_at_zero_time(x), x * x * x + 3.0 * x, epsilon = 1e-9);
        }
    }

    #[test]
    fn nested_single_step_square() {
        let phi = TerminalFunction::new("square", 1, |x| x * x);
        let cfg = NestedConfig::default();
        assert_abs_diff_eq!(nested_evaluate(&phi, &unit(), 1, 0.0, &cfg).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nested_evaluate(&phi, &unit(), 2, 0.0, &cfg).unwrap(), 1.0, epsilon = 1e-12);
        assert!(nested_evaluate(&phi, &unit(), 4, 0.0, &cfg).is_err());
    }
}
