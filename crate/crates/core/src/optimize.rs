//! Bounded scalar maximization over a volatility interval.
//!
//! Objectives here come out of quadrature, so the search is derivative-free:
//! golden section refined over the whole interval, seeded with both endpoints
//! and the midpoint. Values that agree within [`TIE_TOLERANCE`] (relative) are
//! considered equal and the larger abscissa wins, which makes constant
//! objectives return the upper endpoint.

use crate::error::Result;
use crate::types::VarianceInterval;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Relative tolerance under which two objective values count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-14;

/// Termination width for golden section, relative to the interval width.
pub const ARGMAX_TOLERANCE: f64 = 1e-6;

const MAX_ITERATIONS: usize = 200;

/// Result of a bounded maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub value: f64,
    pub argmax: f64,
    pub evaluations: usize,
    /// `false` when the iteration budget ran out; `value` is then the best seen.
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Best {
    x: f64,
    fx: f64,
}

impl Best {
    fn offer(&mut self, x: f64, fx: f64) {
        if beats(fx, x, self.fx, self.x) {
            self.x = x;
            self.fx = fx;
        }
    }
}

/// Whether `(x, fx)` should replace the incumbent `(y, fy)`.
pub(crate) fn beats(fx: f64, x: f64, fy: f64, y: f64) -> bool {
    if fy.is_nan() {
        return !fx.is_nan();
    }
    let scale = 1.0 + fx.abs().max(fy.abs());
    if (fx - fy).abs() <= TIE_TOLERANCE * scale {
        x > y
    } else {
        fx > fy
    }
}

struct Counted<F> {
    f: F,
    calls: usize,
}

impl<F: FnMut(f64) -> Result<f64>> Counted<F> {
    fn call(&mut self, x: f64) -> Result<f64> {
        self.calls += 1;
        (self.f)(x)
    }
}

/// Golden-section search on `[a, b]`; every evaluated point is offered to `best`.
fn golden<F: FnMut(f64) -> Result<f64>>(
    f: &mut Counted<F>,
    mut a: f64,
    mut b: f64,
    tol: f64,
    best: &mut Best,
) -> Result<bool> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f.call(c)?;
    let mut fd = f.call(d)?;
    best.offer(c, fc);
    best.offer(d, fd);
    for _ in 0..MAX_ITERATIONS {
        if b - a <= tol {
            return Ok(true);
        }
        // ties move right so flat objectives drift to the upper end
        if beats(fc, c, fd, d) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f.call(c)?;
            best.offer(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f.call(d)?;
            best.offer(d, fd);
        }
    }
    Ok(b - a <= tol)
}

/// Maximize a fallible objective over `[lo, hi]`.
pub fn try_maximize<F>(f: F, lo: f64, hi: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f = Counted { f, calls: 0 };
    if hi <= lo {
        let fx = f.call(hi)?;
        return Ok(Maximum {
            value: fx,
            argmax: hi,
            evaluations: 1,
            converged: true,
        });
    }
    let mid = 0.5 * (lo + hi);
    let f_lo = f.call(lo)?;
    let f_mid = f.call(mid)?;
    let f_hi = f.call(hi)?;
    let mut best = Best { x: lo, fx: f_lo };
    best.offer(mid, f_mid);
    best.offer(hi, f_hi);
    let converged = golden(&mut f, lo, hi, ARGMAX_TOLERANCE * (hi - lo), &mut best)?;
    Ok(Maximum {
        value: best.fx,
        argmax: best.x,
        evaluations: f.calls,
        converged,
    })
}

/// Maximize over `[lo, hi]` starting from a previous maximizer `hint`.
///
/// Golden section runs on a bracket of 20% of the interval around the hint;
/// the global endpoints are always compared. If the refinement ends on an
/// interior bracket edge the search stalled and the full seeded search runs.
pub fn try_maximize_warm<F>(f: F, lo: f64, hi: f64, hint: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let width = hi - lo;
    if width <= 0.0 || !(lo..=hi).contains(&hint) {
        return try_maximize(f, lo, hi);
    }
    let mut f = Counted { f, calls: 0 };
    let a = (hint - 0.1 * width).max(lo);
    let b = (hint + 0.1 * width).min(hi);
    let tol = ARGMAX_TOLERANCE * width;
    let mut best = Best { x: a, fx: f64::NAN };
    let converged = golden(&mut f, a, b, tol, &mut best)?;
    let stalled = (best.x - a < 2.0 * tol && a > lo) || (b - best.x < 2.0 * tol && b < hi);
    if stalled || !converged {
        let inner = f.f;
        let mut full = try_maximize(inner, lo, hi)?;
        full.evaluations += f.calls;
        return Ok(full);
    }
    let f_lo = f.call(lo)?;
    best.offer(lo, f_lo);
    let f_hi = f.call(hi)?;
    best.offer(hi, f_hi);
    Ok(Maximum {
        value: best.fx,
        argmax: best.x,
        evaluations: f.calls,
        converged,
    })
}

/// `max_{z in [sigma_lo, sigma_hi]} f(z)` with its maximizer: the sublinear
/// expectation of `f` under the maximal distribution on the interval.
pub fn maximal_expectation<F: FnMut(f64) -> f64>(mut f: F, v: &VarianceInterval) -> Maximum {
    try_maximize(|z| Ok(f(z)), v.sigma_lo(), v.sigma_hi()).expect("infallible objective")
}

/// Fallible form of [`maximal_expectation`].
pub fn try_maximal_expectation<F>(f: F, v: &VarianceInterval) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_maximize(f, v.sigma_lo(), v.sigma_hi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> VarianceInterval {
        VarianceInterval::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn monotone_objectives_hit_endpoints() {
        let m = maximal_expectation(|z| z * z, &unit());
        assert_eq!((m.value, m.argmax), (1.0, 1.0));
        let m = maximal_expectation(|z| -z * z, &unit());
        assert_eq!((m.value, m.argmax), (-0.25, 0.5));
    }

    #[test]
    fn interior_maximizer() {
        let m = maximal_expectation(|z| -(z - 0.7) * (z - 0.7), &unit());
        // value error is quadratic in the argmax tolerance
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(m.argmax, 0.7, epsilon = 1e-6);
        assert!(m.converged);
    }

    #[test]
    fn constant_objective_prefers_upper_endpoint() {
        let m = maximal_expectation(|_| 3.0, &unit());
        assert_eq!(m.argmax, 1.0);
        assert_eq!(m.value, 3.0);
    }

    #[test]
    fn degenerate_interval_short_circuits() {
        let v = VarianceInterval::degenerate(0.8).unwrap();
        let m = maximal_expectation(|z| (z - 0.3).sin(), &v);
        assert_eq!(m.evaluations, 1);
        assert_eq!(m.value, (0.8f64 - 0.3).sin());
    }

    #[test]
    fn bimodal_objective_finds_global() {
        // local max at 0.55, global at the upper end
        let f = |z: f64| 0.1 * (-(z - 0.55f64).powi(2) * 400.0).exp() + 2.0 * (z - 0.9).max(0.0);
        let m = maximal_expectation(f, &unit());
        assert_eq!(m.argmax, 1.0);
    }

    #[test]
    fn warm_start_matches_cold() {
        let f = |z: f64| -(z - 0.83f64).powi(2);
        let cold = try_maximize(|z| Ok(f(z)), 0.5, 1.0).unwrap();
        for hint in [0.5, 0.62, 0.83, 0.95, 1.0] {
            let warm = try_maximize_warm(|z| Ok(f(z)), 0.5, 1.0, hint).unwrap();
            assert_abs_diff_eq!(warm.argmax, cold.argmax, epsilon = 2e-6);
            assert_abs_diff_eq!(warm.value, cold.value, epsilon = 1e-11);
        }
    }

    #[test]
    fn errors_propagate() {
        let r = try_maximize(
            |z| {
                if z > 0.9 {
                    Err(crate::Error::NonFinite { at: z, value: f64::NAN })
                } else {
                    Ok(z)
                }
            },
            0.5,
            1.0,
        );
        assert!(r.is_err());
    }

    proptest! {
        #[test]
        fn never_below_endpoints(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.3f64..1.2) {
            let f = |z: f64| a * z + b * z * z + (c * 7.0 * z).sin();
            let m = maximal_expectation(f, &unit());
            prop_assert!(m.value >= f(0.5).max(f(1.0)) - 1e-12);
            prop_assert!((0.5..=1.0).contains(&m.argmax));
        }
    }
}
