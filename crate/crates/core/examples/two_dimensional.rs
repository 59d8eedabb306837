//! Covariance uncertainty in two dimensions. For `x1^3 + x2^3` the correlation
//! never enters and the value is twice the one-dimensional one.

use gheat::corpus::{lookup_1d, lookup_2d};
use gheat::semi_g_expectation_2d;
use gheat::solver2d::{expectation_2d, SolverConfig2D};
use gheat::{expectation, CovarianceSet2D, SolverConfig1D, VarianceInterval};

fn main() -> gheat::Result<()> {
    let s = VarianceInterval::new(0.5, 1.0)?;
    let cov = CovarianceSet2D::new(s, s, -0.5, 0.5)?;
    let cfg = SolverConfig2D::new(cov, 10)?;
    for name in ["additive-square-2d", "additive-cube-2d", "product-2d"] {
        let phi = lookup_2d(name).expect("corpus");
        let g = expectation_2d(&phi, &cfg)?;
        let semi = semi_g_expectation_2d(&phi, &cov, 32)?;
        println!(
            "{name:<20} G = {:.5} at (s1 {:.2}, s2 {:.2}, rho {:+.2})   semi-G = {:.5}",
            g.value, g.argmax.sigma1, g.argmax.sigma2, g.argmax.rho, semi.value
        );
    }
    let one = expectation(&lookup_1d("cube").expect("corpus"), &SolverConfig1D::new(s, 10)?)?;
    println!("2 x one-dimensional cube value: {:.5}", 2.0 * one.value);
    Ok(())
}
