//! Plain Monte Carlo, Monte Carlo with second-order control variates, and
//! quadrature as the inner expectation of the solver. Far from the origin the
//! plain estimator is swamped by the size of `x^3`; the control variates remove
//! the Taylor part exactly.
//!
//! Inside the solver the derivatives come from finite differences on the grid,
//! and the correction term scales roughly like `|mean(Z²) - 1| σ̄² / (n Δx²)`
//! times any node-to-node roughness of the previous iterate. When that factor
//! is above one the roughness feeds on itself, so small samples with fine grids
//! blow up. 20 000 draws are enough here.

use gheat::expectation::{finite_diff_derivs, gauss_expectation_mc, gauss_expectation_mc_cv, gauss_expectation_quad};
use gheat::quadrature::QuadratureRule;
use gheat::{expectation, Backend, McSample, SolverConfig1D, TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let f = |y: f64| y * y * y;
    let rule = QuadratureRule::gauss_hermite(64)?;
    let sample = McSample::new(10_000, 7);
    let (x, s) = (5.0, 0.1);
    let exact = gauss_expectation_quad(f, x, s, &rule)?;
    let (f1, f2) = finite_diff_derivs(f, x, 1e-3);
    let plain = gauss_expectation_mc(f, x, s, &sample)?;
    let cv = gauss_expectation_mc_cv(f, f1, f2, x, s, &sample)?;
    println!("E[(5 + 0.1 Z)^3]: quad {exact:.8}  mc err {:.2e}  mc+cv err {:.2e}", plain - exact, cv - exact);

    let phi = TerminalFunction::new("cube", 2, |x| x * x * x);
    let base = SolverConfig1D::new(VarianceInterval::new(0.5, 1.0)?, 20)?;
    for backend in [
        Backend::Quadrature { order: 64 },
        Backend::MonteCarlo { samples: 20_000, seed: 1 },
        Backend::MonteCarloCv { samples: 20_000, seed: 1 },
    ] {
        let value = expectation(&phi, &base.clone().with_backend(backend)?)?.value;
        println!("{backend:?}: E[X^3] = {value:.6}");
    }
    Ok(())
}
