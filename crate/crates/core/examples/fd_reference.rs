//! Computes the finite-difference reference for `E[X^3]`, `X ~ GN(0, [0.25, 1])`,
//! at the standard resolution and with the lattice halved twice, printing the
//! successive changes. This is how the constant frozen in the acceptance tests
//! was produced.

use gheat::oracle::{fd_solve, FdConfig};
use gheat::{TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let v = VarianceInterval::new(0.5, 1.0)?;
    let cube = TerminalFunction::new("cube", 2, |x| x * x * x);
    let mut previous: Option<f64> = None;
    for dx in [0.01, 0.005, 0.0025] {
        let cfg = FdConfig::with_cfl_fraction(v, dx, 10.0, 0.9, 1)?;
        let value = fd_solve(&cube, &cfg)?.value_at_zero_time(0.0);
        match previous {
            Some(p) => println!("dx = {dx:<7} u(0,0) = {value:.15}  change {:.3e}", value - p),
            None => println!("dx = {dx:<7} u(0,0) = {value:.15}"),
        }
        previous = Some(value);
    }
    Ok(())
}
