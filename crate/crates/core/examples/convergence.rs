//! Error of `phi_{n,n}(0)` for `x^3` as `n` grows, against the finite-difference
//! reference, with the fitted log-log slope.

use gheat::oracle::oracle_value_x3;
use gheat::solver1d::{convergence_study, loglog_slope};
use gheat::{SolverConfig1D, TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let v = VarianceInterval::new(0.5, 1.0)?;
    let reference = oracle_value_x3(&v)?;
    let phi = TerminalFunction::new("cube", 2, |x| x * x * x);
    let rows = convergence_study(&phi, &SolverConfig1D::new(v, 1)?, &[5, 10, 20, 40, 80, 160], reference)?;
    println!("reference {reference:.8}");
    println!("{:>5} {:>12} {:>10}", "n", "value", "error");
    for r in &rows {
        println!("{:>5} {:>12.8} {:>10.3e}", r.n, r.value, r.abs_error);
    }
    println!("slope {:.3}", loglog_slope(&rows));
    Ok(())
}
