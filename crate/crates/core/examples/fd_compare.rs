//! Solver surface against an explicit finite-difference solution of the G-heat
//! equation, for `x^3` with `n = 100` on `[-50, 50]`.

use gheat::experiment::compare_1d;
use gheat::{solve, SolverConfig1D, TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let phi = TerminalFunction::new("cube", 2, |x| x * x * x);
    let cfg = SolverConfig1D::new(VarianceInterval::new(0.5, 1.0)?, 100)?.with_grid(50.0, 2001)?;
    let surface = solve(&phi, &cfg)?;
    let (csv, summary) = compare_1d(&phi, &surface, 1.0)?;
    for line in csv.lines().step_by(8) {
        println!("{line}");
    }
    println!(
        "max |error| on |x| <= 1: {:.3e} at x = {:.3}",
        summary.max_abs_error, summary.at
    );
    Ok(())
}
