//! Both `x^3` and `-x^3` have strictly positive sublinear expectation once the
//! volatility is uncertain, and both vanish in the classical case.

use gheat::{expectation, SolverConfig1D, TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let cube = TerminalFunction::new("cube", 2, |x| x * x * x);
    let neg = TerminalFunction::new("neg-cube", 2, |x| -x * x * x);
    for (lo, hi) in [(0.5, 1.0), (0.8, 1.0), (1.0, 1.0)] {
        let cfg = SolverConfig1D::new(VarianceInterval::new(lo, hi)?, 50)?;
        let up = expectation(&cube, &cfg)?.value;
        let down = expectation(&neg, &cfg)?.value;
        println!("[{lo}, {hi}]  E[X^3] = {up:+.6}  E[-X^3] = {down:+.6}");
    }
    Ok(())
}
