//! Builds the whole surface `u(t, x)` for `x^3` and writes it as `t,x,u` CSV.
//!
//! ```text
//! cargo run --release --example surface_1d -- surface.csv
//! ```

use gheat::experiment::surface_csv_1d;
use gheat::{solve, SolverConfig1D, TerminalFunction, VarianceInterval};

fn main() -> gheat::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "surface.csv".into());
    let phi = TerminalFunction::new("cube", 2, |x| x * x * x);
    let cfg = SolverConfig1D::new(VarianceInterval::new(0.5, 1.0)?, 20)?;
    let surface = solve(&phi, &cfg)?;
    for i in (0..=surface.steps()).step_by(5) {
        let t = surface.time_of(i);
        let row: Vec<String> = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|x| format!("{:+.4}", surface.eval(i, *x)))
            .collect();
        println!("t = {t:.2}: u(t, -1..1) = {}", row.join(" "));
    }
    std::fs::write(&path, surface_csv_1d(&surface))?;
    println!("wrote {path}");
    Ok(())
}
