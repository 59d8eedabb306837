//! Semi-G-normal expectation against the G-normal one for every 1D corpus function.
//!
//! The semi-G value only chooses one volatility for the whole path, so it never
//! exceeds the G-normal value; for odd functions the gap is large.

use gheat::corpus;
use gheat::{expectation, semi_g_expectation, Backend, SemiGNormal, SolverConfig1D, VarianceInterval};

fn main() -> gheat::Result<()> {
    let v = VarianceInterval::new(0.5, 1.0)?;
    let cfg = SolverConfig1D::new(v, 50)?;
    let w = SemiGNormal::new(v);
    println!("{:<18} {:>12} {:>12} {:>10}", "phi", "semi-G", "G (n=50)", "gap");
    for entry in corpus::entries().iter().filter(|e| e.dimension == 1) {
        let phi = corpus::lookup_1d(entry.name).expect("listed");
        let semi = semi_g_expectation(&phi, &w, &Backend::default())?;
        let g = expectation(&phi, &cfg)?;
        println!(
            "{:<18} {:>12.6} {:>12.6} {:>10.6}",
            entry.name,
            semi.value,
            g.value,
            g.value - semi.value
        );
    }
    Ok(())
}
