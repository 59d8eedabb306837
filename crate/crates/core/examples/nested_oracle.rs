//! For `n <= 3` the iteration can be evaluated exactly by recursion, with no
//! interpolation. This compares it with the grid solver on a fine grid.

use gheat::corpus::lookup_1d;
use gheat::oracle::{nested_evaluate, NestedConfig};
use gheat::{expectation, SolverConfig1D, VarianceInterval};

fn main() -> gheat::Result<()> {
    let v = VarianceInterval::new(0.5, 1.0)?;
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    for name in ["square", "cube", "tent"] {
        let phi = lookup_1d(name).expect("corpus");
        for n in 1..=max_n.min(3) {
            let cfg = SolverConfig1D::new(v, n)?.with_grid(5.0, 8000)?;
            let grid = expectation(&phi, &cfg)?.value;
            let exact = nested_evaluate(&phi, &v, n, 0.0, &NestedConfig::default())?;
            println!("{name:<6} n={n}  grid {grid:.9}  nested {exact:.9}  diff {:+.2e}", grid - exact);
        }
    }
    Ok(())
}
