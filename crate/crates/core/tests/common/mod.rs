#![allow(dead_code)]

use gheat::{TerminalFunction, VarianceInterval};

/// FD reference `u(0, 0)` for `x^3` on `[0.5, 1]` (dx = 0.01, K = 10,
/// dt = 0.9 dx²). Halving dx moves it by 1.24e-5. Regenerate with
/// `cargo run --release --example fd_reference`.
pub const ORACLE_X3_HALF_ONE: f64 = 0.499_362_164_008_245_6;

/// Nested evaluation of `phi_{2,2}(0)` for `x^3` on `[0.5, 1]` at the default
/// nested settings (order 64).
pub const NESTED_X3_N2: f64 = 0.319_407_457_265_325_3;

pub fn unit() -> VarianceInterval {
    VarianceInterval::new(0.5, 1.0).unwrap()
}

pub fn cube() -> TerminalFunction {
    TerminalFunction::new("cube", 2, |x| x * x * x)
}

pub fn neg_cube() -> TerminalFunction {
    TerminalFunction::new("neg-cube", 2, |x| -x * x * x)
}

pub fn square() -> TerminalFunction {
    TerminalFunction::new("square", 1, |x| x * x)
}

pub fn tent() -> TerminalFunction {
    TerminalFunction::new("tent", 0, |x: f64| (1.0 - x.abs()).max(0.0))
}
