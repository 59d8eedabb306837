//! Sublinear expectations of the G-normal distribution.
//!
//! `Ê[phi(X)]` for `X ~ GN(0, [sigma_lo², sigma_hi²])` and the full solution
//! surface of the G-heat (Black–Scholes–Barenblatt) equation
//! `u_t + G(u_xx) = 0, u(1, ·) = phi` are computed by iterating
//!
//! ```text
//! phi_{i+1,n}(x) = max_{v in [sigma_lo, sigma_hi]} E[phi_{i,n}(N(x, v²/n))]
//! ```
//!
//! on a spatial grid with spline refits between steps. Each step is a
//! semi-G-normal expectation: a classical Gaussian expectation wrapped in a
//! maximization over the volatility interval.
//!
//! Independent checks live in [`oracle`]: an explicit finite-difference
//! G-heat solver and an exact nested evaluation of the iteration for small `n`.

pub mod corpus;
pub mod error;
pub mod expectation;
pub mod experiment;
pub mod gam;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod semi_g;
pub mod solver1d;
pub mod solver2d;
pub mod spline;
pub mod surface;
pub mod types;

pub use error::{Error, Result};
pub use expectation::{Backend, McSample};
pub use optimize::{maximal_expectation, Maximum};
pub use quadrature::QuadratureRule;
pub use semi_g::{semi_g_expectation, semi_g_expectation_2d, SemiGNormal};
pub use solver1d::{expectation, solve, SolverConfig1D};
pub use spline::{CubicSpline, EndCondition};
pub use surface::{IterationFunction, SolutionSurface};
pub use types::{
    g_function, CovariancePoint, CovarianceSet2D, SpatialGrid, TerminalFunction,
    TerminalFunction2D, VarianceInterval,
};
