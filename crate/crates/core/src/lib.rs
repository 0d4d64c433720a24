//! Convex isotonic regression with generalized order restrictions on a
//! directed tree:
//!
//! ```text
//! minimize  Σ_i f_i(x_i) + Σ_(i,j) λ_ij (x_i − x_j)_+ + μ_ij (x_j − x_i)_+
//! ```
//!
//! with strongly convex differentiable `f_i` and weights in `[0, +∞]`. An
//! infinite weight turns its penalty into a hard order constraint.
//!
//! The [`solver`] attaches nodes one leaf at a time and carries an exact
//! dual certificate throughout; [`oracle`] holds independent brute-force
//! and pool-adjacent-violators solvers used to check it.

pub mod error;
pub mod exec;
pub mod instances;
pub mod io;
pub mod loss;
pub mod oracle;
pub mod roots;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use exec::Execution;
pub use loss::{LossFunction, LossGroup};
pub use solver::{kkt_residual, solve, solve_with, Problem, Solution, SolveStats, SolverOptions};
pub use tree::{Arborescence, DirectedTree, Edge};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
