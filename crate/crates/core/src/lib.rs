//! Primal interior-point solver for non-convex quadratic programs over a box
//! intersected with an ℓ∞ trust region, with log barriers on both.

// `!(a > b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod newton;
pub mod oracle;
pub mod path;
pub mod problem;
pub mod solver;

pub use error::{Error, Phase, Result};
pub use linalg::Matrix;
pub use problem::{validate, ConvexityStatus, DomainGeometry, Objective, ProblemSpec};
pub use solver::{solve, solve_with, Solution, SolveOptions, SolveTrace};
