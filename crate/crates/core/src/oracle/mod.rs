//! Brute-force verification of the closed forms.
//!
//! [`grid`] solves the covariance extremal problem exactly over joint
//! distributions on a finite grid, which can only ever be as extreme as the
//! continuous problem; [`verify`] and [`sweep`] turn that and a few
//! parametric families into pass/fail records.

pub mod grid;
pub mod report;
pub mod simplex;
pub mod sweep;
pub mod verify;

pub use grid::{solve_grid_lp, GridLpProblem, LpSolution, LpStatus, MomentKind, Sense};
pub use report::CheckRecord;
pub use verify::verify_bounds;
