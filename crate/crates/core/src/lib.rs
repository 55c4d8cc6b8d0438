//! Optimal broadcasting, purification and phase-conjugating broadcasting of
//! continuous-variable states.
//!
//! The [`gaussian`] back end simulates the optical circuits exactly on means
//! and covariance matrices; [`bounds`] evaluates the analytic noise limits the
//! circuits reach; [`fock`] re-runs the same circuits on truncated Fock-space
//! density matrices as an independent check.

pub mod bounds;
pub mod broadcast;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;

pub use error::{Error, Result};
