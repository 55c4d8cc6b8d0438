//! Multimode Gaussian states and the symplectic/channel calculus acting on
//! them.
//!
//! Quadratures follow `x = (a + a†)/2`, `y = (a − a†)/(2i)`, so `[x, y] = i/2`
//! and the vacuum has variance `1/4` in each quadrature. With this scaling the
//! per-mode noise sum obeys `Δx² + Δy² = 1/2 + ⟨a†a⟩ − |⟨a⟩|²` verbatim.
//! Phase-space vectors are interleaved as `(x₀, y₀, x₁, y₁, …)`.

mod channel;
mod maps;
mod state;

pub use channel::{AmplifierKind, GaussianChannel};
pub use maps::SymplecticMap;
pub use state::{GaussianState, ModeStats};

/// Entrywise tolerance for structural invariants (symplecticity, uncertainty,
/// complete positivity).
pub const STRUCT_TOL: f64 = 1e-10;

/// Entrywise tolerance for symmetry of covariance and noise matrices.
pub const SYMM_TOL: f64 = 1e-12;

/// Variance of a single vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;
