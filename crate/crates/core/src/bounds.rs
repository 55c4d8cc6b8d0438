//! Closed-form noise limits for broadcasting, purification and phase
//! conjugation, and the superbroadcasting threshold.
//!
//! All noise quantities are quadrature noise sums `Δx² + Δy²` in the
//! `x = (a + a†)/2` convention, so a coherent state has noise sum `1/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::AmplifierKind;
use crate::linalg::CMatrix;

/// Slack allowed below the Heisenberg floor `γ ≥ 1/2`.
pub const GAMMA_FLOOR_TOL: f64 = 1e-12;

/// Which limit a [`BoundQuery`] asks for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Broadcast,
    Purify,
    PhaseConjugate,
    Amplifier { gain: f64, sign: AmplifierKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub gamma: f64,
    pub n: usize,
    pub m: usize,
    pub kind: BoundKind,
}

impl BoundQuery {
    pub fn evaluate(&self) -> Result<f64> {
        match self.kind {
            BoundKind::Broadcast => broadcast_bound(self.gamma, self.n, self.m),
            BoundKind::Purify => purification_bound(self.gamma, self.n),
            BoundKind::PhaseConjugate => phase_conj_bound(self.gamma, self.n),
            BoundKind::Amplifier { gain, sign } => amplifier_bound(self.gamma, gain, sign),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.5 - GAMMA_FLOOR_TOL {
        return domain(format!("noise sum must be ≥ 1/2, got {gamma}"));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("number of input copies must be ≥ 1");
    }
    Ok(())
}

/// Minimal per-copy noise for `N → M` broadcasting, `M > N`:
/// `Γ = 1/2 + (γ − 1/2)/N + 1/N − 1/M`.
pub fn broadcast_bound(gamma: f64, n: usize, m: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_n(n)?;
    if m <= n {
        return domain(format!("broadcasting needs M > N, got N={n}, M={m}"));
    }
    let (n, m) = (n as f64, m as f64);
    Ok(0.5 + (gamma - 0.5) / n + 1.0 / n - 1.0 / m)
}

/// Minimal per-copy noise for purification (`M ≤ N`), independent of `M`:
/// `Γ = 1/2 + (γ − 1/2)/N`.
pub fn purification_bound(gamma: f64, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_n(n)?;
    Ok(0.5 + (gamma - 0.5) / n as f64)
}

/// Minimal per-copy noise for phase-conjugating broadcasting or purification,
/// independent of `M`: `Γ = 1/2 + (γ + 1/2)/N`.
pub fn phase_conj_bound(gamma: f64, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_n(n)?;
    Ok(0.5 + (gamma + 0.5) / n as f64)
}

/// Linear-amplifier limit `G·input + |G ∓ 1|/2` (upper sign phase-preserving).
pub fn amplifier_bound(input_sum: f64, gain: f64, sign: AmplifierKind) -> Result<f64> {
    check_gamma(input_sum)?;
    if !gain.is_finite() || gain <= 0.0 {
        return domain(format!("amplifier gain must be > 0, got {gain}"));
    }
    let added = match sign {
        AmplifierKind::PhasePreserving => (gain - 1.0).abs(),
        AmplifierKind::PhaseConjugating => gain + 1.0,
    };
    Ok(gain * input_sum + added / 2.0)
}

/// Thermal photon number above which `N → M` broadcasting lowers the per-copy
/// noise: `(M − N)/(M(N − 1))`. Needs `M > N ≥ 2`.
pub fn superbroadcast_threshold(n: usize, m: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("superbroadcasting needs N ≥ 2, got N={n}"));
    }
    if m <= n {
        return domain(format!("superbroadcasting needs M > N, got N={n}, M={m}"));
    }
    let (n, m) = (n as f64, m as f64);
    Ok((m - n) / (m * (n - 1.0)))
}

/// Outcome of [`check_cauchy_schwarz`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarzReport {
    /// `|⟨bᵢ†bⱼ⟩| − √(⟨bᵢ†bᵢ⟩⟨bⱼ†bⱼ⟩)` for every `i ≠ j`, row-major.
    pub slack: Vec<f64>,
    /// The inequality holds on every pair (within `tol`).
    pub holds: bool,
    /// Every off-diagonal pair meets the inequality with equality.
    pub all_equal: bool,
    pub max_violation: f64,
}

/// Checks `|⟨bᵢ†bⱼ⟩| ≤ √(⟨bᵢ†bᵢ⟩⟨bⱼ†bⱼ⟩)` on full second moments.
///
/// `correlations` holds the connected moments `Cᵢⱼ = ⟨bᵢ†bⱼ⟩ − ⟨bᵢ†⟩⟨bⱼ⟩`;
/// the coherent background `conj(αᵢ)αⱼ` is added back from `amplitudes`.
pub fn check_cauchy_schwarz(
    correlations: &CMatrix,
    amplitudes: &[Complex64],
    tol: f64,
) -> Result<CauchySchwarzReport> {
    let n = correlations.nrows();
    if correlations.ncols() != n || amplitudes.len() != n {
        return domain(format!(
            "correlation matrix {}×{} does not match {} amplitudes",
            correlations.nrows(),
            correlations.ncols(),
            amplitudes.len()
        ));
    }
    let herm = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (correlations[(i, j)] - correlations[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if herm > 1e-10 {
        return domain(format!("correlation matrix not Hermitian ({herm:.3e})"));
    }
    let full = |i: usize, j: usize| correlations[(i, j)] + amplitudes[i].conj() * amplitudes[j];
    let mut slack = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let rhs = (full(i, i).re * full(j, j).re).max(0.0).sqrt();
                slack.push(full(i, j).norm() - rhs);
            }
        }
    }
    let max_violation = slack.iter().cloned().fold(0.0, f64::max);
    Ok(CauchySchwarzReport {
        holds: max_violation <= tol,
        all_equal: !slack.is_empty() && slack.iter().all(|s| s.abs() <= tol),
        max_violation,
        slack,
    })
}
