use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{
    build_broadcast_circuit, build_phase_conjugate_circuit, build_purify_circuit, CircuitSpec,
};
use crate::bounds;
use crate::error::{domain, Error, Result};
use crate::gaussian::{GaussianState, VACUUM_VARIANCE};
use crate::linalg::{CMatrix, RMatrix};

/// Tolerance for saturation, permutation invariance and the strict
/// superbroadcast comparison.
pub const REPORT_TOL: f64 = 1e-10;

/// Tolerance for "equal amplitudes" and "uncorrelated" checks on inputs.
pub const INPUT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Broadcast,
    Purify,
    PhaseConjugate,
}

impl MapKind {
    pub fn circuit(self, n: usize, m: usize) -> Result<CircuitSpec> {
        match self {
            MapKind::Broadcast => build_broadcast_circuit(n, m),
            MapKind::Purify => build_purify_circuit(n, m),
            MapKind::PhaseConjugate => build_phase_conjugate_circuit(n, m),
        }
    }

    pub fn bound(self, gamma: f64, n: usize, m: usize) -> Result<f64> {
        match self {
            MapKind::Broadcast => bounds::broadcast_bound(gamma, n, m),
            MapKind::Purify => bounds::purification_bound(gamma, n),
            MapKind::PhaseConjugate => bounds::phase_conj_bound(gamma, n),
        }
    }
}

/// Per-copy statistics of a circuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastReport {
    pub kind: MapKind,
    pub n: usize,
    pub m: usize,
    pub alpha_in: Complex64,
    /// Average input noise sum `γ`.
    pub gamma_in: f64,
    pub nbar_in: f64,
    pub per_copy_amplitude: Vec<Complex64>,
    pub per_copy_noise: Vec<f64>,
    /// Per-copy output noise sum `Γ`.
    pub gamma_out: f64,
    pub nbar_out: f64,
    pub bound: f64,
    /// `|Γ − bound| ≤ REPORT_TOL`.
    pub saturated: bool,
    /// `Γ < γ` strictly (beyond `REPORT_TOL`).
    pub superbroadcast: bool,
    /// `|Γ − γ| ≤ REPORT_TOL`: purity unchanged.
    pub at_threshold: bool,
    pub correlations: CMatrix,
    pub output: GaussianState,
}

impl BroadcastReport {
    /// Largest spread of per-copy amplitudes.
    pub fn amplitude_spread(&self) -> f64 {
        let a0 = self.per_copy_amplitude[0];
        self.per_copy_amplitude
            .iter()
            .map(|a| (a - a0).norm())
            .fold(0.0, f64::max)
    }

    pub fn noise_spread(&self) -> f64 {
        let g0 = self.per_copy_noise[0];
        self.per_copy_noise
            .iter()
            .map(|g| (g - g0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |Cᵢⱼ − Cₖₗ|` over all off-diagonal pairs.
    pub fn off_diagonal_spread(&self) -> f64 {
        let n = self.correlations.nrows();
        let off: Vec<Complex64> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.correlations[(i, j)])
            .collect();
        let mut spread: f64 = 0.0;
        for a in &off {
            for b in &off {
                spread = spread.max((a - b).norm());
            }
        }
        spread
    }

    /// The amplitude every copy is expected to carry.
    pub fn expected_amplitude(&self) -> Complex64 {
        match self.kind {
            MapKind::PhaseConjugate => self.alpha_in.conj(),
            _ => self.alpha_in,
        }
    }
}

/// Checks that `input` is a product of modes sharing one amplitude and
/// returns that amplitude and the average noise sum `γ`.
fn validate_input(input: &GaussianState) -> Result<(Complex64, f64)> {
    let n = input.n_modes();
    let amps = input.amplitudes();
    let alpha = amps[0];
    if let Some((i, a)) = amps
        .iter()
        .enumerate()
        .find(|(_, a)| (*a - alpha).norm() > INPUT_TOL)
    {
        return Err(Error::UnequalAmplitudes(format!(
            "mode {i} has amplitude {a}, mode 0 has {alpha}"
        )));
    }
    let cov = input.cov();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let block = cov.view((2 * i, 2 * j), (2, 2));
            if block.amax() > INPUT_TOL {
                return domain(format!("input modes {i} and {j} are correlated"));
            }
        }
    }
    let gamma = (0..n)
        .map(|i| input.mode_stats(i).map(|s| s.noise_sum))
        .sum::<Result<f64>>()?
        / n as f64;
    Ok((alpha, gamma))
}

/// Runs the optimal circuit of `kind` on a general product input.
pub fn run_map(kind: MapKind, m: usize, input: &GaussianState) -> Result<BroadcastReport> {
    let n = input.n_modes();
    let circuit = kind.circuit(n, m)?;
    let (alpha_in, gamma_in) = validate_input(input)?;
    let bound = kind.bound(gamma_in, n, m)?;
    let output = circuit.run(input)?;

    let stats = (0..m)
        .map(|i| output.mode_stats(i))
        .collect::<Result<Vec<_>>>()?;
    let per_copy_amplitude: Vec<Complex64> = stats.iter().map(|s| s.amplitude).collect();
    let per_copy_noise: Vec<f64> = stats.iter().map(|s| s.noise_sum).collect();
    let gamma_out = per_copy_noise.iter().sum::<f64>() / m as f64;

    Ok(BroadcastReport {
        kind,
        n,
        m,
        alpha_in,
        gamma_in,
        nbar_in: gamma_in - 0.5,
        per_copy_amplitude,
        per_copy_noise,
        gamma_out,
        nbar_out: gamma_out - 0.5,
        bound,
        saturated: (gamma_out - bound).abs() <= REPORT_TOL,
        superbroadcast: gamma_out < gamma_in - REPORT_TOL,
        at_threshold: (gamma_out - gamma_in).abs() <= REPORT_TOL,
        correlations: output.pairwise_number_correlations(),
        output,
    })
}

fn thermal_inputs(n: usize, nbar: f64, alpha: Complex64) -> Result<GaussianState> {
    if n == 0 {
        return domain("need at least one input copy");
    }
    let one = GaussianState::displaced_thermal(nbar, alpha)?;
    GaussianState::tensor(&vec![one; n])
}

pub fn run_broadcast_state(m: usize, input: &GaussianState) -> Result<BroadcastReport> {
    run_map(MapKind::Broadcast, m, input)
}

pub fn run_purify_state(m: usize, input: &GaussianState) -> Result<BroadcastReport> {
    run_map(MapKind::Purify, m, input)
}

pub fn run_phase_conjugate_state(m: usize, input: &GaussianState) -> Result<BroadcastReport> {
    run_map(MapKind::PhaseConjugate, m, input)
}

/// `N → M` broadcasting of `N` copies of `D(α)ρ_n̄D†(α)`.
pub fn run_broadcast(n: usize, m: usize, nbar: f64, alpha: Complex64) -> Result<BroadcastReport> {
    if n == 0 || m <= n {
        return domain(format!("broadcasting needs M > N ≥ 1, got N={n}, M={m}"));
    }
    run_broadcast_state(m, &thermal_inputs(n, nbar, alpha)?)
}

pub fn run_purify(n: usize, m: usize, nbar: f64, alpha: Complex64) -> Result<BroadcastReport> {
    if m == 0 || m > n {
        return domain(format!("purification needs 1 ≤ M ≤ N, got N={n}, M={m}"));
    }
    run_purify_state(m, &thermal_inputs(n, nbar, alpha)?)
}

pub fn run_phase_conjugate(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
) -> Result<BroadcastReport> {
    if n == 0 || m == 0 {
        return domain(format!(
            "phase conjugation needs N, M ≥ 1, got N={n}, M={m}"
        ));
    }
    run_phase_conjugate_state(m, &thermal_inputs(n, nbar, alpha)?)
}

/// Closed-form `M`-mode output of optimal broadcasting of `N` displaced
/// thermal states.
///
/// The state is a Gaussian mixture of `|γ⟩^{⊗M}` displaced by `α`, with
/// `E|γ|² = n̄′/M` and `n̄′ = M(n̄ + 1)/N − 1`. Every mode sees the same
/// classical fluctuation, so the covariance is
/// `(1/4)·I + (n̄′/2M)·(J ⊗ I₂)` with `J` the all-ones `M×M` matrix.
pub fn predicted_output_state(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
) -> Result<GaussianState> {
    if n == 0 || m <= n {
        return domain(format!("broadcasting needs M > N ≥ 1, got N={n}, M={m}"));
    }
    if !nbar.is_finite() || nbar < 0.0 {
        return domain(format!(
            "thermal photon number must be finite and ≥ 0, got {nbar}"
        ));
    }
    let nbar_prime = m as f64 * (nbar + 1.0) / n as f64 - 1.0;
    let shared = nbar_prime / (2.0 * m as f64);
    let dim = 2 * m;
    let mean = DVector::from_fn(dim, |k, _| if k % 2 == 0 { alpha.re } else { alpha.im });
    let cov = RMatrix::from_fn(dim, dim, |r, c| {
        let same_quadrature = r % 2 == c % 2;
        let vac = if r == c { VACUUM_VARIANCE } else { 0.0 };
        vac + if same_quadrature { shared } else { 0.0 }
    });
    GaussianState::new(mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_to_three_superbroadcast() {
        let r = run_broadcast(2, 3, 1.0, c(0.3, 0.0)).unwrap();
        assert!((r.nbar_out - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.gamma_out - 7.0 / 6.0).abs() < 1e-12);
        assert!(r.saturated);
        assert!(r.superbroadcast);
        for a in &r.per_copy_amplitude {
            assert!((a - c(0.3, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_cloning() {
        let r = run_broadcast(1, 2, 0.0, c(0.5, -0.2)).unwrap();
        assert!((r.nbar_out - 0.5).abs() < 1e-12);
        assert!(!r.superbroadcast);
    }

    #[test]
    fn purification_is_independent_of_m() {
        for m in 1..=4 {
            let r = run_purify(4, m, 1.0, c(0.2, 0.1)).unwrap();
            assert!((r.nbar_out - 0.25).abs() < 1e-12, "M={m}: {}", r.nbar_out);
            assert!(r.saturated);
            assert!(r.amplitude_spread() < 1e-12);
            assert!((r.per_copy_amplitude[0] - c(0.2, 0.1)).norm() < 1e-12);
        }
        let id = run_purify(1, 1, 0.7, c(0.1, 0.0)).unwrap();
        assert!((id.nbar_out - 0.7).abs() < 1e-15);
        let half = run_purify(2, 1, 1.0, c(0.3, 0.0)).unwrap();
        assert!((half.nbar_out - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equal_n_m_matches_output_formula() {
        // M = N: n̄/N + (M − N)/(MN) = n̄/2
        let r = run_purify(2, 2, 0.8, c(0.0, 0.4)).unwrap();
        assert!((r.nbar_out - 0.4).abs() < 1e-12);
    }

    #[test]
    fn phase_conjugation() {
        let alpha = c(0.3, 0.2);
        for m in 1..=3 {
            let r = run_phase_conjugate(2, m, 1.0, alpha).unwrap();
            assert!((r.gamma_out - 1.5).abs() < 1e-12);
            assert!(r.saturated);
            for a in &r.per_copy_amplitude {
                assert!((a - alpha.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_conjugation_large_n_limit() {
        let r = run_phase_conjugate(400, 1, 1.0, c(0.1, 0.0)).unwrap();
        assert!((r.gamma_out - 0.5).abs() < 1e-2);
    }

    #[test]
    fn unequal_amplitudes_rejected() {
        let input = GaussianState::tensor(&[
            GaussianState::displaced_thermal(0.5, c(0.1, 0.0)).unwrap(),
            GaussianState::displaced_thermal(0.5, c(0.2, 0.0)).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            run_broadcast_state(3, &input),
            Err(Error::UnequalAmplitudes(_))
        ));
    }

    #[test]
    fn unequal_noise_inputs_use_average() {
        let input = GaussianState::tensor(&[
            GaussianState::displaced_thermal(0.2, c(0.1, 0.0)).unwrap(),
            GaussianState::displaced_thermal(1.4, c(0.1, 0.0)).unwrap(),
        ])
        .unwrap();
        let r = run_broadcast_state(5, &input).unwrap();
        assert!((r.gamma_in - 1.3).abs() < 1e-15);
        assert!(r.saturated);
        assert!(r.noise_spread() < REPORT_TOL);
    }

    #[test]
    fn regime_errors() {
        assert!(run_broadcast(2, 2, 1.0, c(0.0, 0.0)).is_err());
        assert!(run_purify(2, 3, 1.0, c(0.0, 0.0)).is_err());
        assert!(run_broadcast(2, 3, -1.0, c(0.0, 0.0)).is_err());
        assert!(predicted_output_state(3, 2, 0.0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn predicted_state_examples() {
        let p = predicted_output_state(2, 3, 1.0, c(0.0, 0.0)).unwrap();
        for i in 0..3 {
            assert!((p.mode_stats(i).unwrap().nbar_eff - 2.0 / 3.0).abs() < 1e-15);
        }
        let p = predicted_output_state(1, 2, 0.0, c(0.3, 0.3)).unwrap();
        let corr = p.pairwise_number_correlations();
        assert!((corr[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((corr[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        let swapped = p.permute_modes(&[1, 0]).unwrap();
        assert_eq!(swapped, p);
    }

    #[test]
    fn circuit_matches_predicted_state() {
        for (n, m) in [(1, 2), (2, 3), (2, 5), (3, 4), (4, 9)] {
            for nbar in [0.0, 0.4, 1.3] {
                let alpha = c(0.35, -0.15);
                let r = run_broadcast(n, m, nbar, alpha).unwrap();
                let p = predicted_output_state(n, m, nbar, alpha).unwrap();
                assert!(r.output.max_deviation(&p) < 1e-10, "({n},{m},{nbar})");
            }
        }
    }

    #[test]
    fn broadcast_correlations_are_flat() {
        let r = run_broadcast(2, 3, 0.5, c(0.2, 0.0)).unwrap();
        assert!(r.off_diagonal_spread() < 1e-10);
        // diagonal equals the off-diagonal value too: every entry is n̄′/M
        let v = r.correlations[(0, 1)];
        for i in 0..3 {
            assert!((r.correlations[(i, i)] - v).norm() < 1e-10);
        }
    }
}
