//! Random valid Gaussian states and the property checks shared by the
//! property suite and the acceptance runner.

#![allow(dead_code)]

use cvbroadcast::bounds::check_cauchy_schwarz;
use cvbroadcast::broadcast::{run_broadcast, MapKind};
use cvbroadcast::gaussian::{AmplifierKind, GaussianChannel, GaussianState, SymplecticMap};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

pub const TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Gate {
    BeamSplitter(f64, usize, usize),
    Phase(f64, usize),
    Squeeze(f64, usize),
    TwoModeSqueeze(f64, usize, usize),
}

fn gate(n: usize) -> BoxedStrategy<Gate> {
    let single = prop_oneof![
        (-3.2..3.2f64, 0..n).prop_map(|(p, i)| Gate::Phase(p, i)),
        (-0.8..0.8f64, 0..n).prop_map(|(r, i)| Gate::Squeeze(r, i)),
    ];
    if n == 1 {
        return single.boxed();
    }
    let pair = (0..n, 1..n).prop_map(move |(i, k)| (i, (i + k) % n));
    prop_oneof![
        single,
        (-3.2..3.2f64, pair.clone()).prop_map(|(t, (i, j))| Gate::BeamSplitter(t, i, j)),
        (-0.6..0.6f64, pair).prop_map(|(r, (i, j))| Gate::TwoModeSqueeze(r, i, j)),
    ]
    .boxed()
}

pub fn build(gates: &[Gate], n: usize) -> SymplecticMap {
    gates.iter().fold(SymplecticMap::identity(n), |acc, g| {
        let next = match *g {
            Gate::BeamSplitter(t, i, j) => SymplecticMap::beam_splitter(t, i, j, n),
            Gate::Phase(p, i) => SymplecticMap::phase_shift(p, i, n),
            Gate::Squeeze(r, i) => SymplecticMap::single_mode_squeezer(r, i, n),
            Gate::TwoModeSqueeze(r, i, j) => SymplecticMap::two_mode_squeezer(r, i, j, n),
        }
        .unwrap();
        next.after(&acc).unwrap()
    })
}

/// Random symplectic map on `n` modes: a product of up to eight elementary gates.
pub fn symplectic(n: usize) -> impl Strategy<Value = SymplecticMap> {
    prop::collection::vec(gate(n), 0..8).prop_map(move |g| build(&g, n))
}

/// `S (⊗ thermal) Sᵀ` with a random mean: a random valid covariance matrix.
pub fn state(n: usize) -> impl Strategy<Value = GaussianState> {
    (
        prop::collection::vec(0.0..2.0f64, n),
        prop::collection::vec(-1.0..1.0f64, 2 * n),
        symplectic(n),
    )
        .prop_map(move |(nbars, mean, s)| {
            let thermal: Vec<GaussianState> = nbars
                .iter()
                .map(|&nb| GaussianState::displaced_thermal(nb, Complex64::new(0.0, 0.0)).unwrap())
                .collect();
            let cov = GaussianState::tensor(&thermal)
                .unwrap()
                .apply_symplectic(&s)
                .unwrap()
                .cov()
                .clone();
            GaussianState::new(DVector::from_vec(mean), cov).unwrap()
        })
}

pub fn any_state() -> impl Strategy<Value = GaussianState> {
    (1usize..=4).prop_flat_map(state)
}

pub fn state_and_map() -> impl Strategy<Value = (GaussianState, SymplecticMap)> {
    (1usize..=4).prop_flat_map(|n| (state(n), symplectic(n)))
}

pub fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn omega(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// `SΩSᵀ = Ω`, and the transformed state still satisfies the uncertainty relation.
pub fn symplectic_invariance(state: &GaussianState, s: &SymplecticMap) -> Check {
    let n = s.n_modes();
    let w = omega(n);
    let res = (s.matrix() * &w * s.matrix().transpose() - &w).abs().max();
    ensure(res < 1e-9 * (1.0 + s.matrix().norm_squared()), || {
        format!("SΩSᵀ − Ω = {res:e}")
    })?;
    let out = state.apply_symplectic(s).map_err(|e| e.to_string())?;
    let min = out.uncertainty_min_eigenvalue();
    ensure(min >= -1e-9, || {
        format!("uncertainty eigenvalue {min:e} after symplectic")
    })?;
    // symplectic eigenvalues are invariant, so det σ is too
    let (d0, d1) = (state.cov().determinant(), out.cov().determinant());
    ensure((d0 - d1).abs() <= 1e-8 * d0.abs().max(1.0), || {
        format!("det σ changed from {d0} to {d1}")
    })
}

/// Amplifier channels of either kind are CP and keep states physical.
pub fn channel_cp(state: &GaussianState, gain: f64, conjugating: bool, mode: usize) -> Check {
    let kind = if conjugating {
        AmplifierKind::PhaseConjugating
    } else {
        AmplifierKind::PhasePreserving
    };
    let ch = GaussianChannel::amplifier(gain, kind).map_err(|e| e.to_string())?;
    let cp = ch.cp_min_eigenvalue();
    ensure(cp >= -TOL, || {
        format!("CP eigenvalue {cp:e} for G={gain}, {kind:?}")
    })?;
    let mode = mode % state.n_modes();
    let out = state
        .apply_channel(&ch, &[mode])
        .map_err(|e| e.to_string())?;
    let min = out.uncertainty_min_eigenvalue();
    ensure(min >= -1e-9, || {
        format!("uncertainty eigenvalue {min:e} after amplifier")
    })?;
    let het = GaussianChannel::heterodyne_prepare(2, gain.sqrt(), conjugating)
        .map_err(|e| e.to_string())?;
    let cp = het.cp_min_eigenvalue();
    ensure(cp >= -TOL, || {
        format!("CP eigenvalue {cp:e} for heterodyne-prepare")
    })?;
    let out = state
        .apply_channel(&het, &[mode])
        .map_err(|e| e.to_string())?;
    let min = out.uncertainty_min_eigenvalue();
    ensure(min >= -1e-9, || {
        format!("uncertainty eigenvalue {min:e} after heterodyne")
    })
}

/// `|⟨bᵢ†bⱼ⟩| ≤ √(⟨bᵢ†bᵢ⟩⟨bⱼ†bⱼ⟩)` on every physical state.
pub fn cauchy_schwarz(state: &GaussianState) -> Check {
    let c = state.pairwise_number_correlations();
    let report = check_cauchy_schwarz(&c, &state.amplitudes(), 1e-9).map_err(|e| e.to_string())?;
    ensure(report.holds, || {
        format!("violation {:e}", report.max_violation)
    })
}

fn circuit_inputs(n: usize, nbar: f64, alpha: Complex64) -> GaussianState {
    let one = GaussianState::displaced_thermal(nbar, alpha).unwrap();
    GaussianState::tensor(&vec![one; n]).unwrap()
}

/// Displacing every input by `β` displaces every output by `β`
/// (or `β*` for phase conjugation) and leaves the covariance alone.
pub fn amplitude_covariance(
    kind: MapKind,
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    beta: Complex64,
) -> Check {
    let circuit = kind.circuit(n, m).map_err(|e| e.to_string())?;
    let base = circuit_inputs(n, nbar, alpha);
    let out = circuit.run(&base).map_err(|e| e.to_string())?;
    let shifted = circuit
        .run(&base.displace_all(beta))
        .map_err(|e| e.to_string())?;
    let b = if kind == MapKind::PhaseConjugate {
        beta.conj()
    } else {
        beta
    };
    let expected = out.displace_all(b);
    let dev = shifted.max_deviation(&expected);
    ensure(dev < TOL, || {
        format!("{kind:?} {n}→{m}: displaced run off by {dev:e}")
    })?;
    let a = if kind == MapKind::PhaseConjugate {
        alpha.conj()
    } else {
        alpha
    };
    for (i, got) in out.amplitudes().iter().enumerate() {
        ensure((got - a).norm() < TOL, || {
            format!("{kind:?} copy {i} amplitude {got}")
        })?;
    }
    Ok(())
}

/// Broadcast outputs are symmetric under mode permutations, all pairwise
/// correlations are equal, and the correlations obey the sum rules
/// `tr C = M(Γ − ½)` and `Σᵢⱼ Cᵢⱼ = M·n̄′`, where `n̄′ = M(n̄+1)/N − 1` is the
/// thermal photon number of the amplified mode.
pub fn broadcast_symmetry(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    perm: &[usize],
) -> Check {
    let r = run_broadcast(n, m, nbar, alpha).map_err(|e| e.to_string())?;
    let permuted = r.output.permute_modes(perm).map_err(|e| e.to_string())?;
    let dev = permuted.max_deviation(&r.output);
    ensure(dev < TOL, || {
        format!("{n}→{m}: permutation {perm:?} moves state by {dev:e}")
    })?;
    let c = &r.correlations;
    let c01 = c[(0, 1)];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                ensure((c[(i, j)] - c01).norm() < TOL, || {
                    format!("C[{i},{j}] ≠ C[0,1]")
                })?;
            }
        }
    }
    let cs = check_cauchy_schwarz(c, &r.output.amplitudes(), 1e-9).map_err(|e| e.to_string())?;
    ensure(cs.holds, || {
        format!("Cauchy-Schwarz violated by {:e}", cs.max_violation)
    })?;
    let trace: f64 = (0..m).map(|i| c[(i, i)].re).sum();
    let want = m as f64 * (r.gamma_out - 0.5);
    ensure((trace - want).abs() < 1e-9, || {
        format!("tr C = {trace}, want {want}")
    })?;
    let total: Complex64 = c.iter().sum();
    let amplified = m as f64 * (nbar + 1.0) / n as f64 - 1.0;
    let want = m as f64 * amplified;
    ensure((total - want).norm() < 1e-9, || {
        format!("Σ C = {total}, want {want}")
    })
}

pub fn permutation(m: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..m).collect::<Vec<_>>()).prop_shuffle()
}
