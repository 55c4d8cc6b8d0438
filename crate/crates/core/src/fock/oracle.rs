//! Brute-force re-runs of the optimal circuits on truncated Fock-space
//! density matrices.
//!
//! Inputs and output copies live on `cutoff` levels per mode. The single
//! concentrated (and amplified) mode carries many more photons than any copy,
//! so it is held on a larger working cutoff. A Gaussian shadow of the same
//! circuit runs alongside to drive the size/occupation guards and to predict
//! how much probability truncation should cost; the quantities being checked
//! (moments and fidelities of the copies) come from the Fock matrices only.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fidelity, FockDensity, FockGate};
use crate::broadcast::MapKind;
use crate::error::{domain, Error, Result};
use crate::gaussian::{GaussianState, ModeStats, SymplecticMap};
use crate::linalg::CMatrix;

/// Hard cap on the Hilbert-space dimension of any live density matrix.
pub const MAX_STATE_DIM: usize = 20_736;
/// Hard cap on simultaneously live modes.
pub const MAX_LIVE_MODES: usize = 4;
/// Minimum Monte-Carlo sample count for the phase-conjugation oracle.
pub const MIN_SAMPLES: usize = 10_000;

/// Fock levels used beyond `cutoff` when preparing thermal inputs, so that the
/// kept block is the exact projection of the untruncated state.
const PREP_PAD: usize = 60;
/// Rounding allowance in the occupation guard.
const GUARD_SLACK: f64 = 1e-9;
/// Points per axis of the heterodyne outcome grid.
const Q_GRID: usize = 400;
/// Half-width of the outcome grid in units of the outcome standard deviation.
const Q_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Levels per input/output mode.
    pub cutoff: usize,
    /// Levels for the concentrated/amplified mode; `None` means `2·cutoff`.
    pub working_cutoff: Option<usize>,
    /// Largest acceptable `1 − tr ρ` at the output.
    pub deficit_budget: f64,
    pub samples: usize,
    pub seed: u64,
}

impl OracleOptions {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }

    fn working(&self) -> usize {
        self.working_cutoff.unwrap_or(2 * self.cutoff)
    }
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            cutoff: 10,
            working_cutoff: None,
            deficit_budget: 5e-3,
            samples: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCopy {
    pub stats: ModeStats,
    /// Uhlmann fidelity against the predicted displaced thermal state.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: MapKind,
    pub n: usize,
    pub m: usize,
    pub nbar: f64,
    pub alpha: Complex64,
    pub cutoff: usize,
    pub working_cutoff: usize,
    pub copies: Vec<OracleCopy>,
    /// Closed-form per-copy amplitude and noise.
    pub predicted: ModeStats,
    /// `1 − tr ρ` of the output copies.
    pub trace_deficit: f64,
    /// Union bound on truncation loss summed over stages.
    pub predicted_tail: f64,
    pub samples: Option<usize>,
    /// Standard error of the Monte-Carlo noise estimate.
    pub noise_stderr: Option<f64>,
    /// Standard error of the Monte-Carlo amplitude estimate, `√(E|β − ⟨β⟩|²/S)`.
    pub amplitude_stderr: Option<f64>,
}

impl OracleReport {
    pub fn max_noise_error(&self) -> f64 {
        self.copies
            .iter()
            .map(|c| (c.stats.noise_sum - self.predicted.noise_sum).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_amplitude_error(&self) -> f64 {
        self.copies
            .iter()
            .map(|c| (c.stats.amplitude - self.predicted.amplitude).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.copies.iter().map(|c| c.fidelity).fold(1.0, f64::min)
    }

    /// Noise tolerance: `5e−3` (or `3×` the observed deficit, whichever is
    /// larger) for the deterministic oracles, `1e−2` for Monte-Carlo.
    pub fn noise_tolerance(&self) -> f64 {
        match self.samples {
            Some(_) => 1e-2,
            None => (5e-3_f64).max(3.0 * self.trace_deficit),
        }
    }

    pub fn amplitude_tolerance(&self) -> f64 {
        1e-2 * (1.0 + self.alpha.norm())
    }

    pub fn passes(&self, min_fidelity: f64) -> bool {
        self.max_noise_error() <= self.noise_tolerance()
            && self.max_amplitude_error() <= self.amplitude_tolerance()
            && self.min_fidelity() >= min_fidelity
    }
}

/// `P_d D(α) ρ_n̄ D†(α) P_d`: the exact projection of a displaced thermal
/// state onto `d` levels.
pub fn displaced_thermal_fock(nbar: f64, alpha: Complex64, d: usize) -> Result<FockDensity> {
    let wide = d + PREP_PAD;
    let thermal = FockDensity::thermal(nbar, wide)?;
    thermal.apply(&FockGate::displacement_between(alpha, wide, d)?, &[0])
}

/// Uhlmann fidelity of a truncated single-mode copy to the predicted displaced
/// thermal state. The copy is not renormalized, so its truncation loss shows up
/// as roughly `1 − 2·deficit`.
fn fidelity_to_prediction(copy: &FockDensity, predicted: &ModeStats) -> Result<f64> {
    let target = displaced_thermal_fock(predicted.nbar_eff, predicted.amplitude, copy.dims()[0])?;
    fidelity(copy, &target)
}

/// Probability that a displaced thermal state has `≥ d` photons.
fn displaced_thermal_tail(nbar: f64, alpha: Complex64, d: usize) -> Result<f64> {
    Ok((1.0 - displaced_thermal_fock(nbar.max(0.0), alpha, d)?.trace()).max(0.0))
}

/// Fock state with its Gaussian shadow.
struct Shadowed {
    fock: FockDensity,
    gauss: GaussianState,
    cutoff: usize,
    predicted_tail: f64,
}

impl Shadowed {
    fn input(nbar: f64, alpha: Complex64, opts: &OracleOptions) -> Result<Self> {
        let mut s = Self {
            fock: displaced_thermal_fock(nbar, alpha, opts.cutoff)?,
            gauss: GaussianState::displaced_thermal(nbar, alpha)?,
            cutoff: opts.cutoff,
            predicted_tail: 0.0,
        };
        s.account()?;
        Ok(s)
    }

    fn guard_dims(&self, dims: &[usize]) -> Result<()> {
        if dims.len() > MAX_LIVE_MODES {
            return Err(Error::ResourceGuard(format!(
                "{} live modes exceed the limit of {MAX_LIVE_MODES}",
                dims.len()
            )));
        }
        let total: usize = dims.iter().product();
        if total > MAX_STATE_DIM {
            return Err(Error::ResourceGuard(format!(
                "state dimension {total} ({dims:?}) exceeds {MAX_STATE_DIM}; lower the cutoff or the number of copies"
            )));
        }
        Ok(())
    }

    /// Occupation guard and per-stage tail bookkeeping on the current state.
    fn account(&mut self) -> Result<()> {
        let limit = self.cutoff as f64 / 3.0;
        for (i, &d) in self.fock.dims().to_vec().iter().enumerate() {
            let st = self.gauss.mode_stats(i)?;
            let occupation = st.nbar_eff + st.amplitude.norm_sqr();
            if occupation >= limit - GUARD_SLACK {
                return Err(Error::ResourceGuard(format!(
                    "predicted occupation {occupation:.4} of a live mode reaches cutoff/3 = {limit:.4}; \
                     raise the cutoff above {:.0}",
                    3.0 * occupation
                )));
            }
            self.predicted_tail += displaced_thermal_tail(st.nbar_eff, st.amplitude, d)?;
        }
        Ok(())
    }

    fn append(&mut self, other: Shadowed) -> Result<()> {
        let mut dims = self.fock.dims().to_vec();
        dims.extend_from_slice(other.fock.dims());
        self.guard_dims(&dims)?;
        self.fock = self.fock.tensor(&other.fock);
        self.gauss = GaussianState::tensor(&[self.gauss.clone(), other.gauss])?;
        self.predicted_tail += other.predicted_tail;
        Ok(())
    }

    fn append_vacuum(&mut self) -> Result<()> {
        let mut dims = self.fock.dims().to_vec();
        dims.push(1);
        self.guard_dims(&dims)?;
        self.fock = self.fock.tensor(&FockDensity::vacuum(&[1])?);
        self.gauss = self.gauss.add_vacuum(1);
        Ok(())
    }

    fn out_dims(&self, i: usize, j: usize, out: [usize; 2]) -> Vec<usize> {
        let mut dims = self.fock.dims().to_vec();
        dims[i] = out[0];
        dims[j] = out[1];
        dims
    }

    fn beam_splitter(&mut self, theta: f64, i: usize, j: usize, out: [usize; 2]) -> Result<()> {
        self.guard_dims(&self.out_dims(i, j, out))?;
        let dims = self.fock.dims();
        let gate = FockGate::beam_splitter_between(theta, [dims[i], dims[j]], out)?;
        self.fock = self.fock.apply(&gate, &[i, j])?;
        let n = self.gauss.n_modes();
        self.gauss = self
            .gauss
            .apply_symplectic(&SymplecticMap::beam_splitter(theta, i, j, n)?)?;
        self.account()
    }

    fn squeezer(&mut self, r: f64, i: usize, j: usize, out: [usize; 2]) -> Result<()> {
        self.guard_dims(&self.out_dims(i, j, out))?;
        let dims = self.fock.dims();
        let gate = FockGate::squeezer_between(r, [dims[i], dims[j]], out)?;
        self.fock = self.fock.apply(&gate, &[i, j])?;
        let n = self.gauss.n_modes();
        self.gauss = self
            .gauss
            .apply_symplectic(&SymplecticMap::two_mode_squeezer(r, i, j, n)?)?;
        self.account()
    }

    fn discard(&mut self, mode: usize) -> Result<()> {
        let keep: Vec<usize> = (0..self.fock.n_modes()).filter(|&k| k != mode).collect();
        self.fock = self.fock.reduced(&keep)?;
        self.gauss = self.gauss.partial_trace(&keep)?;
        Ok(())
    }
}

/// Concentrates `n` displaced thermal inputs into one mode on the working
/// cutoff: each new input is mixed with the running sum on a beam splitter
/// with `cos θ = 1/√(k+1)` and the difference port is dropped.
fn concentrate(n: usize, nbar: f64, alpha: Complex64, opts: &OracleOptions) -> Result<Shadowed> {
    let mut acc = Shadowed::input(nbar, alpha, opts)?;
    for k in 1..n {
        let mut next = Shadowed::input(nbar, alpha, opts)?;
        next.append(acc)?;
        let theta = (1.0 / ((k + 1) as f64).sqrt()).acos();
        next.beam_splitter(theta, 0, 1, [opts.working(), opts.cutoff])?;
        next.discard(1)?;
        acc = next;
    }
    Ok(acc)
}

/// Splits mode 0 evenly over `copies` modes with a beam-splitter cascade and
/// keeps the first `keep` of them. Step `k` leaves `1/√(copies−k)` of the
/// carrier on copy `k`; negative angles keep every copy in phase.
fn distribute(
    state: &mut Shadowed,
    copies: usize,
    keep: usize,
    opts: &OracleOptions,
) -> Result<()> {
    let steps = keep.min(copies - 1);
    for k in 0..steps {
        state.append_vacuum()?;
        let theta = -(1.0 / ((copies - k) as f64).sqrt()).acos();
        let carrier_dim = if k + 2 == copies {
            opts.cutoff
        } else {
            opts.working()
        };
        state.beam_splitter(theta, k, k + 1, [opts.cutoff, carrier_dim])?;
    }
    if keep < copies {
        // drop the carrier of the remaining copies
        state.discard(keep)?;
    }
    Ok(())
}

fn check_common(nbar: f64, alpha: Complex64, opts: &OracleOptions) -> Result<()> {
    if !nbar.is_finite() || nbar < 0.0 {
        return domain(format!(
            "thermal photon number must be finite and ≥ 0, got {nbar}"
        ));
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return domain("amplitude must be finite");
    }
    if opts.cutoff < 2 || opts.working() < opts.cutoff {
        return domain(format!(
            "need cutoff ≥ 2 and working cutoff ≥ cutoff, got {} and {}",
            opts.cutoff,
            opts.working()
        ));
    }
    Ok(())
}

/// What was asked of an oracle run.
#[derive(Clone, Copy)]
struct Case {
    kind: MapKind,
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
}

fn finish(
    case: Case,
    opts: &OracleOptions,
    state: Shadowed,
    predicted: ModeStats,
) -> Result<OracleReport> {
    let Case {
        kind,
        n,
        m,
        nbar,
        alpha,
    } = case;
    let deficit = state.fock.trace_deficit();
    if deficit > opts.deficit_budget {
        return Err(Error::DeficitBudget {
            deficit,
            budget: opts.deficit_budget,
        });
    }
    let copies = (0..m)
        .map(|i| {
            let copy = state.fock.reduced(&[i])?;
            Ok(OracleCopy {
                stats: copy.mode_stats(0)?,
                fidelity: fidelity_to_prediction(&copy, &predicted)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        kind,
        n,
        m,
        nbar,
        alpha,
        cutoff: opts.cutoff,
        working_cutoff: opts.working(),
        copies,
        predicted,
        trace_deficit: deficit,
        predicted_tail: state.predicted_tail,
        samples: None,
        noise_stderr: None,
        amplitude_stderr: None,
    })
}

/// Fock-space run of the optimal `N → M` broadcasting circuit (`M ≥ N`), with
/// the amplifier realised as a two-mode squeezer on a vacuum ancilla.
pub fn oracle_broadcast(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    check_common(nbar, alpha, opts)?;
    if !(1..=2).contains(&n) || m < n || m > 3 {
        return Err(Error::ResourceGuard(format!(
            "broadcast oracle supports 1 ≤ N ≤ 2, N ≤ M ≤ 3; got N={n}, M={m}"
        )));
    }
    let mut state = concentrate(n, nbar, alpha, opts)?;
    let gain = m as f64 / n as f64;
    if gain > 1.0 {
        state.append_vacuum()?;
        let r = gain.sqrt().acosh();
        state.squeezer(r, 0, 1, [opts.working(), opts.working()])?;
        state.discard(1)?;
    }
    distribute(&mut state, m, m, opts)?;
    let nbar_out = nbar / n as f64 + (m - n) as f64 / (m * n) as f64;
    finish(
        Case {
            kind: MapKind::Broadcast,
            n,
            m,
            nbar,
            alpha,
        },
        opts,
        state,
        ModeStats::new(alpha, nbar_out + 0.5),
    )
}

/// Fock-space run of the optimal purification circuit (`M ≤ N`).
pub fn oracle_purify(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    check_common(nbar, alpha, opts)?;
    if !(1..=3).contains(&n) || m == 0 || m > n || m > 2 {
        return Err(Error::ResourceGuard(format!(
            "purify oracle supports 1 ≤ M ≤ N ≤ 3, M ≤ 2; got N={n}, M={m}"
        )));
    }
    let mut state = concentrate(n, nbar, alpha, opts)?;
    distribute(&mut state, n, m, opts)?;
    finish(
        Case {
            kind: MapKind::Purify,
            n,
            m,
            nbar,
            alpha,
        },
        opts,
        state,
        ModeStats::new(alpha, nbar / n as f64 + 0.5),
    )
}

/// `⟨n|β⟩` for `n < d`.
fn coherent_ket(beta: Complex64, d: usize) -> nalgebra::DVector<Complex64> {
    let mut v = nalgebra::DVector::zeros(d);
    let mut c = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for k in 0..d {
        v[k] = c;
        c = c * beta / ((k + 1) as f64).sqrt();
    }
    v
}

/// `Q(β) = ⟨β|ρ|β⟩/π` for a single-mode density matrix.
fn husimi(rho: &CMatrix, beta: Complex64) -> f64 {
    let d = rho.nrows();
    let v = coherent_ket(beta, d);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..d {
            row += rho[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re / std::f64::consts::PI
}

/// Monte-Carlo run of heterodyne-and-prepare phase conjugation.
///
/// Heterodyne outcomes are drawn from the Husimi function of the concentrated
/// mode, tabulated on a grid from its Fock density matrix; each outcome
/// `α_o` prepares `M` coherent states `|α_o*/√N⟩`.
pub fn oracle_phase_conjugate(
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    check_common(nbar, alpha, opts)?;
    if !(1..=2).contains(&n) || !(1..=2).contains(&m) {
        return Err(Error::ResourceGuard(format!(
            "phase-conjugation oracle supports N, M ≤ 2; got N={n}, M={m}"
        )));
    }
    if opts.samples < MIN_SAMPLES {
        return Err(Error::Samples(format!(
            "{} samples requested, at least {MIN_SAMPLES} are needed for a 1e-2 noise tolerance",
            opts.samples
        )));
    }
    let state = concentrate(n, nbar, alpha, opts)?;
    let rho = state.fock.matrix();
    let conc = state.fock.mode_stats(0)?;

    let sigma = (conc.noise_sum / 2.0 + 0.25).sqrt();
    let half = Q_SPAN * sigma;
    let h = 2.0 * half / Q_GRID as f64;
    let origin = conc.amplitude - Complex64::new(half, half);
    let weights: Vec<f64> = (0..Q_GRID * Q_GRID)
        .into_par_iter()
        .map(|cell| {
            let (ix, iy) = (cell / Q_GRID, cell % Q_GRID);
            let beta = origin + Complex64::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
            husimi(rho, beta).max(0.0) * h * h
        })
        .collect();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for w in &weights {
        total += w;
        cdf.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = 1.0 / (n as f64).sqrt();
    let mut prepared = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let u = rng.random::<f64>() * total;
        let cell = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
        let (ix, iy) = (cell / Q_GRID, cell % Q_GRID);
        let outcome = origin
            + Complex64::new(
                (ix as f64 + rng.random::<f64>()) * h,
                (iy as f64 + rng.random::<f64>()) * h,
            );
        prepared.push(outcome.conj() * scale);
    }

    let count = prepared.len() as f64;
    let mean: Complex64 = prepared.iter().sum::<Complex64>() / count;
    let dev2: Vec<f64> = prepared.iter().map(|b| (b - mean).norm_sqr()).collect();
    let spread = dev2.iter().sum::<f64>() / count;
    let spread_var = dev2.iter().map(|x| (x - spread).powi(2)).sum::<f64>() / (count - 1.0);
    let stats = ModeStats::new(mean, 0.5 + spread);

    // Per-copy density matrix: the outcome average of |β⟩⟨β|, integrated over
    // the same grid rather than sampled, so the fidelity carries no
    // Monte-Carlo noise. Rows are summed in order to stay bit-reproducible.
    let d = opts.cutoff;
    let rows: Vec<CMatrix> = (0..Q_GRID)
        .into_par_iter()
        .map(|ix| {
            let mut acc = CMatrix::zeros(d, d);
            for iy in 0..Q_GRID {
                let w = weights[ix * Q_GRID + iy];
                if w == 0.0 {
                    continue;
                }
                let outcome = origin + Complex64::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
                let v = coherent_ket(outcome.conj() * scale, d);
                acc += (&v * v.adjoint()) * Complex64::new(w / total, 0.0);
            }
            acc
        })
        .collect();
    let copy = rows.iter().fold(CMatrix::zeros(d, d), |acc, r| acc + r);
    let copy = FockDensity::new(vec![d], copy)?;

    let gamma_in = nbar + 0.5;
    let predicted = ModeStats::new(alpha.conj(), 0.5 + (gamma_in + 0.5) / n as f64);
    // the outcome grid carries mass tr ρ of the concentrated mode, so its
    // deficit enters once, through that matrix
    let deficit = copy.trace_deficit() + state.fock.trace_deficit();
    if deficit > opts.deficit_budget {
        return Err(Error::DeficitBudget {
            deficit,
            budget: opts.deficit_budget,
        });
    }
    let fid = fidelity_to_prediction(&copy, &predicted)?;
    Ok(OracleReport {
        kind: MapKind::PhaseConjugate,
        n,
        m,
        nbar,
        alpha,
        cutoff: opts.cutoff,
        working_cutoff: opts.working(),
        copies: vec![
            OracleCopy {
                stats,
                fidelity: fid
            };
            m
        ],
        predicted,
        trace_deficit: deficit,
        predicted_tail: state.predicted_tail,
        samples: Some(opts.samples),
        noise_stderr: Some((spread_var / count).sqrt()),
        amplitude_stderr: Some((spread / count).sqrt()),
    })
}
