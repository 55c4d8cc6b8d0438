use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GaussianChannel, SymplecticMap, STRUCT_TOL, SYMM_TOL, VACUUM_VARIANCE};
use crate::error::{domain, Error, Result};
use crate::linalg::{max_abs, min_eig_hermitian, symplectic_form, CMatrix, RMatrix};

/// First and second moments of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    /// `⟨a⟩`
    pub amplitude: Complex64,
    /// `Δx² + Δy²`
    pub noise_sum: f64,
    /// `⟨a†a⟩ − |⟨a⟩|²`, always `noise_sum − 1/2`.
    pub nbar_eff: f64,
}

impl ModeStats {
    pub fn new(amplitude: Complex64, noise_sum: f64) -> Self {
        Self {
            amplitude,
            noise_sum,
            nbar_eff: noise_sum - 0.5,
        }
    }
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: RMatrix,
}

impl GaussianState {
    /// Checked constructor: the covariance must be symmetric and satisfy the
    /// uncertainty relation `cov + (i/4)Ω ≥ 0`.
    pub fn new(mean: DVector<f64>, cov: RMatrix) -> Result<Self> {
        if mean.is_empty() || !mean.len().is_multiple_of(2) {
            return domain(format!(
                "mean vector length {} is not 2·n_modes",
                mean.len()
            ));
        }
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension {
                expected: mean.len(),
                found: cov.nrows(),
            });
        }
        let asym = max_abs(&(&cov - cov.transpose()));
        if asym > SYMM_TOL {
            return domain(format!(
                "covariance not symmetric (max deviation {asym:.3e})"
            ));
        }
        let state = Self {
            n_modes: mean.len() / 2,
            mean,
            cov,
        };
        let min_eig = state.uncertainty_min_eigenvalue();
        if min_eig < -STRUCT_TOL {
            return domain(format!(
                "covariance violates the uncertainty relation (min eigenvalue {min_eig:.3e})"
            ));
        }
        Ok(state)
    }

    /// Assembles a state whose invariants are guaranteed by construction,
    /// scrubbing round-off asymmetry.
    pub(crate) fn from_parts(mean: DVector<f64>, cov: RMatrix) -> Self {
        let cov = (&cov + cov.transpose()) * 0.5;
        Self {
            n_modes: mean.len() / 2,
            mean,
            cov,
        }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_parts(
            DVector::zeros(2 * n_modes),
            RMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        )
    }

    /// `D(α) ρ_n̄ D†(α)`: mean `(Re α, Im α)`, covariance `(n̄/2 + 1/4)·I₂`.
    pub fn displaced_thermal(nbar: f64, alpha: Complex64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return domain(format!(
                "thermal photon number must be finite and ≥ 0, got {nbar}"
            ));
        }
        Ok(Self::from_parts(
            DVector::from_vec(vec![alpha.re, alpha.im]),
            RMatrix::identity(2, 2) * (nbar / 2.0 + VACUUM_VARIANCE),
        ))
    }

    /// Product state with block-diagonal covariance.
    pub fn tensor(states: &[GaussianState]) -> Result<Self> {
        if states.is_empty() {
            return domain("cannot tensor an empty list of states");
        }
        let dim: usize = states.iter().map(|s| 2 * s.n_modes).sum();
        let mut mean = DVector::zeros(dim);
        let mut cov = RMatrix::zeros(dim, dim);
        let mut off = 0;
        for s in states {
            let d = 2 * s.n_modes;
            mean.rows_mut(off, d).copy_from(&s.mean);
            cov.view_mut((off, off), (d, d)).copy_from(&s.cov);
            off += d;
        }
        Ok(Self::from_parts(mean, cov))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &RMatrix {
        &self.cov
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.n_modes {
            return Err(Error::ModeIndex {
                index: i,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    /// Smallest eigenvalue of `cov + (i/4)Ω`; non-negative for physical states.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let im = symplectic_form(self.n_modes) * 0.25;
        min_eig_hermitian(&self.cov, &im)
    }

    pub fn amplitude(&self, i: usize) -> Result<Complex64> {
        self.check_mode(i)?;
        Ok(Complex64::new(self.mean[2 * i], self.mean[2 * i + 1]))
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        (0..self.n_modes)
            .map(|i| Complex64::new(self.mean[2 * i], self.mean[2 * i + 1]))
            .collect()
    }

    pub fn mode_stats(&self, i: usize) -> Result<ModeStats> {
        self.check_mode(i)?;
        let noise = self.cov[(2 * i, 2 * i)] + self.cov[(2 * i + 1, 2 * i + 1)];
        Ok(ModeStats::new(self.amplitude(i)?, noise))
    }

    /// `Cᵢⱼ = ⟨bᵢ†bⱼ⟩ − ⟨bᵢ†⟩⟨bⱼ⟩`.
    ///
    /// With `b = x + iy` the fluctuation part of `bᵢ†bⱼ` is
    /// `cov[xᵢxⱼ] + cov[yᵢyⱼ] + i(cov[xᵢyⱼ] − cov[yᵢxⱼ])` for `i ≠ j`. On the
    /// diagonal the operator ordering contributes `i⟨[x, y]⟩ = −1/2`, so
    /// `Cᵢᵢ = Δx² + Δy² − 1/2`. No further scaling is needed.
    pub fn pairwise_number_correlations(&self) -> CMatrix {
        let n = self.n_modes;
        CMatrix::from_fn(n, n, |i, j| {
            let c = &self.cov;
            let re = c[(2 * i, 2 * j)] + c[(2 * i + 1, 2 * j + 1)];
            let im = c[(2 * i, 2 * j + 1)] - c[(2 * i + 1, 2 * j)];
            let offset = if i == j { 0.5 } else { 0.0 };
            Complex64::new(re - offset, im)
        })
    }

    /// `Σᵢ ⟨aᵢ†aᵢ⟩`.
    pub fn total_photon_number(&self) -> f64 {
        let fluct: f64 = (0..2 * self.n_modes).map(|k| self.cov[(k, k)]).sum();
        fluct - 0.5 * self.n_modes as f64 + self.mean.norm_squared()
    }

    pub fn apply_symplectic(&self, map: &SymplecticMap) -> Result<Self> {
        if map.n_modes() != self.n_modes {
            return Err(Error::Dimension {
                expected: self.n_modes,
                found: map.n_modes(),
            });
        }
        let s = map.matrix();
        let mean = s * &self.mean + map.displacement();
        let cov = s * &self.cov * s.transpose();
        Ok(Self::from_parts(mean, cov))
    }

    /// Applies `channel` to the ordered `targets`.
    ///
    /// When the channel has as many outputs as inputs, the outputs replace the
    /// targets in place. Otherwise the untouched modes keep their order and the
    /// channel outputs are appended after them.
    pub fn apply_channel(&self, channel: &GaussianChannel, targets: &[usize]) -> Result<Self> {
        if targets.len() != channel.n_in() {
            return Err(Error::Dimension {
                expected: channel.n_in(),
                found: targets.len(),
            });
        }
        for (k, &t) in targets.iter().enumerate() {
            self.check_mode(t)?;
            if targets[..k].contains(&t) {
                return domain(format!("target mode {t} listed twice"));
            }
        }
        let rest: Vec<usize> = (0..self.n_modes).filter(|i| !targets.contains(i)).collect();
        // output mode index for each channel output
        let out_slots: Vec<usize>;
        let rest_slots: Vec<usize>;
        let n_out_total = rest.len() + channel.n_out();
        if channel.n_out() == channel.n_in() {
            out_slots = targets.to_vec();
            rest_slots = rest.clone();
        } else {
            rest_slots = (0..rest.len()).collect();
            out_slots = (rest.len()..n_out_total).collect();
        }

        let mut x = RMatrix::zeros(2 * n_out_total, 2 * self.n_modes);
        let mut y = RMatrix::zeros(2 * n_out_total, 2 * n_out_total);
        let mut d = DVector::zeros(2 * n_out_total);
        for (&src, &dst) in rest.iter().zip(&rest_slots) {
            x[(2 * dst, 2 * src)] = 1.0;
            x[(2 * dst + 1, 2 * src + 1)] = 1.0;
        }
        for (o, &dst) in out_slots.iter().enumerate() {
            for (t, &src) in targets.iter().enumerate() {
                let block = channel.x().view((2 * o, 2 * t), (2, 2));
                x.view_mut((2 * dst, 2 * src), (2, 2)).copy_from(&block);
            }
            for (o2, &dst2) in out_slots.iter().enumerate() {
                let block = channel.y().view((2 * o, 2 * o2), (2, 2));
                y.view_mut((2 * dst, 2 * dst2), (2, 2)).copy_from(&block);
            }
            d[2 * dst] = channel.d()[2 * o];
            d[2 * dst + 1] = channel.d()[2 * o + 1];
        }
        let mean = &x * &self.mean + d;
        let cov = &x * &self.cov * x.transpose() + y;
        Ok(Self::from_parts(mean, cov))
    }

    /// Appends `k` vacuum modes.
    pub fn add_vacuum(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self::tensor(&[self.clone(), Self::vacuum(k)]).expect("nonempty")
    }

    /// Reduced state on `keep`, in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return domain("partial trace must keep at least one mode");
        }
        for (k, &i) in keep.iter().enumerate() {
            self.check_mode(i)?;
            if keep[..k].contains(&i) {
                return domain(format!("mode {i} listed twice"));
            }
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&r| self.mean[r]));
        let cov = RMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(Self::from_parts(mean, cov))
    }

    /// Reorders modes so that output mode `k` is input mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_modes {
            return Err(Error::Dimension {
                expected: self.n_modes,
                found: perm.len(),
            });
        }
        self.partial_trace(perm)
    }

    /// Displaces mode `i` by `beta`.
    pub fn displace(&self, i: usize, beta: Complex64) -> Result<Self> {
        self.check_mode(i)?;
        let mut mean = self.mean.clone();
        mean[2 * i] += beta.re;
        mean[2 * i + 1] += beta.im;
        Ok(Self::from_parts(mean, self.cov.clone()))
    }

    /// Displaces every mode by `beta`.
    pub fn displace_all(&self, beta: Complex64) -> Self {
        let mut mean = self.mean.clone();
        for i in 0..self.n_modes {
            mean[2 * i] += beta.re;
            mean[2 * i + 1] += beta.im;
        }
        Self::from_parts(mean, self.cov.clone())
    }

    /// Largest entrywise difference in mean and covariance.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        if self.n_modes != other.n_modes {
            return f64::INFINITY;
        }
        let dm = (&self.mean - &other.mean).amax();
        dm.max(max_abs(&(&self.cov - &other.cov)))
    }
}
