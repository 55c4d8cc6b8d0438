use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::FockGate;
use crate::error::{domain, Error, Result};
use crate::gaussian::ModeStats;
use crate::linalg::CMatrix;

/// Truncated Fock-space density matrix.
///
/// Mode `k` keeps levels `0..dims[k]`; basis states are ordered
/// lexicographically with mode 0 most significant. The matrix is never
/// renormalised, so `1 − tr ρ` is the probability lost to truncation so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    dims: Vec<usize>,
    rho: CMatrix,
}

/// Mixed-radix index helpers for lexicographic multi-indices.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// `map[new_index] = old_index` when modes are reordered to `order`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; order.len()];
    for _ in 0..total {
        map.push(
            digits
                .iter()
                .zip(order)
                .map(|(&d, &k)| d * old_strides[k])
                .sum(),
        );
        // increment the mixed-radix counter, last digit fastest
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < new_dims[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    map
}

fn permute(rho: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let map = permutation_map(dims, order);
    let n = map.len();
    CMatrix::from_fn(n, n, |r, c| rho[(map[r], map[c])])
}

fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (pos, &k) in order.iter().enumerate() {
        inv[k] = pos;
    }
    inv
}

impl FockDensity {
    /// Wraps a matrix after checking its size against `dims`.
    pub fn new(dims: Vec<usize>, rho: CMatrix) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return domain("every mode needs at least one Fock level");
        }
        let total: usize = dims.iter().product();
        if rho.nrows() != total || rho.ncols() != total {
            return Err(Error::Dimension {
                expected: total,
                found: rho.nrows(),
            });
        }
        Ok(Self { dims, rho })
    }

    /// Thermal state `ρ_n̄` with levels `0..cutoff`:
    /// `pₙ = (n̄/(n̄+1))ⁿ/(n̄+1)`, losing `(n̄/(n̄+1))^cutoff` to truncation.
    pub fn thermal(nbar: f64, cutoff: usize) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return domain(format!(
                "thermal photon number must be finite and ≥ 0, got {nbar}"
            ));
        }
        if cutoff < 2 {
            return domain(format!("Fock cutoff must be ≥ 2, got {cutoff}"));
        }
        let q = nbar / (nbar + 1.0);
        let mut rho = CMatrix::zeros(cutoff, cutoff);
        let mut p = 1.0 / (nbar + 1.0);
        for n in 0..cutoff {
            rho[(n, n)] = Complex64::new(p, 0.0);
            p *= q;
        }
        Ok(Self {
            dims: vec![cutoff],
            rho,
        })
    }

    /// `|0…0⟩⟨0…0|` on modes with the given cutoffs.
    pub fn vacuum(dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut rho = CMatrix::zeros(total, total);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::new(dims.to_vec(), rho)
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Levels kept by the largest mode.
    pub fn cutoff(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Probability lost to truncation: `1 − tr ρ`.
    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint())
            .iter()
            .fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.dims.len() {
            return Err(Error::ModeIndex {
                index: i,
                n_modes: self.dims.len(),
            });
        }
        Ok(())
    }

    pub fn tensor(&self, other: &FockDensity) -> FockDensity {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        FockDensity {
            dims,
            rho: self.rho.kronecker(&other.rho),
        }
    }

    /// Reorders modes so that new mode `k` is old mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.dims.len()];
        if order.len() != self.dims.len() {
            return Err(Error::Dimension {
                expected: self.dims.len(),
                found: order.len(),
            });
        }
        for &k in order {
            self.check_mode(k)?;
            if std::mem::replace(&mut seen[k], true) {
                return domain(format!("mode {k} listed twice"));
            }
        }
        Ok(Self {
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            rho: permute(&self.rho, &self.dims, order),
        })
    }

    /// Partial trace onto `keep`, in the listed order.
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return domain("reduced state must keep at least one mode");
        }
        for (k, &i) in keep.iter().enumerate() {
            self.check_mode(i)?;
            if keep[..k].contains(&i) {
                return domain(format!("mode {i} listed twice"));
            }
        }
        let rest: Vec<usize> = (0..self.dims.len()).filter(|i| !keep.contains(i)).collect();
        let mut order = keep.to_vec();
        order.extend_from_slice(&rest);
        let p = permute(&self.rho, &self.dims, &order);
        let kept: usize = keep.iter().map(|&i| self.dims[i]).product();
        let traced: usize = rest.iter().map(|&i| self.dims[i]).product();
        let rho = CMatrix::from_fn(kept, kept, |a, b| {
            (0..traced)
                .map(|r| p[(a * traced + r, b * traced + r)])
                .sum()
        });
        Ok(Self {
            dims: keep.iter().map(|&i| self.dims[i]).collect(),
            rho,
        })
    }

    /// `ρ → (I ⊗ V) ρ (I ⊗ V)†` with `V` acting on `targets` (in order).
    pub fn apply(&self, gate: &FockGate, targets: &[usize]) -> Result<Self> {
        if targets.len() != gate.in_dims().len() {
            return Err(Error::Dimension {
                expected: gate.in_dims().len(),
                found: targets.len(),
            });
        }
        for (k, &t) in targets.iter().enumerate() {
            self.check_mode(t)?;
            if targets[..k].contains(&t) {
                return domain(format!("mode {t} listed twice"));
            }
            if self.dims[t] != gate.in_dims()[k] {
                return Err(Error::Dimension {
                    expected: gate.in_dims()[k],
                    found: self.dims[t],
                });
            }
        }
        let rest: Vec<usize> = (0..self.dims.len())
            .filter(|i| !targets.contains(i))
            .collect();
        let mut order = rest.clone();
        order.extend_from_slice(targets);
        let p = permute(&self.rho, &self.dims, &order);

        let v = gate.matrix();
        let (dout, din) = v.shape();
        let blocks: usize = rest.iter().map(|&i| self.dims[i]).product();
        let v_adj = v.adjoint();

        let mut left = CMatrix::zeros(blocks * dout, blocks * din);
        for b in 0..blocks {
            let rows = p.rows(b * din, din);
            left.rows_mut(b * dout, dout).copy_from(&(v * rows));
        }
        let mut both = CMatrix::zeros(blocks * dout, blocks * dout);
        for b in 0..blocks {
            let cols = left.columns(b * din, din);
            both.columns_mut(b * dout, dout).copy_from(&(cols * &v_adj));
        }

        let mut permuted_dims: Vec<usize> = rest.iter().map(|&i| self.dims[i]).collect();
        permuted_dims.extend_from_slice(gate.out_dims());
        let back = inverse_order(&order);
        let dims: Vec<usize> = back.iter().map(|&pos| permuted_dims[pos]).collect();
        Ok(Self {
            rho: permute(&both, &permuted_dims, &back),
            dims,
        })
    }

    /// `⟨a⟩`, `⟨a†a⟩` read off the single-mode reduction of mode `i`.
    ///
    /// Moments are taken on the unnormalised matrix; the noise sum uses
    /// `Δx² + Δy² = 1/2 + ⟨a†a⟩ − |⟨a⟩|²`.
    pub fn mode_stats(&self, i: usize) -> Result<ModeStats> {
        self.check_mode(i)?;
        let single = if self.dims.len() == 1 {
            self.rho.clone()
        } else {
            self.reduced(&[i])?.rho
        };
        let d = single.nrows();
        let mut amp = Complex64::new(0.0, 0.0);
        let mut number = 0.0;
        for n in 0..d {
            number += n as f64 * single[(n, n)].re;
            if n + 1 < d {
                amp += single[(n + 1, n)] * ((n + 1) as f64).sqrt();
            }
        }
        Ok(ModeStats::new(amp, 0.5 + number - amp.norm_sqr()))
    }

    pub fn photon_number(&self, i: usize) -> Result<f64> {
        let s = self.mode_stats(i)?;
        Ok(s.nbar_eff + s.amplitude.norm_sqr())
    }

    pub fn total_photon_number(&self) -> f64 {
        let st = strides(&self.dims);
        (0..self.rho.nrows())
            .map(|idx| {
                let n: usize = (0..self.dims.len())
                    .map(|k| (idx / st[k]) % self.dims[k])
                    .sum();
                n as f64 * self.rho[(idx, idx)].re
            })
            .sum()
    }
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let roots = eig
        .eigenvalues
        .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &FockDensity, sigma: &FockDensity) -> Result<f64> {
    if rho.dims != sigma.dims {
        return domain(format!(
            "fidelity needs matching cutoffs, got {:?} and {:?}",
            rho.dims, sigma.dims
        ));
    }
    let s = psd_sqrt(&rho.rho);
    let inner = &s * &sigma.rho * &s;
    let h = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let root_sum: f64 = SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}
