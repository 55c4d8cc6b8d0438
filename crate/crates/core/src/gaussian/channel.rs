use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{STRUCT_TOL, SYMM_TOL, VACUUM_VARIANCE};
use crate::error::{domain, Error, Result};
use crate::linalg::{max_abs, min_eig_hermitian, symplectic_form, RMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifierKind {
    PhasePreserving,
    PhaseConjugating,
}

/// Gaussian channel from `n` to `m` modes:
/// `mean → X·mean + d`, `cov → X·cov·Xᵀ + Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    x: RMatrix,
    y: RMatrix,
    d: DVector<f64>,
}

impl GaussianChannel {
    /// Checked constructor; rejects asymmetric `Y` and channels that fail
    /// `Y + (i/4)(Ω_m − X Ω_n Xᵀ) ≥ 0`.
    pub fn new(x: RMatrix, y: RMatrix, d: DVector<f64>) -> Result<Self> {
        let (rows, cols) = x.shape();
        if rows == 0 || cols == 0 || rows % 2 != 0 || cols % 2 != 0 {
            return domain(format!("channel X has invalid shape {rows}×{cols}"));
        }
        if y.shape() != (rows, rows) {
            return Err(Error::Dimension {
                expected: rows,
                found: y.nrows(),
            });
        }
        if d.len() != rows {
            return Err(Error::Dimension {
                expected: rows,
                found: d.len(),
            });
        }
        let asym = max_abs(&(&y - y.transpose()));
        if asym > SYMM_TOL {
            return domain(format!("channel noise matrix not symmetric ({asym:.3e})"));
        }
        let ch = Self { x, y, d };
        let min_eig = ch.cp_min_eigenvalue();
        if min_eig < -STRUCT_TOL {
            return domain(format!(
                "channel is not completely positive (min eigenvalue {min_eig:.3e})"
            ));
        }
        Ok(ch)
    }

    pub fn identity(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            x: RMatrix::identity(dim, dim),
            y: RMatrix::zeros(dim, dim),
            d: DVector::zeros(dim),
        }
    }

    /// Quantum-limited single-mode amplifier of power gain `gain`.
    ///
    /// Phase-preserving: `X = √G·I`, `Y = (G−1)/4·I`, adding `(G−1)/2` to the
    /// noise sum. Phase-conjugating: `X = √G·diag(1, −1)`, `Y = (G+1)/4·I`,
    /// adding `(G+1)/2`. Both saturate the linear-amplifier noise limit.
    pub fn amplifier(gain: f64, kind: AmplifierKind) -> Result<Self> {
        if !gain.is_finite() {
            return domain(format!("amplifier gain must be finite, got {gain}"));
        }
        let (flip, added) = match kind {
            AmplifierKind::PhasePreserving => {
                if gain < 1.0 {
                    return domain(format!(
                        "phase-preserving amplifier needs gain ≥ 1, got {gain}"
                    ));
                }
                (1.0, gain - 1.0)
            }
            AmplifierKind::PhaseConjugating => {
                if gain <= 0.0 {
                    return domain(format!(
                        "phase-conjugating amplifier needs gain > 0, got {gain}"
                    ));
                }
                (-1.0, gain + 1.0)
            }
        };
        let g = gain.sqrt();
        let x = RMatrix::from_row_slice(2, 2, &[g, 0.0, 0.0, flip * g]);
        let y = RMatrix::identity(2, 2) * (added / 4.0);
        Ok(Self {
            x,
            y,
            d: DVector::zeros(2),
        })
    }

    /// Heterodyne one mode and prepare `copies` coherent states at
    /// `scale·β` (or `scale·β*` when `conjugate`), `β` being the outcome.
    ///
    /// Heterodyne outcomes carry the mode's quadrature fluctuations plus one
    /// vacuum unit (`1/4` per quadrature); every copy shares that outcome, so
    /// `Y = (1/4)·I + scale²·(1/4)·(J ⊗ I₂)` with `J` the all-ones matrix, and
    /// `X` stacks `scale·I₂` (or `scale·diag(1, −1)`) once per copy.
    pub fn heterodyne_prepare(copies: usize, scale: f64, conjugate: bool) -> Result<Self> {
        if copies == 0 {
            return domain("heterodyne-and-prepare needs at least one output copy");
        }
        if !scale.is_finite() {
            return domain(format!("preparation scale must be finite, got {scale}"));
        }
        let flip = if conjugate { -1.0 } else { 1.0 };
        let dim = 2 * copies;
        let mut x = RMatrix::zeros(dim, 2);
        let mut y = RMatrix::identity(dim, dim) * VACUUM_VARIANCE;
        let shared = scale * scale * VACUUM_VARIANCE;
        for k in 0..copies {
            x[(2 * k, 0)] = scale;
            x[(2 * k + 1, 1)] = flip * scale;
            for l in 0..copies {
                y[(2 * k, 2 * l)] += shared;
                y[(2 * k + 1, 2 * l + 1)] += shared;
            }
        }
        Ok(Self {
            x,
            y,
            d: DVector::zeros(dim),
        })
    }

    pub fn n_in(&self) -> usize {
        self.x.ncols() / 2
    }

    pub fn n_out(&self) -> usize {
        self.x.nrows() / 2
    }

    pub fn x(&self) -> &RMatrix {
        &self.x
    }

    pub fn y(&self) -> &RMatrix {
        &self.y
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// Smallest eigenvalue of `Y + (i/4)(Ω_m − X Ω_n Xᵀ)`.
    pub fn cp_min_eigenvalue(&self) -> f64 {
        let om = symplectic_form(self.n_out());
        let on = symplectic_form(self.n_in());
        let im = (om - &self.x * on * self.x.transpose()) * 0.25;
        min_eig_hermitian(&self.y, &im)
    }
}
