use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::linalg::{max_abs, realify, symplectic_form, CMatrix, RMatrix};

/// Affine symplectic map `r → S·r + d` on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: RMatrix,
    displacement: DVector<f64>,
}

impl SymplecticMap {
    fn from_matrix(matrix: RMatrix) -> Self {
        let dim = matrix.nrows();
        Self {
            matrix,
            displacement: DVector::zeros(dim),
        }
    }

    /// Checked constructor.
    pub fn new(matrix: RMatrix, displacement: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || matrix.ncols() != dim {
            return domain(format!(
                "symplectic matrix must be square of even size, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        if displacement.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: displacement.len(),
            });
        }
        let map = Self {
            matrix,
            displacement,
        };
        let residual = map.symplectic_residual();
        if residual > super::STRUCT_TOL {
            return domain(format!(
                "matrix is not symplectic (residual {residual:.3e})"
            ));
        }
        Ok(map)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::from_matrix(RMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    /// Passive map from a complex mode transformation `aₖ → Σₗ uₖₗ aₗ`.
    /// `u` must be unitary.
    pub fn from_mode_unitary(u: &CMatrix) -> Result<Self> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return domain("mode transformation must be a nonempty square matrix");
        }
        let dev = (u.adjoint() * u - CMatrix::identity(n, n))
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()));
        if dev > super::STRUCT_TOL {
            return domain(format!(
                "mode transformation not unitary (deviation {dev:.3e})"
            ));
        }
        Ok(Self::from_matrix(realify(u)))
    }

    /// `n`-port multisplitter: `aₖ → n^{-1/2} Σₗ e^{2πikl/n} aₗ`.
    ///
    /// Output mode 0 carries `n^{-1/2} Σₗ aₗ`, so `n` equal amplitudes `α`
    /// concentrate into a single amplitude `√n·α`.
    pub fn multisplitter(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("multisplitter needs at least one mode");
        }
        let norm = 1.0 / (n as f64).sqrt();
        let u = CMatrix::from_fn(n, n, |k, l| {
            let phase = 2.0 * PI * ((k * l) % n) as f64 / n as f64;
            Complex64::from_polar(norm, phase)
        });
        Self::from_mode_unitary(&u)
    }

    /// Beam splitter on modes `(i, j)`:
    /// `aᵢ → cos θ·aᵢ + sin θ·aⱼ`, `aⱼ → −sin θ·aᵢ + cos θ·aⱼ`.
    ///
    /// At `θ = π/4` the means `(α, 0)` become `(α/√2, −α/√2)`.
    pub fn beam_splitter(theta: f64, i: usize, j: usize, n_modes: usize) -> Result<Self> {
        check_pair(i, j, n_modes)?;
        let (s, c) = theta.sin_cos();
        let mut m = RMatrix::identity(2 * n_modes, 2 * n_modes);
        for q in 0..2 {
            m[(2 * i + q, 2 * i + q)] = c;
            m[(2 * i + q, 2 * j + q)] = s;
            m[(2 * j + q, 2 * i + q)] = -s;
            m[(2 * j + q, 2 * j + q)] = c;
        }
        Ok(Self::from_matrix(m))
    }

    /// Two-mode squeezer on `(i, j)`:
    /// `aᵢ → cosh r·aᵢ − sinh r·aⱼ†`, `aⱼ → cosh r·aⱼ − sinh r·aᵢ†`.
    ///
    /// With mode `j` in vacuum this is the quantum-limited phase-insensitive
    /// amplifier of power gain `cosh² r` acting on mode `i`.
    pub fn two_mode_squeezer(r: f64, i: usize, j: usize, n_modes: usize) -> Result<Self> {
        check_pair(i, j, n_modes)?;
        let (ch, sh) = (r.cosh(), r.sinh());
        let mut m = RMatrix::identity(2 * n_modes, 2 * n_modes);
        for (p, q) in [(i, j), (j, i)] {
            m[(2 * p, 2 * p)] = ch;
            m[(2 * p + 1, 2 * p + 1)] = ch;
            // −sinh r · a_q† : x_q → −sinh r, y_q → +sinh r
            m[(2 * p, 2 * q)] = -sh;
            m[(2 * p + 1, 2 * q + 1)] = sh;
        }
        Ok(Self::from_matrix(m))
    }

    /// Phase rotation `aᵢ → e^{iφ}aᵢ`.
    pub fn phase_shift(phi: f64, i: usize, n_modes: usize) -> Result<Self> {
        if i >= n_modes {
            return Err(Error::ModeIndex { index: i, n_modes });
        }
        let (s, c) = phi.sin_cos();
        let mut m = RMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(2 * i, 2 * i)] = c;
        m[(2 * i, 2 * i + 1)] = -s;
        m[(2 * i + 1, 2 * i)] = s;
        m[(2 * i + 1, 2 * i + 1)] = c;
        Ok(Self::from_matrix(m))
    }

    /// Single-mode squeezer `x → e^{−r}x`, `y → e^{r}y` on mode `i`.
    pub fn single_mode_squeezer(r: f64, i: usize, n_modes: usize) -> Result<Self> {
        if i >= n_modes {
            return Err(Error::ModeIndex { index: i, n_modes });
        }
        let mut m = RMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(2 * i, 2 * i)] = (-r).exp();
        m[(2 * i + 1, 2 * i + 1)] = r.exp();
        Ok(Self::from_matrix(m))
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    /// `‖S Ω Sᵀ − Ω‖∞`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        max_abs(&(&self.matrix * &omega * self.matrix.transpose() - omega))
    }

    /// `‖Sᵀ S − I‖∞`; zero for passive maps.
    pub fn orthogonality_residual(&self) -> f64 {
        let dim = self.matrix.nrows();
        max_abs(&(self.matrix.transpose() * &self.matrix - RMatrix::identity(dim, dim)))
    }

    /// `S⁻¹ = −Ω Sᵀ Ω`, with the displacement undone.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.n_modes());
        let inv = -(&omega * self.matrix.transpose() * &omega);
        let displacement = -(&inv * &self.displacement);
        Self {
            matrix: inv,
            displacement,
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &SymplecticMap) -> Result<Self> {
        if first.n_modes() != self.n_modes() {
            return Err(Error::Dimension {
                expected: self.n_modes(),
                found: first.n_modes(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
            displacement: &self.matrix * &first.displacement + &self.displacement,
        })
    }

    /// Lifts this map onto `targets` of an `n_modes` system, identity elsewhere.
    pub fn embed(&self, targets: &[usize], n_modes: usize) -> Result<Self> {
        if targets.len() != self.n_modes() {
            return Err(Error::Dimension {
                expected: self.n_modes(),
                found: targets.len(),
            });
        }
        for (k, &t) in targets.iter().enumerate() {
            if t >= n_modes {
                return Err(Error::ModeIndex { index: t, n_modes });
            }
            if targets[..k].contains(&t) {
                return domain(format!("mode {t} listed twice"));
            }
        }
        let mut m = RMatrix::identity(2 * n_modes, 2 * n_modes);
        let mut d = DVector::zeros(2 * n_modes);
        for &ta in targets {
            for q in 0..2 {
                m[(2 * ta + q, 2 * ta + q)] = 0.0;
            }
        }
        for (a, &ta) in targets.iter().enumerate() {
            for (b, &tb) in targets.iter().enumerate() {
                let block = self.matrix.view((2 * a, 2 * b), (2, 2));
                m.view_mut((2 * ta, 2 * tb), (2, 2)).copy_from(&block);
            }
            d[2 * ta] = self.displacement[2 * a];
            d[2 * ta + 1] = self.displacement[2 * a + 1];
        }
        Ok(Self {
            matrix: m,
            displacement: d,
        })
    }
}

fn check_pair(i: usize, j: usize, n_modes: usize) -> Result<()> {
    for idx in [i, j] {
        if idx >= n_modes {
            return Err(Error::ModeIndex {
                index: idx,
                n_modes,
            });
        }
    }
    if i == j {
        return domain(format!(
            "two-mode operation needs distinct modes, got {i} twice"
        ));
    }
    Ok(())
}
