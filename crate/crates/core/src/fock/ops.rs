use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{expm, CMatrix};

/// Extra Fock levels carried while exponentiating generators that do not
/// conserve photon number, so that the kept matrix elements are converged.
const WORK_PAD: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateLabel {
    Displacement,
    BeamSplitter,
    Squeezer,
}

/// Truncated unitary `P_out U P_in` between per-mode cutoffs.
///
/// Matrix elements are those of the untruncated unitary, so `V†V ≤ I` and
/// exact unitarity only holds away from the truncation boundary; whatever
/// leaks past the output cutoffs shows up as trace deficit downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct FockGate {
    label: GateLabel,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    matrix: CMatrix,
}

/// Truncated annihilation operator, `(a)ₙ,ₙ₊₁ = √(n+1)`.
pub fn ladder(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 0..d.saturating_sub(1) {
        a[(n, n + 1)] = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    a
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return domain("Fock cutoffs must be ≥ 1");
    }
    Ok(())
}

fn warn_occupation(label: &str, predicted: f64, cutoff: usize) {
    if predicted > cutoff as f64 / 3.0 {
        log::warn!(
            "{label}: predicted occupation {predicted:.3} exceeds cutoff/3 = {:.3}; truncation error likely",
            cutoff as f64 / 3.0
        );
    }
}

impl FockGate {
    pub fn label(&self) -> GateLabel {
        self.label
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `‖V†V − I‖∞` for square gates.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.ncols();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n))
            .iter()
            .fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `D(α) = exp(αa† − α*a)` on a single mode with `d` levels.
    pub fn displacement(alpha: Complex64, d: usize) -> Result<Self> {
        Self::displacement_between(alpha, d, d)
    }

    pub fn displacement_between(alpha: Complex64, d_in: usize, d_out: usize) -> Result<Self> {
        check_dims(&[d_in, d_out])?;
        warn_occupation("displacement", alpha.norm_sqr(), d_out);
        let w = d_in.max(d_out) + WORK_PAD;
        let a = ladder(w);
        let generator = a.adjoint() * alpha - &a * alpha.conj();
        let full = expm(&generator);
        Ok(Self {
            label: GateLabel::Displacement,
            in_dims: vec![d_in],
            out_dims: vec![d_out],
            matrix: full.view((0, 0), (d_out, d_in)).into_owned(),
        })
    }

    /// Beam splitter `exp(θ(a†b − ab†))` on `d`-level modes `(a, b)`, which in
    /// the Heisenberg picture sends `a → cos θ·a + sin θ·b`.
    pub fn beam_splitter(theta: f64, d: usize) -> Result<Self> {
        Self::beam_splitter_between(theta, [d, d], [d, d])
    }

    /// The generator conserves `n_a + n_b`, so each total-photon block is
    /// exponentiated exactly in its full `(N+1)`-dimensional space.
    pub fn beam_splitter_between(theta: f64, d_in: [usize; 2], d_out: [usize; 2]) -> Result<Self> {
        check_dims(&d_in)?;
        check_dims(&d_out)?;
        let mut v = CMatrix::zeros(d_out[0] * d_out[1], d_in[0] * d_in[1]);
        let max_total = (d_in[0] + d_in[1] - 2).min(d_out[0] + d_out[1] - 2);
        for total in 0..=max_total {
            // basis |n, total − n⟩, n = 0..=total
            let dim = total + 1;
            let mut g = CMatrix::zeros(dim, dim);
            for n in 0..total {
                let m = total - n;
                // a†b |n, m⟩ = √(n+1)√m |n+1, m−1⟩
                let amp = ((n + 1) as f64 * m as f64).sqrt() * theta;
                g[(n + 1, n)] += Complex64::new(amp, 0.0);
                g[(n, n + 1)] -= Complex64::new(amp, 0.0);
            }
            let u = expm(&g);
            for n_in in 0..dim {
                let m_in = total - n_in;
                if n_in >= d_in[0] || m_in >= d_in[1] {
                    continue;
                }
                for n_out in 0..dim {
                    let m_out = total - n_out;
                    if n_out >= d_out[0] || m_out >= d_out[1] {
                        continue;
                    }
                    v[(n_out * d_out[1] + m_out, n_in * d_in[1] + m_in)] = u[(n_out, n_in)];
                }
            }
        }
        Ok(Self {
            label: GateLabel::BeamSplitter,
            in_dims: d_in.to_vec(),
            out_dims: d_out.to_vec(),
            matrix: v,
        })
    }

    /// Two-mode squeezer `exp(r(ab − a†b†))`, which in the Heisenberg picture
    /// sends `a → cosh r·a − sinh r·b†`.
    pub fn squeezer(r: f64, d: usize) -> Result<Self> {
        Self::squeezer_between(r, [d, d], [d, d])
    }

    /// The generator conserves `n_a − n_b`; each block is exponentiated on a
    /// padded working space and the requested corner kept.
    pub fn squeezer_between(r: f64, d_in: [usize; 2], d_out: [usize; 2]) -> Result<Self> {
        check_dims(&d_in)?;
        check_dims(&d_out)?;
        warn_occupation("squeezer", r.sinh().powi(2), d_out[0].min(d_out[1]));
        let w = d_in.iter().chain(&d_out).copied().max().unwrap_or(1) + WORK_PAD;
        let mut v = CMatrix::zeros(d_out[0] * d_out[1], d_in[0] * d_in[1]);
        for diff in -(w as isize - 1)..=(w as isize - 1) {
            // basis |k + s, s⟩ with k = diff ≥ 0, or |s, s − k⟩ for k < 0
            let off_a = diff.max(0) as usize;
            let off_b = (-diff).max(0) as usize;
            let dim = w - off_a.max(off_b);
            let mut g = CMatrix::zeros(dim, dim);
            for s in 0..dim - 1 {
                let (na, nb) = (off_a + s, off_b + s);
                // a†b† |na, nb⟩ = √(na+1)√(nb+1) |na+1, nb+1⟩
                let amp = ((na + 1) as f64 * (nb + 1) as f64).sqrt() * r;
                g[(s + 1, s)] -= Complex64::new(amp, 0.0);
                g[(s, s + 1)] += Complex64::new(amp, 0.0);
            }
            let u = expm(&g);
            for s_in in 0..dim {
                let (na, nb) = (off_a + s_in, off_b + s_in);
                if na >= d_in[0] || nb >= d_in[1] {
                    continue;
                }
                for s_out in 0..dim {
                    let (ma, mb) = (off_a + s_out, off_b + s_out);
                    if ma >= d_out[0] || mb >= d_out[1] {
                        continue;
                    }
                    v[(ma * d_out[1] + mb, na * d_in[1] + nb)] = u[(s_out, s_in)];
                }
            }
        }
        Ok(Self {
            label: GateLabel::Squeezer,
            in_dims: d_in.to_vec(),
            out_dims: d_out.to_vec(),
            matrix: v,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockDensity;
    use std::f64::consts::PI;

    fn ket_density(dims: &[usize], amps: &[(usize, Complex64)]) -> FockDensity {
        let total: usize = dims.iter().product();
        let mut psi = nalgebra::DVector::<Complex64>::zeros(total);
        for &(i, a) in amps {
            psi[i] = a;
        }
        FockDensity::new(dims.to_vec(), &psi * psi.adjoint()).unwrap()
    }

    #[test]
    fn zero_displacement_is_identity() {
        let g = FockGate::displacement(Complex64::new(0.0, 0.0), 7).unwrap();
        assert!((g.matrix() - CMatrix::identity(7, 7))
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = Complex64::new(0.6, -0.3);
        let d = 25;
        let g = FockGate::displacement(alpha, d).unwrap();
        // ⟨n|α⟩ = e^{−|α|²/2} αⁿ/√n!
        let mut expected = (-alpha.norm_sqr() / 2.0).exp();
        for n in 0..d {
            let got = g.matrix()[(n, 0)];
            assert!(
                (got - alpha.powu(n as u32) * expected).norm() < 1e-13,
                "n={n}"
            );
            expected /= ((n + 1) as f64).sqrt();
        }
    }

    #[test]
    fn beam_splitter_on_single_photon() {
        let d = 4;
        let g = FockGate::beam_splitter(PI / 4.0, d).unwrap();
        // unitary on the block with fewer than d photons in total
        let low: Vec<usize> = (0..d * d).filter(|i| i / d + i % d < d).collect();
        for &i in &low {
            for &j in &low {
                let dot: Complex64 = g.matrix().column(i).dotc(&g.matrix().column(j));
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((dot - delta).norm() < 1e-14);
            }
        }
        assert!(g.unitarity_defect() > 1e-3);
        let one_zero = d;
        let zero_one = 1;
        let r = 1.0 / 2f64.sqrt();
        assert!((g.matrix()[(one_zero, one_zero)].re - r).abs() < 1e-14);
        assert!((g.matrix()[(zero_one, one_zero)].re + r).abs() < 1e-14);
        for i in 0..d * d {
            if i != one_zero && i != zero_one {
                assert!(g.matrix()[(i, one_zero)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn squeezed_vacuum_photon_number() {
        let (r, d) = (0.5_f64, 20);
        let g = FockGate::squeezer(r, d).unwrap();
        let vac = FockDensity::vacuum(&[d, d]).unwrap();
        let out = vac.apply(&g, &[0, 1]).unwrap();
        assert!((out.photon_number(0).unwrap() - r.sinh().powi(2)).abs() < 1e-10);
        assert!((out.photon_number(1).unwrap() - r.sinh().powi(2)).abs() < 1e-10);
        // two-mode squeezed vacuum: Σ (−tanh r)ⁿ/cosh r |n, n⟩
        let c = out.matrix()[(d + 1, 0)];
        let expected = -r.tanh() / r.cosh().powi(2);
        assert!((c.re - expected).abs() < 1e-12);
    }

    #[test]
    fn squeezer_amplifies_like_gaussian() {
        // coherent ⊗ vacuum through cosh² r = 2: amplitude √2·α on mode a
        let alpha = Complex64::new(0.3, 0.1);
        let r = 2f64.sqrt().acosh();
        // mode a ends up with n̄ = 1; the photons lost above 30 levels bias the
        // noise by ~Σ_{n≥30} n·2⁻ⁿ ≈ 6e−8 per mode
        let d = 30;
        let input = ket_density(&[d], &[(0, Complex64::new(1.0, 0.0))])
            .apply(&FockGate::displacement(alpha, d).unwrap(), &[0])
            .unwrap()
            .tensor(&FockDensity::vacuum(&[d]).unwrap());
        let out = input
            .apply(&FockGate::squeezer(r, d).unwrap(), &[0, 1])
            .unwrap();
        let st = out.mode_stats(0).unwrap();
        assert!((st.amplitude - alpha * 2f64.sqrt()).norm() < 1e-7, "{st:?}");
        assert!((st.noise_sum - 1.5).abs() < 1e-6);
    }

    #[test]
    fn rectangular_beam_splitter_matches_square() {
        let sq = FockGate::beam_splitter(0.4, 6).unwrap();
        let rect = FockGate::beam_splitter_between(0.4, [6, 6], [8, 3]).unwrap();
        for n in 0..6 {
            for m in 0..6 {
                for p in 0..6 {
                    for q in 0..3 {
                        let a = sq.matrix()[(p * 6 + q, n * 6 + m)];
                        let b = rect.matrix()[(p * 3 + q, n * 6 + m)];
                        assert!((a - b).norm() < 1e-14);
                    }
                }
            }
        }
    }
}
