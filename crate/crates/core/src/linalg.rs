//! Dense linear-algebra helpers shared by the Gaussian and Fock back ends.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type RMatrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Block-diagonal symplectic form `⊕ₖ [[0, 1], [-1, 0]]` on `n` modes, in
/// interleaved `(x₀, y₀, x₁, y₁, …)` ordering.
pub fn symplectic_form(n: usize) -> RMatrix {
    let mut omega = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Real quadrature representation of a complex mode map `aₖ → Σₗ uₖₗ aₗ`.
///
/// Each entry `u = p + iq` becomes the block `[[p, -q], [q, p]]`, which is
/// what `x + iy → (p + iq)(x + iy)` does to the pair `(x, y)`.
pub fn realify(u: &CMatrix) -> RMatrix {
    let (rows, cols) = u.shape();
    let mut s = RMatrix::zeros(2 * rows, 2 * cols);
    for k in 0..rows {
        for l in 0..cols {
            let z = u[(k, l)];
            s[(2 * k, 2 * l)] = z.re;
            s[(2 * k, 2 * l + 1)] = -z.im;
            s[(2 * k + 1, 2 * l)] = z.im;
            s[(2 * k + 1, 2 * l + 1)] = z.re;
        }
    }
    s
}

/// Smallest eigenvalue of the Hermitian matrix `re + i·im`.
///
/// Uses the real symmetric embedding `[[re, -im], [im, re]]`, whose spectrum is
/// that of the Hermitian matrix with every eigenvalue doubled in multiplicity.
pub fn min_eig_hermitian(re: &RMatrix, im: &RMatrix) -> f64 {
    let n = re.nrows();
    let mut big = RMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(re);
    big.view_mut((n, n), (n, n)).copy_from(re);
    big.view_mut((n, 0), (n, n)).copy_from(im);
    big.view_mut((0, n), (n, n)).copy_from(&(-im));
    // symmetrize away round-off before the eigen solver sees it
    let big = (&big + big.transpose()) * 0.5;
    SymmetricEigen::new(big).eigenvalues.min()
}

/// Entrywise max-abs norm.
pub fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The scaled matrix has 1-norm at most 1/2 and the series is summed until the
/// next term is below machine precision relative to the partial sum, which
/// keeps the result well inside a `1e-12` error budget.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);

    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..64 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
        if norm1(&term) <= f64::EPSILON * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
