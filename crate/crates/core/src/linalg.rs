//! Small complex linear-algebra helpers shared by the channel, CSI and
//! precoding modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Draws a standard circular complex Gaussian vector, CN(0, I).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Real trace of a (Hermitian) matrix.
pub fn real_trace(a: &CMatrix) -> f64 {
    a.trace().re
}

/// `trace(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `x^H A x` for Hermitian `A` (imaginary round-off dropped).
pub fn quadratic_form(a: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(a * x)).re
}

/// Relative tolerance below which negative eigenvalues are treated as round-off.
pub const PSD_CLIP_TOLERANCE: f64 = 1e-8;

/// Eigen-clipped sampling factor of a Hermitian PSD matrix.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    /// `M x r` factor with `L L^H` equal to the clipped matrix.
    pub factor: CMatrix,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Total magnitude of eigenvalues clipped to zero.
    pub clipped: f64,
}

/// Factors a Hermitian PSD matrix as `L L^H`.
///
/// Eigenvalues in `[-1e-8 * max, 0)` are set to zero, and the remaining
/// spectrum is rescaled so that `trace(L L^H) = trace(A)`. Columns belonging to
/// zero eigenvalues are dropped. Anything more negative is reported as
/// [`Error::NotPsd`].
pub fn psd_factor(a: &CMatrix) -> Result<PsdFactor> {
    let n = a.nrows();
    let trace = real_trace(a);
    if n == 0 || a.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(PsdFactor {
            factor: CMatrix::zeros(n, 0),
            min_eigenvalue: 0.0,
            max_eigenvalue: 0.0,
            clipped: 0.0,
        });
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= 0.0 || min < -PSD_CLIP_TOLERANCE * max {
        return Err(Error::NotPsd { min, max });
    }
    let clipped: f64 = eig.eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let kept: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    let kept_sum: f64 = kept.iter().map(|&i| eig.eigenvalues[i]).sum();
    let rescale = if kept_sum > 0.0 { trace / kept_sum } else { 0.0 };
    let mut factor = CMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let s = (eig.eigenvalues[i] * rescale).sqrt();
        factor.set_column(col, &eig.eigenvectors.column(i).scale(s));
    }
    Ok(PsdFactor {
        factor,
        min_eigenvalue: min,
        max_eigenvalue: max,
        clipped,
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
