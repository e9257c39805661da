use faer::{c64, Mat, Side};
use num_complex::Complex64;

use super::{Method, SpectralResult, DENSE_HARD_CAP};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHermitian;

/// Full spectrum by dense Hermitian diagonalization.
pub fn dense_spectrum(h: &SparseHermitian) -> Result<SpectralResult> {
    dense_spectrum_with_cap(h, DENSE_HARD_CAP, 1e-8)
}

pub fn dense_spectrum_with_cap(
    h: &SparseHermitian,
    cap: usize,
    cluster_tol: f64,
) -> Result<SpectralResult> {
    let n = h.dim();
    if n > cap {
        return Err(Error::Size {
            dim: n as u128,
            cap,
        });
    }
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = match h.to_dense_real() {
        Some(m) => {
            let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
            let eig = a
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Numerical(format!("dense diagonalization failed: {e:?}")))?;
            let u = eig.U();
            let vecs = (0..n)
                .map(|c| (0..n).map(|r| Complex64::new(u[(r, c)], 0.0)).collect())
                .collect();
            (eig.S().column_vector().iter().copied().collect(), vecs)
        }
        None => {
            let m = h.to_dense();
            let a = Mat::<c64>::from_fn(n, n, |i, j| m[(i, j)]);
            let eig = a
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Numerical(format!("dense diagonalization failed: {e:?}")))?;
            let u = eig.U();
            let vecs = (0..n)
                .map(|c| (0..n).map(|r| u[(r, c)]).collect())
                .collect();
            (eig.S().column_vector().iter().map(|z| z.re).collect(), vecs)
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("dense diagonalization produced non-finite eigenvalues".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vectors = vectors;
    let eigenvectors = order.iter().map(|&i| std::mem::take(&mut vectors[i])).collect();
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    Ok(SpectralResult::new(
        eigenvalues,
        eigenvectors,
        cluster_tol,
        0,
        Method::Dense,
    ))
}
