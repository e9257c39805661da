//! Low-lying spectra: a dense oracle, a deflated Lanczos solver for large
//! bases, and closed-form levels and determinants of the single-qubit chain.

mod chain;
mod dense;
mod lanczos;

pub use chain::*;
pub use dense::*;
pub use lanczos::*;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::hamiltonian::SparseHermitian;

/// Largest dimension the dense path accepts.
pub const DENSE_HARD_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::Lanczos => "lanczos",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal, one per eigenvalue.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Number of eigenvalues within the cluster tolerance of the lowest.
    pub ground_manifold_dim: usize,
    /// First eigenvalue above the ground cluster minus the lowest, when resolved.
    pub gap: Option<f64>,
    /// Operator applications (zero for the dense path).
    pub matvecs: usize,
    pub method: Method,
}

impl SpectralResult {
    pub(crate) fn new(
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<Complex64>>,
        cluster_tol: f64,
        matvecs: usize,
        method: Method,
    ) -> Self {
        let e0 = eigenvalues.first().copied().unwrap_or(0.0);
        let ground_manifold_dim = eigenvalues
            .iter()
            .take_while(|&&e| e - e0 <= cluster_tol)
            .count()
            .max(1);
        let gap = eigenvalues.get(ground_manifold_dim).map(|e| e - e0);
        SpectralResult {
            eigenvalues,
            eigenvectors,
            ground_manifold_dim,
            gap,
            matvecs,
            method,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[Complex64] {
        &self.eigenvectors[0]
    }

    /// Keeps the lowest `k` pairs.
    pub fn truncated(mut self, k: usize, cluster_tol: f64) -> Self {
        self.eigenvalues.truncate(k);
        self.eigenvectors.truncate(k);
        SpectralResult::new(
            self.eigenvalues,
            self.eigenvectors,
            cluster_tol,
            self.matvecs,
            self.method,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Number of lowest eigenpairs requested.
    pub k: usize,
    /// Residual tolerance `|Hv - Ev|` (absolute, energy units).
    pub tol: f64,
    /// Dimensions up to this use the dense path.
    pub dense_cutoff: usize,
    pub seed: u64,
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    /// Operator application budget for the whole solve.
    pub max_matvecs: usize,
    /// Eigenvalues this close to the lowest belong to the ground manifold.
    pub cluster_tol: f64,
}

impl SolverOptions {
    /// Defaults scaled to the hopping energy `epsilon`.
    pub fn for_epsilon(epsilon: f64) -> Self {
        SolverOptions {
            k: 1,
            tol: 1e-10 * epsilon,
            dense_cutoff: 1024,
            seed: 0x5eed,
            max_basis: 64,
            max_matvecs: 200_000,
            cluster_tol: 1e-8 * epsilon,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions::for_epsilon(1.0)
    }
}

/// Lowest `opts.k` eigenpairs, dense when the dimension allows it.
pub fn solve(h: &SparseHermitian, opts: &SolverOptions) -> Result<SpectralResult> {
    if h.dim() <= opts.dense_cutoff.min(DENSE_HARD_CAP) {
        Ok(dense_spectrum_with_cap(h, DENSE_HARD_CAP, opts.cluster_tol)?
            .truncated(opts.k, opts.cluster_tol))
    } else {
        low_lying(h, opts)
    }
}

/// Like [`solve`] but keeps asking for more pairs until an eigenvalue above
/// the ground cluster is resolved, so `gap` is always set.
pub fn solve_with_gap(h: &SparseHermitian, opts: &SolverOptions) -> Result<SpectralResult> {
    let mut o = opts.clone();
    o.k = o.k.max(2).min(h.dim());
    let mut matvecs = 0;
    loop {
        let mut res = solve(h, &o)?;
        matvecs += res.matvecs;
        res.matvecs = matvecs;
        if res.gap.is_some() || o.k >= h.dim() {
            return Ok(res);
        }
        o.k = (2 * o.k).min(h.dim());
    }
}

/// `max_i |H v_i - E_i v_i|`.
pub fn max_residual(h: &SparseHermitian, res: &SpectralResult) -> f64 {
    res.eigenvalues
        .iter()
        .zip(&res.eigenvectors)
        .map(|(&e, v)| {
            let hv = h.apply(v);
            hv.iter()
                .zip(v)
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Largest `|<v_i|v_j> - δ_ij|`.
pub fn orthonormality_defect(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}
