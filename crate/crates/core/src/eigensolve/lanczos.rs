use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Method, SolverOptions, SpectralResult};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHermitian;

type Vector = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn scale(x: &mut [Complex64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}

/// Two passes of classical Gram-Schmidt against every set in `against`.
fn orthogonalize(x: &mut [Complex64], against: &[&[Vector]]) {
    for _ in 0..2 {
        for set in against {
            for q in set.iter() {
                let c = dot(q, x);
                axpy(x, -c, q);
            }
        }
    }
}

fn combine(basis: &[Vector], coeffs: impl Iterator<Item = Complex64>) -> Vector {
    let mut out = vec![ZERO; basis[0].len()];
    for (b, c) in basis.iter().zip(coeffs) {
        axpy(&mut out, c, b);
    }
    out
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect()
}

struct Budget {
    used: usize,
    limit: usize,
    best_residual: f64,
}

impl Budget {
    fn spend(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::Convergence {
                iterations: self.limit,
                best_residual: self.best_residual,
            });
        }
        Ok(())
    }
}

/// Lowest `opts.k` eigenpairs by Lanczos with full reorthogonalization.
///
/// Pairs are found one at a time: each converged vector is locked and every
/// later Krylov basis is kept orthogonal to it, which resolves exactly
/// degenerate levels that a single Krylov sequence cannot see. Each search
/// is thick-restarted, keeping the lower half of its Ritz vectors.
pub fn low_lying(h: &SparseHermitian, opts: &SolverOptions) -> Result<SpectralResult> {
    let n = h.dim();
    if opts.k == 0 || n == 0 {
        return Err(Error::Validation("requested zero eigenpairs".into()));
    }
    if !(opts.tol > 0.0) || opts.max_basis < 2 {
        return Err(Error::Validation(
            "solver needs a positive tolerance and a basis of at least 2".into(),
        ));
    }
    let k = opts.k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget {
        used: 0,
        limit: opts.max_matvecs,
        best_residual: f64::INFINITY,
    };
    let mut values = Vec::with_capacity(k);
    let mut locked: Vec<Vector> = Vec::with_capacity(k);
    for _ in 0..k {
        let (value, vector) = lowest_in_complement(h, &locked, opts, &mut rng, &mut budget)?;
        values.push(value);
        locked.push(vector);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = order.iter().map(|&i| std::mem::take(&mut locked[i])).collect();
    Ok(SpectralResult::new(
        eigenvalues,
        eigenvectors,
        opts.cluster_tol,
        budget.used,
        Method::Lanczos,
    ))
}

fn lowest_in_complement(
    h: &SparseHermitian,
    locked: &[Vector],
    opts: &SolverOptions,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Result<(f64, Vector)> {
    let n = h.dim();
    let available = n - locked.len();
    let m_max = opts.max_basis.min(available);
    let mut basis: Vec<Vector> = Vec::with_capacity(m_max);
    let mut images: Vec<Vector> = Vec::with_capacity(m_max);
    let mut t = DMatrix::<Complex64>::zeros(0, 0);
    // Direction to add next; None means "continue the Krylov sequence".
    let mut pending: Option<Vector> = Some(random_vector(rng, n));
    let mut fresh_starts = 0;
    let mut since_check = 0;
    budget.best_residual = f64::INFINITY;

    loop {
        while basis.len() < m_max {
            let mut x = match pending.take() {
                Some(x) => x,
                None => images.last().expect("non-empty basis").clone(),
            };
            let before = norm(&x).max(f64::MIN_POSITIVE);
            orthogonalize(&mut x, &[locked, &basis]);
            let after = norm(&x);
            if after <= 1e-10 * before {
                // invariant subspace reached; restart the sequence elsewhere
                fresh_starts += 1;
                if fresh_starts > 64 {
                    return Err(Error::Numerical(
                        "Krylov sequence keeps breaking down".into(),
                    ));
                }
                pending = Some(random_vector(rng, n));
                continue;
            }
            scale(&mut x, 1.0 / after);
            budget.spend()?;
            let hx = h.apply(&x);
            let m = basis.len();
            let mut grown = DMatrix::<Complex64>::zeros(m + 1, m + 1);
            grown.view_mut((0, 0), (m, m)).copy_from(&t);
            for (i, b) in basis.iter().enumerate() {
                let c = dot(b, &hx);
                grown[(i, m)] = c;
                grown[(m, i)] = c.conj();
            }
            grown[(m, m)] = Complex64::new(dot(&x, &hx).re, 0.0);
            t = grown;
            basis.push(x);
            images.push(hx);
            since_check += 1;
            if since_check >= 8 {
                since_check = 0;
                if let Some(found) = ritz_check(&t, &basis, &images, opts.tol, budget).converged {
                    return Ok(found);
                }
            }
        }

        let check = ritz_check(&t, &basis, &images, opts.tol, budget);
        if let Some(found) = check.converged {
            return Ok(found);
        }
        if basis.len() >= available {
            // The complement is spanned, so what is left of the residual comes
            // from the locked vectors being converged only to `tol`.
            if budget.best_residual <= 10.0 * opts.tol {
                let y0 = check.vectors.column(0);
                let mut x = combine(&basis, y0.iter().copied());
                let xn = norm(&x);
                scale(&mut x, 1.0 / xn);
                return Ok((check.theta, x));
            }
            return Err(Error::Convergence {
                iterations: budget.used,
                best_residual: budget.best_residual,
            });
        }

        // thick restart on the lower half of the Ritz vectors
        let keep = (m_max / 2).max(1);
        let y = &check.vectors;
        let new_basis: Vec<Vector> = (0..keep)
            .map(|j| combine(&basis, y.column(j).iter().copied()))
            .collect();
        let new_images: Vec<Vector> = (0..keep)
            .map(|j| combine(&images, y.column(j).iter().copied()))
            .collect();
        let y_keep = y.columns(0, keep).into_owned();
        t = y_keep.adjoint() * &t * &y_keep;
        t = (&t + t.adjoint()) * Complex64::new(0.5, 0.0);
        basis = new_basis;
        images = new_images;
        pending = Some(check.residual);
        since_check = 0;
    }
}

struct RitzCheck {
    converged: Option<(f64, Vector)>,
    theta: f64,
    /// Ritz coefficient vectors, ascending by Ritz value.
    vectors: DMatrix<Complex64>,
    residual: Vector,
}

fn ritz_check(
    t: &DMatrix<Complex64>,
    basis: &[Vector],
    images: &[Vector],
    tol: f64,
    budget: &mut Budget,
) -> RitzCheck {
    let sym = (t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let m = t.nrows();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::<Complex64>::zeros(m, m);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    let theta = eig.eigenvalues[order[0]];
    let y0 = vectors.column(0);
    let mut x = combine(basis, y0.iter().copied());
    let hx = combine(images, y0.iter().copied());
    let xn = norm(&x);
    scale(&mut x, 1.0 / xn);
    let mut residual = hx;
    scale(&mut residual, 1.0 / xn);
    axpy(&mut residual, Complex64::new(-theta, 0.0), &x);
    let r = norm(&residual);
    budget.best_residual = budget.best_residual.min(r);
    RitzCheck {
        converged: (r <= tol).then_some((theta, x)),
        theta,
        vectors,
        residual,
    }
}
