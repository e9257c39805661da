//! Exact levels of a single qubit chain.
//!
//! With single-qubit gates only, a chain of `N + 1` rows splits (after
//! undoing the gates column-wise) into two identical paths of `N + 1` sites.
//! Each path is `ε` times a graph Laplacian, with its last site's operators
//! scaled by `β` when the chain is tipped. All determinants below use the
//! variable `x = cos θ = 1 - E/2ε` and Chebyshev polynomials of the second
//! kind, which stay finite where the exponential form `k = e^{iθ}` is 0/0.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_energy(e: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(0.0..=4.0 * epsilon).contains(&e) {
        return Err(Error::Domain(format!(
            "energy {e} outside the oscillatory range [0, {}]",
            4.0 * epsilon
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// `(U_{n-1}(x), U_{n-2}(x))` with `U_{-1} = 0`.
fn chebyshev_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `U_{n-1}(x) + (β² - 1) U_{n-2}(x)`: the determinant of a tipped path with
/// the zero mode divided out.
fn reduced(n: usize, x: f64, beta: f64) -> f64 {
    let (u1, u2) = chebyshev_pair(n, x);
    u1 + (beta * beta - 1.0) * u2
}

/// Levels of an untipped path of `n` sites: `2ε(1 - cos(πk/n))`, `k = 0..n`.
pub fn path_levels(n: usize, epsilon: f64) -> Vec<f64> {
    (0..n)
        .map(|k| 2.0 * epsilon * (1.0 - (PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Physical spectrum of one qubit chain with `N` steps: every level of the
/// `N + 1` site path, twice. These are `E_m = 2ε(1 - cos(πm/2(N+1)))` for
/// even `m` only.
pub fn analytic_levels(num_steps: usize, epsilon: f64) -> Vec<f64> {
    path_levels(num_steps + 1, epsilon)
        .into_iter()
        .flat_map(|e| [e, e])
        .collect()
}

/// `E_m = 2ε(1 - cos(πm/2(N+1)))` for every `m = 0..=2N+1`: the zeros of
/// [`closed_form_det`]. Odd `m` are not levels of the chain.
pub fn closed_form_roots(num_steps: usize, epsilon: f64) -> Vec<f64> {
    path_levels(2 * (num_steps + 1), epsilon)
}

/// `det(H - E)` for a path of `n` sites whose last site is tipped by `beta`:
/// `-2 ε^n (1 - x) [U_{n-1}(x) + (β² - 1) U_{n-2}(x)]`.
pub fn path_char_det(n: usize, e: f64, epsilon: f64, beta: f64) -> Result<f64> {
    check_energy(e, epsilon)?;
    check_beta(beta)?;
    if n == 0 {
        return Err(Error::Domain("path needs at least one site".into()));
    }
    let x = 1.0 - e / (2.0 * epsilon);
    Ok(-2.0 * epsilon.powi(n as i32) * (1.0 - x) * reduced(n, x, beta))
}

/// Determinant of one column path (`N + 1` sites). Changes sign at each
/// nonzero level, so it is the one to bracket.
pub fn column_char_det(e: f64, num_steps: usize, epsilon: f64, beta: f64) -> Result<f64> {
    path_char_det(num_steps + 1, e, epsilon, beta)
}

/// `det(H - E)` of the full two-column single-qubit chain, the square of
/// [`column_char_det`]. Its zeros are exactly the chain's levels.
pub fn char_det(e: f64, num_steps: usize, epsilon: f64, beta: f64) -> Result<f64> {
    let c = column_char_det(e, num_steps, epsilon, beta)?;
    Ok(c * c)
}

/// The closed form written as one path of `2(N+1)` sites with a tipped end.
/// For `β = 1` its zeros are all of [`closed_form_roots`].
pub fn closed_form_det(e: f64, num_steps: usize, epsilon: f64, beta: f64) -> Result<f64> {
    path_char_det(2 * (num_steps + 1), e, epsilon, beta)
}

/// All `2(N + 1)` levels of a tipped single-qubit chain, ascending.
///
/// Roots of the reduced column determinant are bracketed on a grid in
/// `θ ∈ (0, π)` and bisected; `E = 0` is added by hand.
pub fn solve_tipped_levels(num_steps: usize, epsilon: f64, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if num_steps == 0 || !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "need N >= 1 and epsilon > 0 (got N = {num_steps}, epsilon = {epsilon})"
        )));
    }
    let n = num_steps + 1;
    let g = |theta: f64| reduced(n, theta.cos(), beta);
    let mut points = 32 * n;
    for _ in 0..5 {
        let grid: Vec<f64> = (0..=points).map(|i| PI * i as f64 / points as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
        let mut roots = Vec::with_capacity(n - 1);
        for i in 0..points {
            let (a, b) = (grid[i], grid[i + 1]);
            let (fa, fb) = (values[i], values[i + 1]);
            if i > 0 && fa == 0.0 {
                roots.push(a);
            } else if fa * fb < 0.0 {
                roots.push(bisect(&g, a, b, fa));
            }
        }
        if roots.len() == n - 1 {
            let mut levels: Vec<f64> = std::iter::once(0.0)
                .chain(roots.iter().map(|t| 2.0 * epsilon * (1.0 - t.cos())))
                .flat_map(|e| [e, e])
                .collect();
            levels.sort_by(f64::total_cmp);
            return Ok(levels);
        }
        if points >= 1 << 16 {
            let sample: Vec<String> = grid
                .iter()
                .zip(&values)
                .step_by((points / 16).max(1))
                .map(|(t, v)| format!("{t:.4}:{v:.3e}"))
                .collect();
            return Err(Error::Numerical(format!(
                "found {} of {} roots for N = {num_steps}, beta = {beta}; grid sample {}",
                roots.len(),
                n - 1,
                sample.join(" ")
            )));
        }
        points *= 8;
    }
    Err(Error::Numerical("root bracketing did not settle".into()))
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = g(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Lowest nonzero level of a (possibly tipped) single-qubit chain.
pub fn single_qubit_gap(num_steps: usize, epsilon: f64, beta: f64) -> Result<f64> {
    if beta == 1.0 {
        return Ok(path_levels(num_steps + 1, epsilon)[1]);
    }
    Ok(solve_tipped_levels(num_steps, epsilon, beta)?[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_spectrum;
    use crate::hamiltonian::assemble;
    use crate::lattice::Program;
    use nalgebra::DMatrix;

    fn tipped_path(n: usize, beta: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 1..n {
            let s = if i == n - 1 { beta } else { 1.0 };
            m[(i - 1, i - 1)] += 1.0;
            m[(i, i)] += s * s;
            m[(i - 1, i)] -= s;
            m[(i, i - 1)] -= s;
        }
        m
    }

    #[test]
    fn path_determinant_matches_dense() {
        for n in 1..=9 {
            for beta in [1.0, 0.8, 0.5, 0.25] {
                let h = tipped_path(n, beta);
                for e in [0.013, 0.4, 1.1, 2.7, 3.9] {
                    let dense = (&h - DMatrix::identity(n, n) * e).determinant();
                    let closed = path_char_det(n, e, 1.0, beta).unwrap();
                    assert!(
                        (dense - closed).abs() <= 1e-10 * dense.abs().max(1e-3),
                        "n={n} beta={beta} e={e}: {dense} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn levels_examples() {
        let l = analytic_levels(1, 1.0);
        for (a, b) in l.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let r = closed_form_roots(1, 1.0);
        let want = [0.0, 2.0 - 2.0 * (PI / 4.0).cos(), 2.0, 2.0 - 2.0 * (3.0 * PI / 4.0).cos()];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let e1 = closed_form_roots(10, 1.0)[1];
        let asym = PI * PI / (2.0 * 11.0f64).powi(2);
        assert!((e1 / asym - 1.0).abs() < 0.02);
    }

    #[test]
    fn closed_form_vanishes_on_all_published_roots() {
        for n in 1..=10 {
            for e in closed_form_roots(n, 1.0) {
                assert!(closed_form_det(e, n, 1.0, 1.0).unwrap().abs() < 1e-10);
            }
            for e in analytic_levels(n, 1.0) {
                assert!(char_det(e, n, 1.0, 1.0).unwrap().abs() < 1e-10);
            }
        }
        assert_eq!(char_det(0.0, 3, 1.0, 1.0).unwrap(), 0.0);
        assert!(char_det(-0.1, 3, 1.0, 1.0).is_err());
        assert!(char_det(4.1, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn tipped_levels_match_dense_chain() {
        for (n, beta) in [(3, 0.5), (4, 0.5), (5, 0.25), (2, 0.75)] {
            let p = Program::new(1, n).tipped(beta);
            let (_, h) = assemble(&p).unwrap();
            let dense = dense_spectrum(&h).unwrap().eigenvalues;
            let solved = solve_tipped_levels(n, 1.0, beta).unwrap();
            assert_eq!(dense.len(), solved.len());
            for (a, b) in dense.iter().zip(&solved) {
                assert!((a - b).abs() < 1e-10, "N={n} beta={beta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn untipped_solver_reduces_to_analytic() {
        for n in 1..=12 {
            let a = analytic_levels(n, 1.0);
            let s = solve_tipped_levels(n, 1.0, 1.0).unwrap();
            for (x, y) in a.iter().zip(&s) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tipped_gap_stays_comparable() {
        for n in 1..=12 {
            let g1 = single_qubit_gap(n, 1.0, 1.0).unwrap();
            for beta in [0.2, 0.4, 0.6, 0.8, 1.0] {
                let r = single_qubit_gap(n, 1.0, beta).unwrap() / g1;
                assert!((0.1..=10.0).contains(&r), "N={n} beta={beta}: ratio {r}");
            }
        }
    }
}
