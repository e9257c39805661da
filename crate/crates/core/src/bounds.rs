//! Analytic gap bounds and empirical scaling fits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::eigensolve::single_qubit_gap;
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_with, AssembleOptions};
use crate::lattice::{Configuration, Program, Site};

/// Relative slack granted to the upper-bound comparison for rounding.
const BOUND_SLACK: f64 = 1e-9;

/// Variational bound for a two-body gate at row `j`: `ε / (j (N - j + 1/β²))`.
pub fn gate_upper_bound(row: usize, num_steps: usize, epsilon: f64, beta: f64) -> f64 {
    let j = row as f64;
    epsilon / (j * (num_steps as f64 - j + 1.0 / (beta * beta)))
}

/// Upper bound on the gap: the smallest gate bound over two-body gates, or
/// the exact single-chain gap when the program has none.
pub fn upper_bound(program: &Program) -> Result<f64> {
    program.validate()?;
    let beta = program.beta();
    let n = program.num_steps;
    let gates = program
        .two_body_gates()
        .map(|(_, g)| gate_upper_bound(g.row(), n, program.epsilon, beta))
        .fold(f64::INFINITY, f64::min);
    if gates.is_finite() {
        Ok(gates)
    } else {
        single_qubit_gap(n, program.epsilon, beta)
    }
}

/// Order-of-magnitude bound for a tipped computer, `ε / ((N+1)(N + 1/β²))`.
pub fn tipped_upper_form(num_steps: usize, epsilon: f64, beta: f64) -> f64 {
    let n = num_steps as f64;
    epsilon / ((n + 1.0) * (n + 1.0 / (beta * beta)))
}

/// Lower-bound form `α / ((N+1)² (N + 1/β²)²)` for a given `α`.
pub fn tipped_lower_form(num_steps: usize, alpha: f64, beta: f64) -> f64 {
    let n = num_steps as f64;
    alpha / ((n + 1.0).powi(2) * (n + 1.0 / (beta * beta)).powi(2))
}

/// Spectrum of `H` restricted to the 16 variational states of a
/// two-qubit program with one two-body gate at row `j`.
///
/// Each state puts each qubit in one column, spread uniformly over either
/// rows `0..j` or rows `j..=N`. The result is ascending; for a conformant
/// gate it is `{0 ×4, pq ×8, (p² + pq + q²) ×4}` in units of `ε`, with
/// `p = 1/j` and `q = 1/(N - j + 1)`.
pub fn restricted_spectrum(program: &Program) -> Result<Vec<f64>> {
    restricted_spectrum_with(program, &AssembleOptions::default())
}

pub fn restricted_spectrum_with(program: &Program, opts: &AssembleOptions) -> Result<Vec<f64>> {
    program.validate()?;
    let gates: Vec<_> = program.two_body_gates().collect();
    if program.num_qubits != 2 || gates.len() != 1 || program.gates.len() != 1 {
        return Err(Error::Validation(
            "restricted spectrum needs two qubits and exactly one two-body gate".into(),
        ));
    }
    if !program.pins.is_empty() || !program.readout.is_empty() || program.tip_beta.is_some() {
        return Err(Error::Validation(
            "restricted spectrum needs an unpinned, untipped program without readout".into(),
        ));
    }
    let j = gates[0].1.row();
    let n = program.num_steps;
    let (set, h) = assemble_with(program, opts)?;
    let basis = set.basis;
    let region = |upstream: bool| if upstream { 0..j } else { j..n + 1 };
    let mut states: Vec<Vec<Complex64>> = Vec::with_capacity(16);
    for code in 0..16u8 {
        let (ua, ca, ub, cb) = (code & 8 != 0, (code >> 2) & 1, code & 2 != 0, code & 1);
        let mut v = vec![Complex64::new(0.0, 0.0); basis.dim()];
        let w = 1.0 / ((region(ua).len() * region(ub).len()) as f64).sqrt();
        for ra in region(ua) {
            for rb in region(ub) {
                let cfg = Configuration {
                    sites: vec![Site::new(ra, ca), Site::new(rb, cb)],
                    readout: vec![],
                };
                v[basis.config_index(&cfg)?] = Complex64::new(w, 0.0);
            }
        }
        states.push(v);
    }
    let images: Vec<Vec<Complex64>> = states.iter().map(|v| h.apply(v)).collect();
    let t = DMatrix::from_fn(16, 16, |r, c| {
        states[r]
            .iter()
            .zip(&images[c])
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
    });
    let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Least-squares line through `(ln(N+1), ln gap)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `exp(intercept)`: the fitted `c` in `gap ≈ c (N+1)^exponent`.
    pub constant: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
}

pub fn scaling_fit(samples: &[(usize, f64)]) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(Error::Data(format!(
            "scaling fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if let Some((n, g)) = samples.iter().find(|(_, g)| !(*g > 0.0)) {
        return Err(Error::Data(format!("non-positive gap {g} at N = {n}")));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(n, g)| (((n + 1) as f64).ln(), g.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("scaling fit needs at least two distinct N".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        exponent: slope,
        constant: intercept.exp(),
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub gap: f64,
    pub upper: f64,
    /// `gap · (N+1)^4`, the empirical lower-bound constant of this instance.
    pub alpha: f64,
    pub tipped_upper: f64,
}

/// Checks `0 <= gap <= upper_bound` and reports `gap (N+1)^4`.
pub fn check_bounds(program: &Program, gap: f64) -> Result<BoundsReport> {
    let upper = upper_bound(program)?;
    if !(gap >= 0.0) || gap > upper * (1.0 + BOUND_SLACK) {
        return Err(Error::UpperBoundViolation { gap, upper });
    }
    let n1 = (program.num_steps + 1) as f64;
    Ok(BoundsReport {
        gap,
        upper,
        alpha: gap * n1.powi(4),
        tipped_upper: tipped_upper_form(program.num_steps, program.epsilon, program.beta()),
    })
}

/// Running minimum of `gap (N+1)^4` over a family of instances.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AlphaFloor {
    pub min: Option<f64>,
    pub at_steps: Option<usize>,
}

impl AlphaFloor {
    pub fn record(&mut self, num_steps: usize, alpha: f64) {
        if self.min.is_none_or(|m| alpha < m) {
            self.min = Some(alpha);
            self.at_steps = Some(num_steps);
        }
    }

    /// Fails unless every recorded value stayed at or above `floor`.
    pub fn check(&self, floor: f64) -> Result<f64> {
        match self.min {
            Some(m) if m >= floor && m > 0.0 => Ok(m),
            Some(m) => Err(Error::Data(format!(
                "empirical alpha {m:.4e} at N = {} fell below the floor {floor:.4e}",
                self.at_steps.unwrap_or(0)
            ))),
            None => Err(Error::Data("no alpha samples recorded".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{analytic_levels, dense_spectrum};
    use crate::hamiltonian::assemble;

    #[test]
    fn upper_bound_examples() {
        let p = Program::new(2, 4).cnot(0, 1, 2);
        assert!((upper_bound(&p).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let p = Program::new(2, 2).cnot(0, 1, 1);
        assert!((upper_bound(&p).unwrap() - 0.5).abs() < 1e-15);
        let p = Program::new(2, 4).cnot(0, 1, 1).cnot(1, 0, 3);
        assert!((upper_bound(&p).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let free = Program::new(1, 5);
        assert!((upper_bound(&free).unwrap() - analytic_levels(5, 1.0)[2]).abs() < 1e-15);
    }

    #[test]
    fn measured_gap_respects_bound() {
        let p = Program::new(2, 2).cnot(0, 1, 1);
        let (_, h) = assemble(&p).unwrap();
        let gap = dense_spectrum(&h).unwrap().gap.unwrap();
        let r = check_bounds(&p, gap).unwrap();
        assert!(r.gap > 0.0 && r.gap <= 0.5);
        assert!(matches!(
            check_bounds(&p, 0.6),
            Err(Error::UpperBoundViolation { .. })
        ));
    }

    #[test]
    fn restricted_spectrum_oracle() {
        let p = Program::new(2, 2).cnot(0, 1, 1);
        let ev = restricted_spectrum(&p).unwrap();
        let want = [[0.0; 4].as_slice(), &[0.5; 8], &[1.75; 4]].concat();
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        assert!(restricted_spectrum(&Program::new(2, 2)).is_err());
    }

    #[test]
    fn fit_examples() {
        let synthetic: Vec<(usize, f64)> = (4..=12).map(|n| (n, 3.0 / ((n + 1) as f64).powi(2))).collect();
        let f = scaling_fit(&synthetic).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-12);
        assert!((f.constant - 3.0).abs() < 1e-10);
        let exact: Vec<(usize, f64)> = (4..=16).map(|n| (n, analytic_levels(n, 1.0)[2])).collect();
        assert!((scaling_fit(&exact).unwrap().exponent + 2.0).abs() < 0.05);
        assert!(scaling_fit(&exact[..3]).is_err());
        assert!(scaling_fit(&[(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)]).is_err());
    }

    #[test]
    fn alpha_floor_tracks_minimum() {
        let mut f = AlphaFloor::default();
        assert!(f.check(0.0).is_err());
        f.record(2, 3.0);
        f.record(3, 1.5);
        f.record(4, 2.0);
        assert_eq!(f.min, Some(1.5));
        assert_eq!(f.at_steps, Some(3));
        assert!(f.check(1.0).is_ok());
        assert!(f.check(2.0).is_err());
    }
}
