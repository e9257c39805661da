//! Desk-scale invariant suite behind `gsqc verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{gate_upper_bound, restricted_spectrum_with};
use crate::detection::{detection_probability, predicted_probability};
use crate::eigensolve::{
    analytic_levels, dense_spectrum, low_lying, solve, solve_tipped_levels, SolverOptions,
};
use crate::error::Result;
use crate::generate::{random_input, random_program, RandomSpec};
use crate::hamiltonian::{assemble_with, AssembleOptions, TermLabel};
use crate::lattice::{rotation, Program};
use crate::semantics::{reference_circuit, row_projection, verify_development, LogicalState};

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub solver: SolverOptions,
    pub assemble: AssembleOptions,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&VerifyOptions) -> Result<std::result::Result<String, String>>;

const CHECKS: &[(&str, Check)] = &[
    ("single-qubit spectrum", single_qubit_spectrum),
    ("determinant zeros", determinant_zeros),
    ("gauge invariance", gauge_invariance),
    ("cnot spectrum oracle", cnot_oracle),
    ("ground manifold", ground_manifold),
    ("development equation", development),
    ("term commutation", commutation),
    ("solver equivalence", solver_equivalence),
    ("tipped detection", tipped_detection),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check; an error inside a check counts as its failure.
pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let (passed, detail) = match check(opts) {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(e) => (false, e.to_string()),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn spectrum(p: &Program, opts: &VerifyOptions, k: usize) -> Result<crate::eigensolve::SpectralResult> {
    let (_, h) = assemble_with(p, &opts.assemble)?;
    let mut o = opts.solver.clone();
    o.k = k;
    solve(&h, &o)
}

fn single_qubit_spectrum(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let (_, h) = assemble_with(&Program::new(1, n), &opts.assemble)?;
        let dense = dense_spectrum(&h)?;
        for (a, b) in dense.eigenvalues.iter().zip(analytic_levels(n, 1.0)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.1e}"))
    } else {
        Err(format!("levels deviate by {worst:.3e}"))
    })
}

fn determinant_zeros(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let mut worst: f64 = 0.0;
    for n in [2, 4, 6] {
        for beta in [1.0, 0.5, 0.25] {
            let (_, h) = assemble_with(&Program::new(1, n).tipped(beta), &opts.assemble)?;
            let dense = dense_spectrum(&h)?;
            let roots = solve_tipped_levels(n, 1.0, beta)?;
            for (a, b) in dense.eigenvalues.iter().zip(&roots) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(if worst <= 1e-8 {
        Ok(format!("max deviation {worst:.1e}"))
    } else {
        Err(format!("determinant roots deviate by {worst:.3e}"))
    })
}

fn gauge_invariance(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let free = Program::new(2, 3).cnot(0, 1, 2);
    let gated = free
        .clone()
        .single(0, 1, rotation(0.7))
        .single(1, 3, rotation(-1.9))
        .single(0, 3, rotation(2.4));
    let a = spectrum(&free, opts, 8)?;
    let b = spectrum(&gated, opts, 8)?;
    let worst = a
        .eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(if worst <= 1e-8 {
        Ok(format!("low spectrum unchanged to {worst:.1e}"))
    } else {
        Err(format!("single-qubit gates shift the spectrum by {worst:.3e}"))
    })
}

fn cnot_oracle(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    for n in [2, 3, 4] {
        for j in 1..=n {
            let p = Program::new(2, n).cnot(0, 1, j);
            let r = restricted_spectrum_with(&p, &opts.assemble)?;
            let (pp, q) = (1.0 / j as f64, 1.0 / (n - j + 1) as f64);
            let want: Vec<f64> = [0.0; 4]
                .into_iter()
                .chain([pp * q; 8])
                .chain([pp * pp + pp * q + q * q; 4])
                .collect();
            let dev = r
                .iter()
                .zip(&want)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            if dev > 1e-10 {
                return Ok(Err(format!(
                    "N={n} j={j}: restricted spectrum deviates by {dev:.3e}"
                )));
            }
            let s = spectrum(&p, opts, 6)?;
            let gap = s.gap.unwrap_or(f64::NAN);
            let upper = gate_upper_bound(j, n, 1.0, 1.0);
            if s.ground_manifold_dim != 4 || !(gap > 0.0 && gap <= upper * (1.0 + 1e-9)) {
                return Ok(Err(format!(
                    "N={n} j={j}: ground manifold {} and gap {gap:.6} vs bound {upper:.6}",
                    s.ground_manifold_dim
                )));
            }
        }
    }
    Ok(Ok("restricted levels and bound hold for N = 2..4".into()))
}

fn ground_manifold(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..8 {
        let m = rng.random_range(1..=3);
        let spec = RandomSpec {
            num_qubits: m,
            num_steps: rng.random_range(1..=if m == 3 { 3 } else { 5 }),
            max_cnots: 2,
            single_density: 0.4,
            complex: false,
        };
        let p = random_program(&mut rng, &spec);
        let s = spectrum(&p, opts, (1 << m) + 1)?;
        if s.ground_manifold_dim != 1 << m {
            return Ok(Err(format!(
                "program {i} ({m} qubits): ground manifold {} instead of {}",
                s.ground_manifold_dim,
                1 << m
            )));
        }
    }
    Ok(Ok("8 random programs have 2^M zero modes".into()))
}

fn development(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let m = rng.random_range(1..=3);
        let spec = RandomSpec {
            num_qubits: m,
            num_steps: rng.random_range(1..=if m == 3 { 3 } else { 5 }),
            max_cnots: 2,
            single_density: 0.5,
            complex: i % 4 == 3,
        };
        let input = random_input(&mut rng, m);
        let p = random_program(&mut rng, &spec).pin_all(&input);
        let (set, h) = assemble_with(&p, &opts.assemble)?;
        let mut o = opts.solver.clone();
        o.k = 1;
        let s = solve(&h, &o)?;
        let residual = verify_development(s.ground_state(), &p, &set.basis)?;
        let last = row_projection(s.ground_state(), p.num_steps, &set.basis);
        let out = LogicalState::from_amplitudes(m, last.amplitudes)?;
        let fidelity = out.fidelity(&reference_circuit(&p, &input)?);
        worst = worst.max(residual).max(1.0 - fidelity);
        if residual > 1e-8 || fidelity < 1.0 - 1e-8 {
            return Ok(Err(format!(
                "program {i}: residual {residual:.3e}, fidelity {fidelity:.10}"
            )));
        }
    }
    Ok(Ok(format!("worst residual {worst:.1e}")))
}

fn commutation(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let p = Program::new(3, 4)
        .cnot(0, 1, 2)
        .cnot(1, 2, 4)
        .single(2, 1, rotation(0.4))
        .single(0, 4, rotation(1.1));
    let (set, _) = assemble_with(&p, &opts.assemble)?;
    let rows = |t: &crate::hamiltonian::Term| -> Vec<usize> {
        match &t.label {
            TermLabel::SingleStep { row, .. } | TermLabel::TwoBody { row, .. } => vec![row - 1, *row],
            _ => vec![],
        }
    };
    let mut pairs = 0;
    for (i, a) in set.terms.iter().enumerate() {
        for b in &set.terms[i + 1..] {
            let shared: Vec<usize> = a.support.iter().copied().filter(|q| b.support.contains(q)).collect();
            let ra = rows(a);
            let overlap = !shared.is_empty() && rows(b).iter().any(|r| ra.contains(r));
            if overlap {
                continue;
            }
            pairs += 1;
            let c = a.op.commutator_max(&b.op);
            if c > 1e-12 {
                return Ok(Err(format!("{} and {} fail to commute ({c:.3e})", a.label, b.label)));
            }
        }
    }
    Ok(Ok(format!("{pairs} term pairs commute")))
}

fn solver_equivalence(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    let p = Program::new(2, 4).cnot(0, 1, 2).single(1, 1, rotation(0.9));
    let (_, h) = assemble_with(&p, &opts.assemble)?;
    let dense = dense_spectrum(&h)?;
    let mut o = opts.solver.clone();
    o.k = 6;
    let it = low_lying(&h, &o)?;
    let worst = it
        .eigenvalues
        .iter()
        .zip(&dense.eigenvalues)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(if worst <= 1e-8 {
        Ok(format!("Lanczos within {worst:.1e} of dense"))
    } else {
        Err(format!("Lanczos deviates from dense by {worst:.3e}"))
    })
}

fn tipped_detection(opts: &VerifyOptions) -> Result<std::result::Result<String, String>> {
    for (m, n, beta) in [(1, 4, 0.5), (2, 3, 0.4), (2, 2, 1.0)] {
        let p = Program::new(m, n).tipped(beta);
        let (set, h) = assemble_with(&p, &opts.assemble)?;
        let mut o = opts.solver.clone();
        o.k = 1;
        let s = solve(&h, &o)?;
        let r = detection_probability(s.ground_state(), &set.basis, &p);
        let want = predicted_probability(m, n, beta);
        if (r.p_all_final - want).abs() > 1e-9 {
            return Ok(Err(format!(
                "M={m} N={n} beta={beta}: p = {} vs {want}",
                r.p_all_final
            )));
        }
    }
    Ok(Ok("final-row probabilities match (1+b^2 N)^-M".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_suite_passes() {
        let out = run_suite(&VerifyOptions::default());
        for o in &out {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }

    #[test]
    fn injected_fault_is_named() {
        let opts = VerifyOptions {
            assemble: AssembleOptions {
                two_body_penalty_scale: 0.5,
                ..AssembleOptions::default()
            },
            ..VerifyOptions::default()
        };
        let out = run_suite(&opts);
        let oracle = out.iter().find(|o| o.name == "cnot spectrum oracle").unwrap();
        assert!(!oracle.passed);
    }

    #[test]
    fn iterative_path_passes() {
        let opts = VerifyOptions {
            solver: SolverOptions {
                dense_cutoff: 8,
                ..SolverOptions::default()
            },
            ..VerifyOptions::default()
        };
        for o in run_suite(&opts) {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
