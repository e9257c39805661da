use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use gsqc::eigensolve::SolverOptions;
use gsqc::hamiltonian::AssembleOptions;
use gsqc::lattice::DEFAULT_DIMENSION_CAP;
use gsqc::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Resolved settings. Tolerances are relative to the hopping energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Eigenpairs requested; 0 picks a per-command default.
    pub k: usize,
    pub tol: f64,
    pub cluster_tol: f64,
    pub dense_cutoff: usize,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub seed: u64,
    pub max_basis: usize,
    pub max_matvecs: usize,
    pub dimension_cap: usize,
    /// Output format; unset means CSV for tables and JSON for `run`.
    pub format: Option<Format>,
    pub timing: bool,
}

impl Default for Config {
    fn default() -> Self {
        let s = SolverOptions::default();
        Config {
            k: 0,
            tol: s.tol,
            cluster_tol: s.cluster_tol,
            dense_cutoff: s.dense_cutoff,
            threads: 0,
            seed: s.seed,
            max_basis: s.max_basis,
            max_matvecs: s.max_matvecs,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            format: None,
            timing: false,
        }
    }
}

/// Values given on the command line; each one overrides the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub tol: Option<f64>,
    pub dense_cutoff: Option<usize>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub max_matvecs: Option<usize>,
    pub format: Option<Format>,
    pub timing: bool,
}

impl Config {
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Config> {
        let mut c = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f { c.$f = v; } )* };
        }
        take!(k, tol, dense_cutoff, threads, seed, max_matvecs);
        if flags.format.is_some() {
            c.format = flags.format;
        }
        c.timing |= flags.timing;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Validation(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.cluster_tol.is_finite() && self.cluster_tol > 0.0) {
            return Err(Error::Validation(format!(
                "cluster_tol must be positive, got {}",
                self.cluster_tol
            )));
        }
        if self.max_basis < 4 {
            return Err(Error::Validation("max_basis must be at least 4".into()));
        }
        Ok(())
    }

    /// Solver options in absolute units for hopping energy `epsilon`.
    pub fn solver(&self, epsilon: f64, k: usize) -> SolverOptions {
        SolverOptions {
            k,
            tol: self.tol * epsilon,
            dense_cutoff: self.dense_cutoff,
            seed: self.seed,
            max_basis: self.max_basis,
            max_matvecs: self.max_matvecs,
            cluster_tol: self.cluster_tol * epsilon,
        }
    }

    /// Solver options left in units of epsilon, for sweeps.
    pub fn relative_solver(&self) -> SolverOptions {
        self.solver(1.0, self.k.max(1))
    }

    pub fn assemble(&self) -> AssembleOptions {
        AssembleOptions {
            dimension_cap: self.dimension_cap,
            ..AssembleOptions::default()
        }
    }
}
