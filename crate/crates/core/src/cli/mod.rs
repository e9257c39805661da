//! `gsqc` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Config, Format, Overrides};

use gsqc::Result;

#[derive(Debug, Parser)]
#[command(name = "gsqc", version, about = "Ground-state quantum computer simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved settings as JSON and exit.
    #[arg(long, global = true)]
    pub show_config: bool,
    /// Number of eigenpairs to compute.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Residual tolerance in units of the hopping energy.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest dimension solved densely.
    #[arg(long, global = true)]
    pub dense_cutoff: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "GSQC_THREADS")]
    pub threads: Option<usize>,
    /// Seed for the iterative solver's start vectors.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Operator application budget per solve.
    #[arg(long, global = true)]
    pub max_matvecs: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Add wall-clock columns (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a pinned program and print its output state as JSON.
    Run {
        #[arg(long)]
        program: PathBuf,
    },
    /// Gap, bound and scaling sweep over a grid of programs.
    GapScan(GridArgs),
    /// Final-row detection probabilities over a grid of tipping strengths.
    Detect(GridArgs),
    /// Low-lying levels of a program.
    Spectrum {
        #[arg(long)]
        program: PathBuf,
        /// Also dump the Hamiltonian in coordinate format.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// JSON sweep spec; replaces the grid flags.
    #[arg(long, conflicts_with_all = ["n", "m", "layout", "beta"])]
    pub spec: Option<PathBuf>,
    /// Steps per qubit, e.g. "2-12,15".
    #[arg(long)]
    pub n: Option<String>,
    /// Qubit counts, same syntax as --n.
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated layouts: free, cnot-mid, cnot-each, cnot:J.
    #[arg(long)]
    pub layout: Option<String>,
    /// Comma-separated tipping strengths in (0, 1]; "auto" means 1/sqrt(MN).
    #[arg(long)]
    pub beta: Option<String>,
}

impl Global {
    fn overrides(&self) -> Overrides {
        Overrides {
            k: self.k,
            tol: self.tol,
            dense_cutoff: self.dense_cutoff,
            threads: self.threads,
            seed: self.seed,
            max_matvecs: self.max_matvecs,
            format: self.format,
            timing: self.timing,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let config = Config::resolve(cli.global.config.as_deref(), &cli.global.overrides())?;
    if cli.global.show_config {
        let text = serde_json::to_string_pretty(&config)? + "\n";
        commands::emit(cli.global.out.as_deref(), &text)?;
        return Ok(0);
    }
    let Some(command) = cli.command else {
        return Err(gsqc::Error::Validation(
            "no command given; try `gsqc --help`".into(),
        ));
    };
    if config.threads > 0 {
        // a second initialisation only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    let out = cli.global.out.as_deref();
    match command {
        Command::Run { program } => commands::run(&program, &config, out),
        Command::GapScan(grid) => commands::gap_scan(&grid, &config, out),
        Command::Detect(grid) => commands::detect(&grid, &config, out),
        Command::Spectrum { program, matrix } => {
            commands::spectrum(&program, matrix.as_deref(), &config, out)
        }
        Command::Verify { inject_fault } => commands::verify(inject_fault, &config, out),
    }
}
