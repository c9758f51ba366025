use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qtransfer", version, about = "Finite-resource qubit transfer: fidelities, sweeps and crossing points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Significant digits of printed floats
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(6..=17))]
    pub precision: u8,
    /// Output format (strategy and validate default to json, the rest to csv)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    Ent,
    Qubit,
    Est,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fidelity of one teleportation through a Werner ebit
    Single {
        #[arg(long)]
        lambda0: f64,
    },
    /// Average fidelity of one strategy
    Strategy {
        method: StrategyKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda0: Option<f64>,
        /// Add a Monte Carlo estimate with this many samples (ent only)
        #[arg(long)]
        mc_samples: Option<u64>,
        /// Include the outcome distribution p_M (qubit only)
        #[arg(long)]
        distribution: bool,
    },
    /// Fidelity of several strategies over a grid of channel qualities
    Sweep {
        /// `all` or a comma list of ent_pur, qubit_pur, estimation
        #[arg(long, default_value = "all")]
        methods: String,
        /// Comma list of resource counts; `a-b` expands to an inclusive range
        #[arg(long)]
        n: String,
        /// Number of interior grid points in (1/4, 1)
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
        grid: u64,
    },
    /// Channel qualities where purification starts beating estimation, N = 1..n-max
    Crossings {
        #[arg(long)]
        n_max: usize,
        /// Bisection width
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run every oracle comparison and invariant check
    Validate {
        /// Samples per Monte Carlo cross-check
        #[arg(long, default_value_t = 100_000)]
        mc_samples: u64,
    },
}
