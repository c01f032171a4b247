//! Command-line runner for the resistance-network library: graph
//! generation, metric queries, cut-witness checks, harmonic solves, heat
//! semigroup runs, and a randomized invariant suite.
//!
//! Exit codes: 0 on success, 1 when a numerical check or verification
//! fails, 2 on configuration and usage errors.

mod commands;
mod output;
mod parse;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// A failed numerical assertion, as opposed to a configuration problem;
/// drives the exit-code split.
#[derive(Debug)]
pub struct CheckFailure(pub String);

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CheckFailure {}

#[derive(Parser)]
#[command(
    name = "ohmnet",
    version,
    about = "Resistance networks: generators, metrics, harmonic solves, heat semigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a truncation as graph JSON.
    Generate(commands::generate::GenerateArgs),
    /// Resistance-metric queries: volume, diameter, distances.
    Metric(commands::metric::MetricArgs),
    /// Verify a cut witness between two boundary classes.
    Cut(commands::cut::CutArgs),
    /// Solve boundary value problems, towers, and the pendant-chain table.
    Dirichlet(commands::dirichlet::DirichletArgs),
    /// Run the heat semigroup and its Markov checks.
    Evolve(commands::evolve::EvolveArgs),
    /// Randomized invariant suite over one host graph.
    Check(commands::check::CheckArgs),
}

/// Flags shared by every subcommand.
#[derive(Args)]
pub struct CommonArgs {
    /// Generator spec (see `parse::parse_source`) or a graph JSON path.
    #[arg(long, alias = "graph")]
    generator: String,

    /// Vertex weight scheme: mu0 | conductance | constant:C.
    #[arg(long, default_value = "mu0")]
    scheme: String,

    /// Output directory; defaults to $OHMNET_OUT_DIR, then the working dir.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for randomized generators and randomized checks.
    #[arg(long)]
    seed: Option<u64>,

    /// Resistance range for random generators.
    #[arg(long, default_value_t = 0.1)]
    r_min: f64,
    #[arg(long, default_value_t = 2.0)]
    r_max: f64,

    /// Worker threads for fanned-out solves; 0 means all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(&args),
        Command::Metric(args) => commands::metric::run(&args),
        Command::Cut(args) => commands::cut::run(&args),
        Command::Dirichlet(args) => commands::dirichlet::run(&args),
        Command::Evolve(args) => commands::evolve::run(&args),
        Command::Check(args) => commands::check::run(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code_for(&err));
    }
}

/// 1 for failed numerical assertions, 2 for everything else (configuration,
/// parsing, IO).
fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<CheckFailure>().is_some() {
            return 1;
        }
        if let Some(core) = cause.downcast_ref::<ohmnet::Error>() {
            return match core {
                ohmnet::Error::CheckFailed(_)
                | ohmnet::Error::BoundViolated(_)
                | ohmnet::Error::DominanceViolated { .. }
                | ohmnet::Error::SolverDiverged { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}
