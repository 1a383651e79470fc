//! `gbs`: command-line front end.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbs::GbsError;

#[derive(Parser, Debug)]
#[command(name = "gbs", version, about = "Gaussian boson sampling and its applications")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GBS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw photon patterns from a graph-encoded device.
    Sample(commands::SampleArgs),
    /// Dense subgraph search seeded by samples.
    Subgraph(commands::SubgraphArgs),
    /// Maximum clique search seeded by samples.
    Clique(commands::CliqueArgs),
    /// Graph feature vectors from event probabilities.
    Similarity(commands::SimilarityArgs),
    /// Hafnian or permanental point-process samples over a point set.
    Points(commands::PointsArgs),
    /// Vibronic spectrum of a molecule.
    Vibronic(commands::VibronicArgs),
    /// Generate input datasets.
    #[command(subcommand)]
    Gen(commands::GenCommand),
}

/// Exit status for a library error: 2 for bad input, 3 for a tripped
/// resource guard, 1 otherwise.
fn exit_code(e: &GbsError) -> u8 {
    match e {
        GbsError::Validation(_) | GbsError::Parse(_) | GbsError::NoSolution(_) => 2,
        GbsError::Resource(_) => 3,
        GbsError::Numerical(_) | GbsError::Unsupported(_) | GbsError::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Subgraph(a) => commands::subgraph(a),
        Command::Clique(a) => commands::clique(a),
        Command::Similarity(a) => commands::similarity(a),
        Command::Points(a) => commands::points(a),
        Command::Vibronic(a) => commands::vibronic(a),
        Command::Gen(g) => commands::gen(g),
    };
    match result.and_then(|run| run.finish(cli.threads)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
