//! `tendency`: command-line front end for cluster-tendency assessment,
//! co-clustering and booking analytics.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tendency", version, about = "Cluster tendency, co-clustering and booking analytics")]
pub struct Cli {
    /// Worker threads for parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic data set.
    Gen(GenArgs),
    /// VAT/iVAT of a square dissimilarity matrix or of feature rows.
    Ivat(IvatArgs),
    /// Sampled co-clustering of a rectangular relational matrix.
    Scoivat(ScoIvatArgs),
    /// Booking preprocessing, aggregate tables and performance matrix.
    Aggregate(AggregateArgs),
    /// Train and evaluate the late-pickup classifier.
    Train(TrainArgs),
    /// Rank predictors by minimum-redundancy maximum-relevance.
    Mrmr(MrmrArgs),
    /// Score and rank candidate drivers for booking requests.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Example1,
    Example2,
    Gaussian2d,
    Bookings,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Rows (example1, example2) or drivers (bookings).
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns (example1, example2), points (gaussian2d) or bookings.
    #[arg(long)]
    pub n: Option<usize>,
    /// Row clusters (example1) or mixture components (gaussian2d).
    #[arg(long)]
    pub krows: Option<usize>,
    /// Column clusters (example1).
    #[arg(long)]
    pub kcols: Option<usize>,
    #[arg(long, default_value_t = tendency_core::bookings::DEFAULT_TZ_OFFSET_MIN)]
    pub tz_offset_min: i32,
}

#[derive(Debug, Args)]
pub struct IvatArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample this many feature rows with MMRS first.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub kprime: usize,
    /// Clusters to cut; the suggested count when absent.
    #[arg(long)]
    pub krows: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScoIvatArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Row sample size (all rows when absent).
    #[arg(long)]
    pub m: Option<usize>,
    /// Column sample size (all columns when absent).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub kprime: usize,
    #[arg(long)]
    pub krows: usize,
    #[arg(long)]
    pub kcols: usize,
    /// Block flag threshold; a quarter of the observed value range when absent.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = tendency_core::bookings::DEFAULT_TZ_OFFSET_MIN)]
    pub tz_offset_min: i32,
    /// Geohash precision of the high-speed late-pickup grid query.
    #[arg(long, default_value_t = 7)]
    pub precision: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    #[default]
    TrainOnly,
    All,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SourceArg::TrainOnly)]
    pub aggregate_source: SourceArg,
    #[arg(long, default_value_t = tendency_core::bookings::DEFAULT_TZ_OFFSET_MIN)]
    pub tz_offset_min: i32,
}

#[derive(Debug, Args)]
pub struct MrmrArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SourceArg::TrainOnly)]
    pub aggregate_source: SourceArg,
    #[arg(long, default_value_t = tendency_core::bookings::DEFAULT_TZ_OFFSET_MIN)]
    pub tz_offset_min: i32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    #[default]
    Ratio,
    Logistic,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Requests CSV, bookings CSV and, for the logistic mechanism, a model file.
    #[arg(long = "in", num_args = 1, required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = MechanismArg::Ratio)]
    pub mechanism: MechanismArg,
    #[arg(long, default_value_t = tendency_core::bookings::DEFAULT_TZ_OFFSET_MIN)]
    pub tz_offset_min: i32,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TENDENCY_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            if usage && !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
