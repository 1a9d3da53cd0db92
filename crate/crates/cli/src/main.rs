//! `krf`: generate data, train, predict, evaluate, cross-validate and
//! benchmark regression forests from the command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "krf", version, about = "K-means regression forests", propagate_version = true)]
struct Cli {
    /// Print JSON on stdout instead of a table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Train a forest and save it.
    Train(TrainArgs),
    /// Predict targets for the rows of a CSV file.
    Predict(PredictArgs),
    /// Report MAE of a saved model on a labelled CSV file.
    Eval(EvalArgs),
    /// Cross-validate a grid of forest settings.
    Cv(CvArgs),
    /// Compare KRF, AKRF and BRF on a held-out split.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitterKind {
    /// Fixed-K k-means splits (`--k`).
    Krf,
    /// K chosen per node by BIC (`--k-range`).
    Akrf,
    /// Axis-aligned binary splits (`--gamma`).
    Brf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Piecewise,
    Blobs,
    CircularBlobs,
    Rotation,
}

#[derive(Args, Clone, Debug)]
pub struct ForestArgs {
    #[arg(long, value_enum)]
    pub splitter: Option<SplitterKind>,
    /// Children per split for KRF. A comma list forms a grid for `cv`.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    /// Range of K tried by AKRF, as MIN-MAX.
    #[arg(long, default_value = "2-40", value_parser = parse_k_range)]
    pub k_range: (usize, usize),
    #[arg(long, default_value_t = krf::forest::DEFAULT_NUM_TREES)]
    pub trees: usize,
    /// Fraction of the training set given to each tree.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Fraction of features searched per BRF node. A comma list forms a grid for `cv`.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = krf::tree::DEFAULT_MIN_SAMPLES_LEAF)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = krf::linear_classifier::DEFAULT_PENALTY_C)]
    pub penalty_c: f64,
    /// Treat a single `t0` target column as an angle in degrees.
    #[arg(long)]
    pub circular: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "rotation")]
    pub generator: GeneratorKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    /// Number of regions (piecewise) or blobs (blobs, circular-blobs).
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Target noise: standard deviation for piecewise, degrees for rotation.
    #[arg(long, default_value_t = 5.0)]
    pub noise: f64,
    /// Blob spacing in units of sigma.
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    /// Blob spread; degrees for circular-blobs.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Centre of the rotation targets in degrees.
    #[arg(long, default_value_t = 180.0)]
    pub center: f64,
    /// Half-width of the rotation targets in degrees.
    #[arg(long, default_value_t = 180.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the training summary as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with `f0,…` columns; other columns are ignored.
    #[arg(long)]
    pub data: PathBuf,
    /// Predictions CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub circular: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Leave one group out, using the `group` column.
    #[arg(long, conflicts_with = "folds")]
    pub groups: bool,
    /// Retrain the best setting on all data and save it here.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out CSV; without it a random fraction of `--data` is held out.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Repetitions with seeds seed, seed+1, …
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = ["..=", "..", "-", ":"]
        .iter()
        .find_map(|sep| s.split_once(sep))
        .ok_or_else(|| format!("expected MIN-MAX, got {s:?}"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad K {a:?}"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("bad K {b:?}"))?;
    if lo < 2 || lo > hi {
        return Err(format!("K range must satisfy 2 <= MIN <= MAX, got {lo}-{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::Cv(a) => commands::cv(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result.and_then(|out| Ok(out.print(cli.json)?)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("2-40"), Ok((2, 40)));
        assert_eq!(parse_k_range("3..=7"), Ok((3, 7)));
        assert_eq!(parse_k_range("3:3"), Ok((3, 3)));
        assert!(parse_k_range("1-4").is_err());
        assert!(parse_k_range("5-4").is_err());
        assert!(parse_k_range("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
