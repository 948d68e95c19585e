use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod io;


#[derive(Debug, Parser)]
#[command(name = "tmerge", version, about = "Reduce T-depth by merging π/8 rotation layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random circuit, or a suite of them with a manifest.
    Generate(GenerateArgs),
    /// Optimize a circuit document.
    Optimize(OptimizeArgs),
    /// Check that two circuits implement the same unitary (n <= 12).
    Verify(VerifyArgs),
    /// Run the GA and the lookahead baseline on the same instances.
    Compare(CompareArgs),
    /// Optimize every instance of a generated suite and write CSV rows.
    Bench(BenchArgs),
    /// Magic-state budget and factory footprint for a circuit.
    Estimate(EstimateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Disjoint,
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Paper,
    Strict,
}

/// Optimizer settings. Flags override the config file; `TMERGE_*` variables
/// stand in for flags.
#[derive(Debug, Clone, Default, Args)]
struct TuneArgs {
    /// TOML config, or a JSON report whose recorded config is reused.
    #[arg(long, env = "TMERGE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "TMERGE_SEED")]
    seed: Option<u64>,
    /// Exponent of n in the expansion scaling term.
    #[arg(long, env = "TMERGE_ALPHA")]
    alpha: Option<f64>,
    /// Weight of the remaining T budget in pair scores.
    #[arg(long, env = "TMERGE_BETA")]
    beta: Option<f64>,
    #[arg(long, env = "TMERGE_POPULATION")]
    population: Option<usize>,
    #[arg(long, env = "TMERGE_GENERATIONS")]
    generations: Option<usize>,
    #[arg(long, env = "TMERGE_ELITE")]
    elite: Option<usize>,
    #[arg(long, env = "TMERGE_MUTATION")]
    mutation: Option<f64>,
    #[arg(long, value_enum, env = "TMERGE_POLICY")]
    policy: Option<PolicyArg>,
    #[arg(long, value_enum, env = "TMERGE_ORDER")]
    order: Option<OrderArg>,
    /// Lookahead window (2..=8).
    #[arg(long, env = "TMERGE_WINDOW")]
    window: Option<usize>,
    #[arg(long, env = "TMERGE_MAX_ROUNDS")]
    max_rounds: Option<usize>,
    /// Skip the layer expansion pass.
    #[arg(long)]
    no_expansion: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, conflicts_with = "profile")]
    qubits: Option<usize>,
    #[arg(long, requires = "qubits")]
    columns: Option<usize>,
    /// Total T gates; defaults to density * qubits * columns.
    #[arg(long, conflicts_with = "density")]
    t_total: Option<usize>,
    /// Fraction of cells carrying a rotation.
    #[arg(long)]
    density: Option<f64>,
    /// small, moderate or large.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Comma-separated density grades for suites.
    #[arg(long, value_delimiter = ',')]
    densities: Vec<f64>,
    #[arg(long, env = "TMERGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Circuit file, or directory for a suite. Defaults to stdout for a single circuit.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    input: PathBuf,
    #[command(flatten)]
    tune: TuneArgs,
    /// Optimized circuit; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Single-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    original: PathBuf,
    optimized: PathBuf,
    #[arg(long, default_value_t = tmerge::oracle::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Circuit document or suite manifest.
    input: PathBuf,
    #[command(flatten)]
    tune: TuneArgs,
    /// Directory for compare.csv and aggregate.csv.
    #[arg(long)]
    out: PathBuf,
    /// Fraction of instances on which the GA should match or beat the lookahead.
    #[arg(long, default_value_t = 0.5)]
    min_fraction: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// small, moderate or large.
    #[arg(long, default_value = "small")]
    profile: String,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, value_delimiter = ',')]
    densities: Vec<f64>,
    /// Master seed of the suite.
    #[arg(long, default_value_t = 0)]
    suite_seed: u64,
    #[command(flatten)]
    tune: TuneArgs,
    /// CSV of per-instance rows.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Take T-count and T-depth from a circuit document.
    #[arg(long, conflicts_with_all = ["t_count", "t_depth"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    t_count: Option<usize>,
    #[arg(long, required_unless_present = "input")]
    t_depth: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    target: f64,
    #[arg(long, default_value_t = 41.25)]
    constant: f64,
    #[arg(long, default_value_t = 4)]
    exponent: u32,
    #[arg(long, default_value_t = 11)]
    tiles: u64,
    #[arg(long, default_value_t = 5)]
    distance: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Optimize(args) => commands::optimize(args),
        Command::Verify(args) => commands::verify(args),
        Command::Compare(args) => commands::compare(args),
        Command::Bench(args) => commands::bench(args),
        Command::Estimate(args) => commands::estimate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
