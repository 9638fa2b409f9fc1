use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(
    name = "tclust",
    version,
    about = "Robust clustering with impartial trimming"
)]
struct Cli {
    /// Worker threads (defaults to the available hardware threads).
    #[arg(long, global = true, env = "TCLUST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit k clusters at trimming level alpha.
    Fit(FitArgs),
    /// Classification trimmed likelihood curves over a (k, alpha) grid.
    Curves(CurvesArgs),
    /// Bootstrap search for sensible (k, alpha) pairs.
    Select(SelectArgs),
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// Population overlap indices of a fitted or hand-written model.
    Overlap(OverlapArgs),
    /// Agreement between a labelling and the truth.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Input CSV (comma separated, optional header).
    #[arg(long)]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Eigenvalue-ratio bound.
    #[arg(long, default_value_t = 12.0)]
    c: f64,
    /// Random starts per fit.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    #[arg(long, default_value_t = 0.2)]
    alpha_max: f64,
    /// Number of steps between 0 and alpha-max.
    #[arg(long, default_value_t = 8)]
    grid: usize,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 100)]
    b: usize,
    #[arg(long, default_value_t = 0.1)]
    crit: f64,
    #[arg(long, default_value = "keep-original")]
    outlier_mode: String,
    /// Random starts per replicate fit (defaults to half of --starts).
    #[arg(long)]
    replicate_starts: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Scenario {
    /// Four bivariate components with two uniform boxes (n = 1000).
    Fig1,
    /// The same layout with every count halved.
    Fig1Half,
    /// Random mixture at a target average overlap.
    Overlap,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Components (overlap scenario).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Dimension (overlap scenario).
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Eigenvalue-ratio bound for the generated covariances.
    #[arg(long, default_value_t = 12.0)]
    c: f64,
    /// Target average pairwise overlap.
    #[arg(long, default_value_t = 0.05)]
    overlap: f64,
    /// Observations per component.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Extra uniform points on the data range.
    #[arg(long, default_value_t = 0)]
    contamination: usize,
}

#[derive(Args, Debug)]
struct OverlapArgs {
    /// Model JSON: `fit.json` or any object with weights, means,
    /// covariances and c.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Trimming levels for xi and the consistency factor.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2])]
    alpha: Vec<f64>,
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Fitted labels (one per line, last column).
    #[arg(long, requires = "truth")]
    labels: Option<PathBuf>,
    /// True labels.
    #[arg(long, requires = "labels")]
    truth: Option<PathBuf>,
    /// Selected numbers of clusters, comma separated.
    #[arg(long, value_delimiter = ',', requires = "k")]
    ks: Vec<usize>,
    /// True number of clusters.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Curves(a) => commands::curves(a),
        Command::Select(a) => commands::select(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Overlap(a) => commands::overlap(a),
        Command::Eval(a) => commands::eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
