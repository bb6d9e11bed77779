//! Command-line front end: ingestion, return transforms, correlation
//! ensembles, benchmark ensembles, and the spectral/structural analyses,
//! wired together with reproducible seeds and machine-readable outputs.
//!
//! Exit codes: 0 success, 1 domain error (single-line message on
//! stderr), 2 usage error.

mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Base-URL override for the exchange API.
pub const API_BASE_ENV: &str = "EIGENFOLIO_API_BASE";

#[derive(Parser)]
#[command(name = "eigenfolio", version, about = "Random-matrix spectral analysis of multi-asset return series")]
struct Cli {
    /// Cap worker threads (default: all cores). Never affects results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download candles and align them into a price matrix CSV.
    Fetch(FetchArgs),
    /// Standardized log-returns from a price matrix.
    Returns {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrapped ensemble of correlation matrices (JSONL).
    Ensemble {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wishart-Gaussian or Wishart-Cauchy benchmark ensemble (JSONL).
    Bench {
        #[arg(long, value_enum)]
        dist: DistKind,
        /// Cauchy scale parameter (half-width at half-maximum).
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 17)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigendecompose every ensemble member (JSON).
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Green's-function density of states (CSV curve).
    Dos {
        #[arg(long = "in")]
        input: PathBuf,
        /// Lorentzian broadening; defaults to 0.05 * (max eigenvalue / 2).
        #[arg(long, allow_negative_numbers = true)]
        eta: Option<f64>,
        /// Evaluation grid `start:stop:points`; defaults to the pooled
        /// eigenvalue range padded by 10 eta.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unfolded nearest-neighbor spacing histogram from a DOS curve.
    Spacings {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 100)]
        sets: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expected participation-ratio curve (CSV).
    Ipr {
        #[arg(long = "in")]
        input: PathBuf,
        /// Gaussian kernel width: `auto` (mean eigenvalue spacing) or a number.
        #[arg(long, default_value = "auto")]
        sigma: String,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean cumulative explained-volatility curve (CSV).
    Volatility {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign-partition cluster counts against the uniform baseline (CSV).
    Clusters {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance matrix from the ensemble-mean correlation (CSV).
    Dist {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum spanning tree of a distance matrix (DOT).
    Mst {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Single-linkage dendrogram of a distance matrix (JSON).
    Dendro {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the cophenetic distance matrix here.
        #[arg(long)]
        cophenetic: Option<PathBuf>,
    },
    /// Full analysis: prices -> every artifact, into one directory.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct FetchArgs {
    /// Comma-separated tickers, e.g. BTCUSD,ETHUSD.
    #[arg(long, value_delimiter = ',', required = true)]
    symbols: Vec<String>,
    /// Interval code passed through to the exchange (1-minute default).
    #[arg(long, default_value = "M1")]
    period: String,
    #[arg(long, default_value_t = 1000)]
    limit: usize,
    /// Series shorter than this are dropped; defaults to 90% of --limit.
    #[arg(long)]
    min_length: Option<usize>,
    /// Base URL; EIGENFOLIO_API_BASE overrides the built-in default.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 1000)]
    page_limit: usize,
    /// Fixed delay between requests, milliseconds.
    #[arg(long, default_value_t = 100)]
    delay_ms: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    outdir: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 100)]
    sets: usize,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Grid points for the DOS and participation-ratio curves.
    #[arg(long, default_value_t = 600)]
    grid_points: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistKind {
    Gaussian,
    Cauchy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    Euclid,
    Spectral,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = eigenfolio::par::init_thread_pool(cli.threads) {
        return fail(&e);
    }
    let result = match cli.command {
        Command::Fetch(args) => ops::fetch(args),
        Command::Returns { input, out } => ops::returns(&input, &out),
        Command::Ensemble {
            input,
            window,
            samples,
            seed,
            out,
        } => ops::ensemble(&input, window, samples, seed, &out),
        Command::Bench {
            dist,
            gamma,
            m,
            n,
            samples,
            seed,
            out,
        } => ops::bench(dist, gamma, m, n, samples, seed, &out),
        Command::Spectrum { input, out } => ops::spectrum(&input, &out),
        Command::Dos {
            input,
            eta,
            grid,
            out,
        } => ops::dos(&input, eta, grid.as_deref(), &out),
        Command::Spacings {
            input,
            draws,
            sets,
            bins,
            seed,
            out,
        } => ops::spacings(&input, draws, sets, bins, seed, &out),
        Command::Ipr {
            input,
            sigma,
            grid,
            out,
        } => ops::ipr(&input, &sigma, grid.as_deref(), &out),
        Command::Volatility { input, out } => ops::volatility(&input, &out),
        Command::Clusters { input, out } => ops::clusters(&input, &out),
        Command::Dist { input, metric, out } => ops::dist(&input, metric, &out),
        Command::Mst { input, out } => ops::mst(&input, &out),
        Command::Dendro {
            input,
            out,
            cophenetic,
        } => ops::dendro(&input, &out, cophenetic.as_deref()),
        Command::Pipeline(args) => ops::pipeline(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &eigenfolio::Error) -> ExitCode {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("eigenfolio: error: {msg}");
    ExitCode::from(1)
}
