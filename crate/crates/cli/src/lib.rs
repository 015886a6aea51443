//! Command-line front end: solves, codec utilities, the read-throughput
//! sweep and value/exponent histograms.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frsz2::basis::StorageFormat;

pub mod analyze;
pub mod bench;
pub mod codec;
pub mod io;
pub mod solve;

/// Exit status when a solve stops without reaching the target.
pub const EXIT_NOT_CONVERGED: u8 = 2;
/// Exit status for usage and input errors.
pub const EXIT_FAILURE: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "frsz2", version, about = "FRSZ2 compression and compressed-basis GMRES")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve A x = b with restarted CB-GMRES.
    Solve(SolveArgs),
    /// Compress, decompress or round-trip raw binary64 files.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Read-throughput sweep over storage formats and arithmetic intensities.
    Bench(BenchArgs),
    /// Value and base-2 exponent histograms.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// MatrixMarket coordinate file.
    #[arg(long, required_unless_present = "gen_convdiff", conflicts_with = "gen_convdiff")]
    pub matrix: Option<PathBuf>,
    /// Use a generated convection-diffusion operator on an NX x NY grid.
    #[arg(long, value_name = "NX[,NY]", value_parser = parse_grid)]
    pub gen_convdiff: Option<(usize, usize)>,
    /// Grid Peclet number of the generated operator.
    #[arg(long, default_value_t = 1.0)]
    pub peclet: f64,
    /// Scale rows geometrically so their magnitudes span this many decades.
    #[arg(long, value_name = "DECADES")]
    pub scale_decades: Option<f64>,
    /// f64, f32, f16, frsz2-<l> or frsz2-<l>-bs<BS>.
    #[arg(long, default_value = "f64")]
    pub format: StorageFormat,
    #[arg(long, default_value_t = 1e-10)]
    pub target_rrn: f64,
    /// Arnoldi steps per restart cycle.
    #[arg(long, default_value_t = 100)]
    pub restart: usize,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Re-orthogonalization threshold.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub eta: f64,
    /// Number of timed solves.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeat: u32,
    /// Residual history output (iteration,rrn,explicit).
    #[arg(long, default_value = "residuals.csv")]
    pub residuals: PathBuf,
    /// Also write the run as JSON.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    /// Raw binary64 file to FRSZ2 container.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// FRSZ2 container to raw binary64 file.
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compress and decompress in memory and report errors and sizes.
    Roundtrip {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ParamArgs {
    /// Bits per value.
    #[arg(long, default_value_t = 32)]
    pub bit_length: u32,
    /// Values per block.
    #[arg(long, default_value_t = frsz2::codec::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Vector length as a power of two.
    #[arg(long, default_value_t = 28, value_parser = clap::value_parser!(u32).range(0..=34))]
    pub log2_elements: u32,
    /// Comma-separated storage formats; defaults to the standard set.
    #[arg(long, value_delimiter = ',')]
    pub formats: Vec<StorageFormat>,
    /// Comma-separated operations per value; defaults to 1,2,4,...,128.
    #[arg(long, value_delimiter = ',')]
    pub intensities: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "bench.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// `.mtx` matrix, `.frsz2` container or raw binary64 file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value = "value_histogram.csv")]
    pub values_csv: PathBuf,
    #[arg(long, default_value = "exponent_histogram.csv")]
    pub exponents_csv: PathBuf,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("bad grid size `{p}`"));
    match s.split_once(',') {
        Some((nx, ny)) => Ok((parse(nx)?, parse(ny)?)),
        None => parse(s).map(|n| (n, n)),
    }
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve(args) => solve::run(&args),
        Command::Codec(cmd) => codec::run(&cmd).map(|()| 0),
        Command::Bench(args) => bench::run(&args).map(|()| 0),
        Command::Analyze(args) => analyze::run(&args).map(|()| 0),
    }
}

/// Parses `args` and runs the command. Usage errors exit with 1, keeping 2
/// free for solves that do not converge.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(EXIT_FAILURE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
