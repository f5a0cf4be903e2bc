mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::{json_or_string, CliError, CliResult, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "bo3", version, about = "Third-order Benjamin-Ono numerical laboratory")]
struct Cli {
    /// JSON object of parameters for the invoked command; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frequencies omega_n^(k) of an action spectrum.
    Freq(FreqArgs),
    /// Exact flow of a gap sequence over a time grid.
    Evolve(EvolveArgs),
    /// Physical-space potential from one- or two-gap data.
    Reconstruct(ReconstructArgs),
    /// Two-gap traveling-wave condition gamma_p -> gamma_q.
    Classify(ClassifyArgs),
    /// Pseudo-spectral integration checked against the exact flow.
    PdeCompare(PdeCompareArgs),
    /// Stability, instability and ill-posedness constructions.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
enum Experiment {
    Instability(InstabilityArgs),
    Weak(WeakArgs),
    Illposed(IllposedArgs),
    Threegap(ThreeGapArgs),
    Stability(StabilityArgs),
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqArgs {
    /// Actions as inline JSON or a file: {"1": 1.0} or [{"n": 1, "gamma": 1.0}].
    #[arg(long)]
    #[serde(default, deserialize_with = "json_or_string")]
    pub actions: Option<String>,
    /// Hierarchy order (default 4).
    #[arg(long)]
    pub k: Option<usize>,
    /// Indices: `1,2,5` or `1..16`; defaults to the support.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveArgs {
    /// Gap sequence as inline JSON or a file: [{"n": 1, "re": 1.0, "im": 0.0}].
    #[arg(long)]
    #[serde(default, deserialize_with = "json_or_string")]
    pub gaps: Option<String>,
    /// Flow order (default 4).
    #[arg(long)]
    pub k: Option<usize>,
    /// `start:step:end` or a single time.
    #[arg(long)]
    pub t: Option<String>,
    /// Allow orders above 5.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub experimental: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub gamma_p: Option<f64>,
    #[arg(long)]
    pub gamma_q: Option<f64>,
    /// Birkhoff angle of zeta_p (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub phase_p: Option<f64>,
    /// Birkhoff angle of zeta_q (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub phase_q: Option<f64>,
    /// Full gap sequence instead of p/q/gamma flags.
    #[arg(long, conflicts_with_all = ["p", "q", "gamma_p", "gamma_q", "phase_p", "phase_q"])]
    #[serde(default, deserialize_with = "json_or_string")]
    pub gaps: Option<String>,
    /// Grid size (default 512).
    #[arg(long)]
    pub n: Option<usize>,
    /// `.json`, `.csv` (x,u) or binary BO3G for anything else.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub gamma_p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeCompareArgs {
    #[arg(long)]
    #[serde(default, deserialize_with = "json_or_string")]
    pub gaps: Option<String>,
    /// Final time (default 1).
    #[arg(long = "T", alias = "t-final")]
    pub t_final: Option<f64>,
    /// Grid size, a power of two (default 256).
    #[arg(long = "N", alias = "grid")]
    pub grid: Option<usize>,
    /// Time step (default min(1e-4, pi/(N/3)^3)).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Snapshots after t = 0 (default 10).
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// `hamiltonian` (default) or `literal`.
    #[arg(long)]
    pub frame: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilityArgs {
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub gamma_p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakArgs {
    #[arg(long)]
    #[serde(default, deserialize_with = "json_or_string")]
    pub gaps: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposedArgs {
    /// gamma_p = p^{-exponent} (default 1.75).
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeGapArgs {
    #[arg(long)]
    pub max_index: Option<usize>,
    #[arg(long)]
    pub lattice: Option<usize>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub zeta_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub zeta_im: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// `start:step:end` or a single time.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("BO3_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::validation(format!("BO3_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Freq(a) => commands::freq(file.resolve("freq", &a)?),
        Command::Evolve(a) => commands::evolve(file.resolve("evolve", &a)?),
        Command::Reconstruct(a) => commands::reconstruct(file.resolve("reconstruct", &a)?),
        Command::Classify(a) => commands::classify(file.resolve("classify", &a)?),
        Command::PdeCompare(a) => commands::pde_compare(file.resolve("pde-compare", &a)?),
        Command::Experiment(e) => match e {
            Experiment::Instability(a) => commands::instability(file.resolve("instability", &a)?),
            Experiment::Weak(a) => commands::weak(file.resolve("weak", &a)?),
            Experiment::Illposed(a) => commands::illposed(file.resolve("illposed", &a)?),
            Experiment::Threegap(a) => commands::threegap(file.resolve("threegap", &a)?),
            Experiment::Stability(a) => commands::stability(file.resolve("stability", &a)?),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
