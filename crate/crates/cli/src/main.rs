mod commands;
mod manifest;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use cs_interlace::linksim::{ChannelModel, Combining, Normalization, Scheme};

#[derive(Parser)]
#[command(name = "csil", version, about = "Complementary sequences for OFDM interlaces")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "CSIL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an interlaced frequency-domain sequence and write it as JSON.
    BuildInterlace(BuildArgs),
    /// PAPR of spectra or of imported sequences mapped onto an interlace.
    EvalPapr(EvalArgs),
    /// Cubic metric, same inputs as eval-papr.
    EvalCm(EvalArgs),
    /// Pairwise fractional-shift cross-correlation within sequence sets.
    EvalXcorr(XcorrArgs),
    /// Greedy search for low cross-correlation GCP sets.
    SearchSets(SearchArgs),
    /// Monte-Carlo DTX/ACK/NACK detection.
    SimulateLink(SimArgs),
    /// Regenerate a figure or table dataset and check it.
    Reproduce(ReproduceArgs),
    /// Validate a sequence file and write it in normalized form.
    ImportSequences(ImportArgs),
    /// Enumerate canonical quaternary GCPs of one length.
    EnumerateGcps(EnumArgs),
}

#[derive(Args, Clone, Copy, Serialize)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 10)]
    pub n_rb: usize,
    #[arg(long, default_value_t = 12)]
    pub n_sc: usize,
    #[arg(long, default_value_t = 108)]
    pub n_null: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Noncoherent,
    Adjacent,
    Coherent,
}

#[derive(Args, Serialize)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value = "noncoherent")]
    pub layout: Layout,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Table-1 pair carried by each resource block (non-coherent layouts).
    #[arg(long, default_value_t = 0)]
    pub pair: usize,
    /// Cyclic shift of the RB pair (non-coherent layouts).
    #[arg(long, default_value_t = 0.0)]
    pub shift: f64,
    /// Index into {e^{i pi/4}, e^{i 3pi/4}, e^{-i pi/4}, e^{-i 3pi/4}} (coherent).
    #[arg(long, default_value_t = 0)]
    pub omega1: usize,
    #[arg(long, default_value_t = 0)]
    pub omega2: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    /// Spectrum JSON files as written by build-interlace.
    pub spectra: Vec<PathBuf>,
    /// Sequence file (see import-sequences); each sequence is mapped onto the
    /// interlace, or cycled across its blocks if it is one block long.
    #[arg(long)]
    pub sequences: Option<PathBuf>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = 4096)]
    pub n_idft: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct XcorrArgs {
    /// Sequence file; the shipped Table-1 sets when omitted.
    #[arg(long)]
    pub sets: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub u: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0.715)]
    pub beta: f64,
    #[arg(long, default_value_t = 128)]
    pub u: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    /// JSON array of `[a, b]` pairs; the enumerated length-12 library when omitted.
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// Directory caching enumerated libraries.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value = "sets.json")]
    pub out: PathBuf,
}

fn kebab<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Args, Serialize)]
pub struct SimArgs {
    /// non-coherent, coherent, single-rb-non-coherent or single-rb-coherent.
    #[arg(long, value_parser = kebab::<Scheme>, default_value = "non-coherent")]
    pub scheme: Scheme,
    /// flat or iid-per-rb.
    #[arg(long, value_parser = kebab::<ChannelModel>, default_value = "iid-per-rb")]
    pub channel: ChannelModel,
    /// per-rb or joint.
    #[arg(long, value_parser = kebab::<Combining>, default_value = "per-rb")]
    pub combining: Combining,
    /// equal-total-energy or equal-per-tone.
    #[arg(long, value_parser = kebab::<Normalization>, default_value = "equal-total-energy")]
    pub normalization: Normalization,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub snr_from: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub snr_to: f64,
    #[arg(long, default_value_t = 2.0)]
    pub snr_step: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 100_000)]
    pub calibration_trials: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dtx_target: f64,
    #[arg(long, default_value_t = 2)]
    pub n_rx: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Papr,
    Cm,
    Xcorr,
    SimNoncoherent,
    SimCoherent,
}

#[derive(Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Trials per SNR point (simulations only).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 100_000)]
    pub calibration_trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Serialize)]
pub struct ImportArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EnumArgs {
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command: passing, or failing one of its embedded checks.
pub enum Status {
    Ok,
    ChecksFailed,
}

fn dispatch(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::BuildInterlace(a) => commands::build_interlace(&a),
        Command::EvalPapr(a) => commands::eval(&a, commands::Metric::Papr),
        Command::EvalCm(a) => commands::eval(&a, commands::Metric::Cm),
        Command::EvalXcorr(a) => commands::eval_xcorr(&a),
        Command::SearchSets(a) => commands::search_sets(&a),
        Command::SimulateLink(a) => commands::simulate_link(&a),
        Command::Reproduce(a) => reproduce::run(&a),
        Command::ImportSequences(a) => commands::import_sequences(&a),
        Command::EnumerateGcps(a) => commands::enumerate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
