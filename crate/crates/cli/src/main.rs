//! `cosfl`: gradient-compression experiments from the command line.
//!
//! Exit codes: 0 success, 2 usage or missing input file, 3 data/config
//! error, 4 internal invariant violation.

mod cmds;
mod tensor;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cosfl", version, about = "Cosine gradient quantization, baselines, and a FedAvg simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a federated experiment from a config file.
    Run(RunArgs),
    /// Print the per-interval error-bound table and the fraction of
    /// intervals beating linear quantization.
    AnalyzeIntervals(AnalyzeArgs),
    /// Quantize a raw f32 tensor into a .cgp packet and report stats.
    Quantize(QuantizeArgs),
    /// Decode a .cgp packet back into a raw f32 tensor.
    Dequantize(DequantizeArgs),
    /// Dump a .cgp packet header.
    Inspect(InspectArgs),
    /// Centralized gradient-ablation experiment (zero or perturb the
    /// top/rear gradient entries each step).
    Ablation(AblationArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (flat key-value TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports.csv, reports.jsonl and the checkpoint.
    #[arg(long)]
    out: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    bits: u8,
    /// Angle bound b in radians, in [0, pi/2).
    #[arg(long, default_value_t = 0.0)]
    bound: f64,
}

#[derive(Args)]
struct QuantizeArgs {
    /// Raw little-endian f32 tensor; length from the `<input>.len` sidecar
    /// when present, else from the file size.
    #[arg(long)]
    input: PathBuf,
    /// float32 | cosine | linear | sign | sign_norm
    #[arg(long, default_value = "cosine")]
    scheme: String,
    #[arg(long, default_value_t = 8)]
    bits: u8,
    /// Probabilistic (unbiased) rounding for cosine/linear.
    #[arg(long)]
    unbiased: bool,
    /// Fraction of top-magnitude entries clipped to tighten the bound.
    #[arg(long, default_value_t = 0.0)]
    clip: f64,
    /// Random-mask sparsification: fraction of coordinates kept.
    #[arg(long, default_value_t = 1.0)]
    kept: f64,
    /// Random Hadamard rotation before linear quantization.
    #[arg(long)]
    hadamard: bool,
    /// Seed for the mask and rotation diagonal.
    #[arg(long, default_value_t = 0)]
    mask_seed: u64,
    /// Seed for stochastic rounding.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Packet output path (ignored for --scheme float32).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DequantizeArgs {
    #[arg(long)]
    packet: PathBuf,
    /// Output raw f32 tensor path; a `<out>.len` sidecar is written too.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    packet: PathBuf,
}

#[derive(Args)]
struct AblationArgs {
    #[arg(long)]
    config: PathBuf,
    /// zero_top | zero_rear | noise_top | noise_rear
    #[arg(long)]
    mode: String,
    /// Fraction of gradient entries affected, by |value| rank.
    #[arg(long)]
    fraction: f64,
    /// Noise standard deviation for the noise modes.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Trace CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Error with a chosen process exit code.
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

impl From<cosfl::sim::SimError> for CmdError {
    fn from(e: cosfl::sim::SimError) -> Self {
        CmdError::data(e.to_string())
    }
}

impl From<cosfl::packing::PackError> for CmdError {
    fn from(e: cosfl::packing::PackError) -> Self {
        CmdError::data(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmds::run(args),
        Cmd::AnalyzeIntervals(args) => cmds::analyze_intervals(args),
        Cmd::Quantize(args) => cmds::quantize(args),
        Cmd::Dequantize(args) => cmds::dequantize(args),
        Cmd::Inspect(args) => cmds::inspect(args),
        Cmd::Ablation(args) => cmds::ablation(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            if e.code == 2 {
                eprintln!("run `cosfl --help` for usage");
            }
            ExitCode::from(e.code)
        }
    }
}
