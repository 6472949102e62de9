//! `dhs`: depth-sensor frames to pseudo-images, augmentation previews,
//! detection scoring, and backbone arithmetic from one binary.

mod commands;
mod config;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "dhs",
    version,
    about = "Point-cloud pseudo-image pipeline: convert, augment, evaluate, analyze"
)]
struct Cli {
    /// TOML pipeline configuration; flags override its values.
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Augmentation seed override.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads (0 = runtime default).
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,

    /// Log progress details (same as RUST_LOG=debug).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthModeArg {
    /// Euclidean distance from the sensor.
    Range,
    /// Distance along the optical axis.
    OpticalAxis,
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpolationArg {
    /// 101-point interpolation.
    Coco101,
    /// 11-point interpolation.
    Pascal11,
}

#[derive(Args)]
struct ConvertArgs {
    /// Dataset manifest (JSON); falls back to [dataset].manifest.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Output directory; falls back to [dataset].output_dir, then
    /// $DHS_CACHE_DIR, then ./dhs-out.
    #[arg(short, long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// PNG bits per channel (8 or 16).
    #[arg(long, value_name = "BITS")]
    bit_depth: Option<u8>,

    /// Depth channel reading.
    #[arg(long, value_enum)]
    depth_mode: Option<DepthModeArg>,

    /// Percentile of the up coordinate used as the height floor.
    #[arg(long, value_name = "Q")]
    height_percentile: Option<f64>,
}

#[derive(Args)]
struct PreviewArgs {
    /// Dataset manifest (JSON); falls back to [dataset].manifest.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Directory holding converted frames; previews are written there.
    #[arg(short, long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Frame id to preview; omit to preview every annotated frame.
    #[arg(long, value_name = "ID")]
    frame: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth file (JSONL or COCO document).
    #[arg(long, value_name = "FILE", requires = "det")]
    gt: Option<PathBuf>,

    /// Detection file (JSONL or COCO results array).
    #[arg(long, value_name = "FILE", requires = "gt")]
    det: Option<PathBuf>,

    /// Precomputed per-category AP values (JSON object); subgroup means
    /// are computed from these instead of raw boxes.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["gt", "det"])]
    precomputed: Option<PathBuf>,

    /// Subgroup spec file; repeatable. Extends [eval].subgroups.
    #[arg(long = "subgroups", value_name = "FILE")]
    subgroups: Vec<PathBuf>,

    /// Precision sampling rule.
    #[arg(long, value_enum)]
    interpolation: Option<InterpolationArg>,

    /// Write the full report as JSON.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,

    /// Write the per-category table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Built-in backbone: resnet50 or swin_t.
    #[arg(long, value_name = "NAME", conflicts_with = "spec")]
    preset: Option<String>,

    /// Backbone spec file (JSON).
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,

    /// Input size as HxW (default: the spec's nominal input).
    #[arg(long, value_name = "HxW")]
    input: Option<String>,

    /// Print cumulative receptive fields, one stage per line.
    #[arg(long)]
    rf: bool,

    /// One-off convolution cost: H,W,C_IN,K,C_OUT.
    #[arg(long, value_name = "H,W,CIN,K,COUT")]
    flops: Option<String>,

    /// Feature tensor to diagnose (prints shape and sparsity).
    #[arg(long, value_name = "FILE")]
    tensor: Option<PathBuf>,

    /// Write an activation histogram as JSON (needs --tensor).
    #[arg(long, value_name = "FILE", requires = "tensor")]
    histogram: Option<PathBuf>,

    /// Histogram bin count.
    #[arg(long, default_value_t = 64, value_name = "N")]
    bins: usize,

    /// Re-bin over this normalized window, LO,HI in [0,1].
    #[arg(long, value_name = "LO,HI", requires = "histogram")]
    zoom: Option<String>,

    /// Write a channel montage as PNG (needs --tensor).
    #[arg(long, value_name = "FILE", requires = "tensor")]
    montage: Option<PathBuf>,

    /// Montage grid as RxC (default: a conventional or near-square grid).
    #[arg(long, value_name = "RxC", requires = "montage")]
    grid: Option<String>,

    /// Sparsity threshold: count |v| <= eps as inactive.
    #[arg(long, default_value_t = 1e-6, value_name = "EPS")]
    eps: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Saved report JSON to render.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Also write the per-category table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert manifest frames into pseudo-image PNGs with sidecars.
    Convert(ConvertArgs),
    /// Apply one seeded training-augmentation draw to converted frames.
    AugmentPreview(PreviewArgs),
    /// Score detections against ground truth.
    Eval(EvalArgs),
    /// Backbone arithmetic and feature-tensor diagnostics.
    Analyze(AnalyzeArgs),
    /// Re-render a saved evaluation report.
    Report(ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    let mut builder = env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or(if cli.verbose { "debug" } else { "warn" }),
    );
    builder.format_timestamp(None).init();

    if !dhs_core::parallel::configure_threads(cli.jobs) {
        log::warn!("worker pool already started; --jobs {} ignored", cli.jobs);
    }

    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.augment.seed = seed;
    }

    match cli.command {
        Command::Convert(args) => commands::convert::run(&config, args),
        Command::AugmentPreview(args) => commands::preview::run(&config, args),
        Command::Eval(args) => commands::eval::run(&config, args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Report(args) => commands::report::run(args),
    }
}

/// Parses "AxB" into two positive integers.
fn parse_pair(text: &str, what: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow::anyhow!("{what} must look like AxB, got {text:?}"))?;
    let parse = |s: &str| -> Result<usize> {
        let v: usize = s.trim().parse()?;
        anyhow::ensure!(v > 0, "{what}: components must be positive");
        Ok(v)
    };
    Ok((parse(a)?, parse(b)?))
}
