//! `dctfuse`: fuse multi-focus PGM images on 8x8 DCT blocks, generate
//! synthetic benchmark data, evaluate fused images and benchmark methods.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use dctfuse::harness::Method;
use dctfuse::FocusMeasure;

#[derive(Debug, Parser)]
#[command(
    name = "dctfuse",
    version,
    about = "Multi-focus image fusion in the DCT block domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse two or more registered source images.
    Fuse(FuseArgs),
    /// Write split-focus source pairs with ground truth.
    GenDataset(GenDatasetArgs),
    /// Print quality metrics for a fused image as CSV.
    Eval(EvalArgs),
    /// Benchmark fusion methods over a generated dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    SmlDct,
    VarianceDct,
    AcMax,
    SmlSpatial,
}

impl From<MeasureArg> for FocusMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::SmlDct => FocusMeasure::SmlDct,
            MeasureArg::VarianceDct => FocusMeasure::VarianceDct,
            MeasureArg::AcMax => FocusMeasure::AcMax,
            MeasureArg::SmlSpatial => FocusMeasure::SmlSpatial,
        }
    }
}

#[derive(Debug, Args)]
struct FuseArgs {
    /// Source images (binary PGM), at least two.
    #[arg(long, num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,
    /// Fused output image.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "sml-dct")]
    measure: MeasureArg,
    /// Decision threshold T; blocks within T of each other are averaged.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    threshold: f64,
    /// Enable 3x3 consistency verification (default).
    #[arg(long, overrides_with = "no_cv")]
    cv: bool,
    /// Disable consistency verification.
    #[arg(long, overrides_with = "cv")]
    no_cv: bool,
    /// Write decision/refined maps as text grids into this directory.
    #[arg(long)]
    dump_maps: Option<PathBuf>,
    /// Pixel step of the spatial modified Laplacian (sml-spatial only).
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Minimum modified-Laplacian value counted by sml-spatial.
    #[arg(long, default_value_t = 0.0)]
    ml_threshold: f64,
}

#[derive(Debug, Args)]
struct GenDatasetArgs {
    /// Directory of pristine PGM images.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Number of procedurally generated pristine images to add.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Side length of synthetic images (multiple of 16).
    #[arg(long, default_value_t = 512)]
    size: usize,
    /// Disk blur radii.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 7, 9])]
    radii: Vec<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    fused: PathBuf,
    /// All-in-focus reference; enables SSIM.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    /// The two source images; enables MI and Q^AB/F.
    #[arg(long, num_args = 2)]
    sources: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory laid out by `gen-dataset`.
    #[arg(long)]
    dataset: PathBuf,
    /// Methods as `<measure>` or `<measure>+cv`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "variance-dct,variance-dct+cv,ac-max,sml-dct+cv"
    )]
    methods: Vec<Method>,
    /// Timing repetitions; the median is reported.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    threshold: f64,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const DIMENSION: u8 = 4;

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }
}

impl From<dctfuse::Error> for Failure {
    fn from(e: dctfuse::Error) -> Self {
        let code = match e.class() {
            dctfuse::ErrorClass::Usage => Self::USAGE,
            dctfuse::ErrorClass::Io => Self::IO,
            dctfuse::ErrorClass::Dimension => Self::DIMENSION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn clap_failure(e: clap::Error) -> Failure {
    let rendered = e.render().to_string();
    let msg = rendered
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments")
        .trim_start_matches("error:")
        .trim();
    let usage = rendered
        .lines()
        .find_map(|l| l.trim().strip_prefix("Usage:"))
        .map(|u| format!("; usage:{u}"))
        .unwrap_or_default();
    Failure::usage(format!("{msg}{usage}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = clap_failure(e);
            eprintln!("error: {}", single_line(&f.message));
            return ExitCode::from(f.code);
        }
    };
    let result = match cli.command {
        Command::Fuse(args) => commands::fuse(args),
        Command::GenDataset(args) => commands::gen_dataset(args),
        Command::Eval(args) => commands::eval(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", single_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}
