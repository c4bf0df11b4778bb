mod commands;
mod config;
mod io;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

/// Misuse of the command line, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "faultbench", version, about = "Seismic fault delineation evaluation toolkit")]
pub struct Cli {
    /// Run file of `key = value` lines; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for per-section and per-pair work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a SEG-Y, raw or NPY volume to another container.
    Ingest(IngestArgs),
    /// Apply a volume-wide amplitude normalization.
    Normalize(NormalizeArgs),
    /// Cut every section of a volume into overlapping patches.
    Tile(TileArgs),
    /// Reassemble per-patch predictions into full sections.
    Stitch(StitchArgs),
    /// Skeletonize and dilate binary masks.
    Standardize(StandardizeArgs),
    /// Pick the dataset-wide best threshold for probability maps.
    Threshold(ThresholdArgs),
    /// Score predictions against labels and emit a report.
    Eval(EvalArgs),
    /// Run a synthetic metric-robustness experiment.
    Simulate(SimulateArgs),
    /// Merge, rank and render saved evaluation reports.
    Report(ReportArgs),
    /// Print amplitude statistics of a volume.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct VolumeInput {
    /// Volume file: .sgy/.segy, .npy, or .raw/.bin with --dims.
    #[arg(long = "in", visible_alias = "volume", value_name = "FILE")]
    pub input: PathBuf,
    /// Inline,crossline,sample counts for raw input.
    #[arg(long, value_name = "I,X,S")]
    pub dims: Option<String>,
    #[arg(long, value_enum, default_value_t = Endian::Little)]
    pub endian: Endian,
    /// 1-based trace-header byte of the inline number.
    #[arg(long, default_value_t = 189)]
    pub inline_byte: usize,
    /// 1-based trace-header byte of the crossline number.
    #[arg(long, default_value_t = 193)]
    pub crossline_byte: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub volume: VolumeInput,
    /// Output file; the extension picks the container.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// SEG-Y sample format for .sgy output: 1 (IBM) or 5 (IEEE).
    #[arg(long, default_value_t = 5)]
    pub format_code: u16,
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    #[command(flatten)]
    pub volume: VolumeInput,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Normalizer name: minmax or zscore.
    #[arg(long, default_value = "zscore")]
    pub mode: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisArg {
    Inline,
    Crossline,
}

#[derive(Args, Debug)]
pub struct TileArgs {
    #[command(flatten)]
    pub volume: VolumeInput,
    /// Output directory for patches.npy and patches.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub window: usize,
    #[arg(long, default_value_t = 64)]
    pub stride: usize,
    #[arg(long, value_enum, default_value_t = AxisArg::Inline)]
    pub axis: AxisArg,
    /// reflect, zero_pad or drop_partial.
    #[arg(long, default_value = "reflect")]
    pub pad: String,
}

#[derive(Args, Debug)]
pub struct StitchArgs {
    /// Directory written by `tile`.
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Prediction stack aligned with the tiled patches; defaults to the
    /// patches themselves.
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,
    /// Output directory for one .npy per section.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct StandardizeArgs {
    /// Mask file or directory of .png/.npy masks.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Structuring element: square or cross.
    #[arg(long, default_value = "square")]
    pub element: String,
    #[arg(long, default_value_t = 1)]
    pub dilations: usize,
    /// Cut-off for probability-map inputs.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Directory of probability maps (.npy) or masks.
    #[arg(long, value_name = "DIR")]
    pub pred: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub gt: PathBuf,
    /// Grid spacing; thresholds are multiples of it below 1.
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Skip skeletonize+dilate after binarizing.
    #[arg(long)]
    pub no_standardize: bool,
    /// Average per-section Dice instead of pooling pixel counts.
    #[arg(long)]
    pub macro_dice: bool,
    /// Write the binarized predictions here as PNG.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_name = "DIR")]
    pub pred: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub gt: PathBuf,
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Evaluate masks as given, without skeletonize+dilate.
    #[arg(long)]
    pub no_standardize: bool,
    /// Cut-off for probability-map predictions.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// cracks, thebe, faultseg3d or custom:<file.json>.
    #[arg(long)]
    pub split: Option<String>,
    /// Configuration name; defaults to the prediction directory name.
    #[arg(long)]
    pub name: Option<String>,
    /// Test-set name; defaults to the split or label directory name.
    #[arg(long)]
    pub test_set: Option<String>,
    /// Score empty-mask pairs with the image diagonal instead of skipping them.
    #[arg(long)]
    pub penalize_degenerate: bool,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Sparsity,
    Contradiction,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Experiment::Sparsity)]
    pub experiment: Experiment,
    /// Output directory for the table and mask dumps.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Override the number of sparsity trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the contradiction search budget.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// JSON reports written by `eval`.
    #[arg(long = "in", value_name = "FILE", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "md")]
    pub format: String,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub volume: VolumeInput,
}

fn run(args: Vec<OsString>) -> anyhow::Result<()> {
    let args = config::merge_config(&Cli::command(), args)?;
    let cli = Cli::try_parse_from(args)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return ExitCode::from(clap_err.exit_code() as u8);
            }
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
