//! `chartextract`: generate synthetic charts, detect their elements, convert
//! detections to data series and score the results.

mod commands;
mod overlay;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use chartextract_core::ChartType;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bad flags, missing inputs or malformed input documents. Exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[macro_export]
macro_rules! usage {
    ($($arg:tt)*) => {
        anyhow::Error::new($crate::UsageError(format!($($arg)*)))
    };
}

#[derive(Debug, Parser)]
#[command(
    name = "chartextract",
    version,
    about = "Extract data series from chart images"
)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "CHARTEXTRACT_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with ground truth.
    Generate(GenerateArgs),
    /// Detect chart elements.
    Detect(DetectArgs),
    /// Convert detections into data series.
    Convert(ConvertArgs),
    /// Score predictions against a corpus.
    Evaluate(EvaluateArgs),
    /// Generate (or read) a corpus, then detect, convert and evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Comma-separated chart types, equally weighted. Defaults to every type.
    #[arg(long, value_delimiter = ',', value_parser = parse_chart_type)]
    pub types: Vec<ChartType>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// Either a corpus directory or a single image with its annotation.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Corpus directory containing manifest.json.
    #[arg(long, conflicts_with_all = ["image", "annotation"])]
    pub corpus: Option<PathBuf>,
    #[arg(long, requires = "annotation")]
    pub image: Option<PathBuf>,
    #[arg(long, requires = "image")]
    pub annotation: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detector {
    /// cc-bars for bar and boxplot charts, cc-points otherwise.
    Auto,
    CcBars,
    CcPoints,
    /// Detection JSON or heatmap PNG files from `--input`.
    ExternalFile,
    /// Ground-truth detections of the corpus.
    Oracle,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Detector::Auto)]
    pub detector: Detector,
    /// Directory of `{id}.detections.json` or `{id}.heatmap.png` files for
    /// the external-file detector.
    #[arg(long = "input")]
    pub external: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `{id}.overlay.png` with the detections drawn in red.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Features {
    Rgb,
    Hsv,
    #[value(name = "rgb+hsv")]
    RgbHsv,
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long, value_enum, default_value_t = Features::Rgb)]
    pub features: Features,
    /// Patch embeddings, one `patch-id<TAB>v1,...,v128` line each.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Directory of `{id}.detections.json` files.
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, value_enum, default_value_t = SeriesFormat::Json)]
    pub format: SeriesFormat,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corpus directory holding the ground truth.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of `{id}.detections.json` and `{id}.series.json` (or `.csv`)
    /// predictions. Missing files count as empty predictions.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory receiving report.json and report.txt.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = chartextract_core::eval::DEFAULT_NAME_WEIGHT)]
    pub name_weight: f64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Read this corpus instead of generating one.
    #[arg(long = "corpus", conflicts_with_all = ["seed", "count", "types"])]
    pub existing: Option<PathBuf>,
    #[arg(long, default_value = "pipeline-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Detector::Auto)]
    pub detector: Detector,
    /// Directory of external detections, as for `detect`.
    #[arg(long = "input")]
    pub external: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, default_value_t = chartextract_core::eval::DEFAULT_NAME_WEIGHT)]
    pub name_weight: f64,
    /// Write overlays under `<out>/overlays`.
    #[arg(long)]
    pub overlay: bool,
}

fn parse_chart_type(s: &str) -> Result<ChartType, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = ChartType::ALL.iter().map(|t| t.as_str()).collect();
        format!("expected one of bar, boxplot, {}", names.join(", "))
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool.build()?;
    pool.install(|| match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Convert(a) => commands::convert(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Pipeline(a) => commands::pipeline(&a),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
