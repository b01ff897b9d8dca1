//! `facesym` command-line front end.
//!
//! Exit codes: 0 on success, 1 when the pipeline fails (the message carries
//! a stage label), 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use facesym_core::media_io::{self, ReportFormat};
use facesym_core::overlay::sequence_max;
use facesym_core::{
    analyze_sequence, calibrate_lambda, render_overlay, synthesize_asymmetric, Error, FlowParams,
    FrameSequence, LandmarkSet, OverlaySpec, RegionConfig, ScoreConfig, Side, Stage, SynthConfig,
};
use serde::Deserialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PIPELINE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "FACESYM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "facesym", version, about = "Facial motion asymmetry scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score left/right motion symmetry and write a report.
    Score(ScoreArgs),
    /// Freeze one face half at its first-frame appearance.
    Synthesize(SynthArgs),
    /// Write flow-magnitude heatmap overlays, one PNG per frame pair.
    Overlay(OverlayArgs),
    /// Write the face-crop flow of each frame pair as a .flo file.
    Flow(PipelineArgs),
    /// Fit lambda to (delta_v, expert_score) samples from a CSV file.
    Calibrate(CalibrateArgs),
    /// Print the JSON Schema of the landmark file format.
    LandmarkSchema,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Directory of frames.
    #[arg(long = "in")]
    input: PathBuf,
    /// Landmark JSON for the first frame.
    #[arg(long)]
    landmarks: PathBuf,
    /// Filename pattern selecting frames inside the directory.
    #[arg(long, default_value = "*.[pP][gnGN][mgMG]")]
    pattern: String,
    /// JSON file overriding crop and band margins.
    #[arg(long)]
    region_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file (score) or directory (overlay, flow).
    #[arg(long)]
    out: PathBuf,
    /// Score slope; overrides --config [default: 3.8]
    #[arg(long)]
    lambda: Option<f64>,
    /// Motion below this multiple of the mean magnitude is zeroed [default: 6]
    #[arg(long)]
    threshold_factor: Option<f64>,
    /// JSON score config: {"lambda": .., "threshold_factor": ..}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pyramid levels, including full resolution.
    #[arg(long)]
    flow_levels: Option<usize>,
    /// Averaging window of the flow solver (odd).
    #[arg(long)]
    flow_winsize: Option<usize>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Report format; defaults to csv for a .csv output, json otherwise.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct OverlayArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Heatmap weight in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory for the 16-bit PNG frames.
    #[arg(long)]
    out: PathBuf,
    /// Face half to freeze at its first-frame appearance.
    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    side: SideArg,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// CSV with header `delta_v,expert_score`.
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreConfigFile {
    lambda: Option<f64>,
    threshold_factor: Option<f64>,
}

/// Error from the CLI layer: a labelled pipeline error or a local failure.
#[derive(Debug)]
enum CliError {
    Pipeline(Error),
    Config(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Pipeline(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Pipeline(e) => write!(f, "{e}"),
            CliError::Config(msg) => write!(f, "[config] {msg}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn labelled(stage: Stage) -> impl Fn(Error) -> CliError {
    move |e| CliError::Pipeline(e.in_stage(stage))
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };

    // Commands write into a buffer so they can run inside the worker pool.
    let mut buf: Vec<u8> = Vec::new();
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(cli.command, &mut buf)),
        Ok(None) => dispatch(cli.command, &mut buf),
        Err(msg) => Err(CliError::Config(msg)),
    };
    let _ = out.write_all(&buf);
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_PIPELINE
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| e.to_string())
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> CliResult<()> {
    match command {
        Command::Score(args) => cmd_score(args, out),
        Command::Synthesize(args) => cmd_synthesize(args, out),
        Command::Overlay(args) => cmd_overlay(args, out),
        Command::Flow(args) => cmd_flow(args, out),
        Command::Calibrate(args) => cmd_calibrate(args, out),
        Command::LandmarkSchema => {
            let _ = out.write_all(media_io::LANDMARK_SCHEMA.as_bytes());
            Ok(())
        }
    }
}

struct Inputs {
    seq: FrameSequence,
    landmarks: LandmarkSet,
    regions: RegionConfig,
}

fn load_inputs(args: &InputArgs) -> CliResult<Inputs> {
    let seq = media_io::load_frame_sequence(&args.input, &args.pattern).map_err(labelled(Stage::Load))?;
    let landmarks = media_io::parse_landmarks(&args.landmarks).map_err(labelled(Stage::Landmarks))?;
    let regions = match &args.region_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RegionConfig::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => RegionConfig::default(),
    };
    Ok(Inputs {
        seq,
        landmarks,
        regions,
    })
}

fn score_config(args: &PipelineArgs) -> CliResult<ScoreConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ScoreConfigFile>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ScoreConfigFile::default(),
    };
    let defaults = ScoreConfig::default();
    let lambda = args.lambda.or(file.lambda).unwrap_or(defaults.lambda);
    let factor = args
        .threshold_factor
        .or(file.threshold_factor)
        .unwrap_or(defaults.threshold_factor);
    ScoreConfig::new(lambda, factor).map_err(|e| CliError::Config(e.to_string()))
}

fn flow_params(args: &PipelineArgs) -> FlowParams {
    let mut p = FlowParams::default();
    if let Some(levels) = args.flow_levels {
        p.pyramid_levels = levels;
    }
    if let Some(win) = args.flow_winsize {
        p.avg_window = win;
    }
    p
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| {
        CliError::Pipeline(
            Error::WriteError {
                path: dir.to_path_buf(),
                source,
            }
            .in_stage(Stage::Write),
        )
    })
}

fn stem(id: &str) -> &str {
    Path::new(id)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(id)
}

fn cmd_score(args: ScoreArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let p = &args.pipeline;
    let inputs = load_inputs(&p.input)?;
    let config = score_config(p)?;
    let analysis = analyze_sequence(
        &inputs.seq,
        &inputs.landmarks,
        &flow_params(p),
        &config,
        &inputs.regions,
    )?;
    let format = match args.format {
        Some(FormatArg::Json) => ReportFormat::Json,
        Some(FormatArg::Csv) => ReportFormat::Csv,
        None if p.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => ReportFormat::Csv,
        None => ReportFormat::Json,
    };
    media_io::write_report(&analysis.report, format, &p.out).map_err(labelled(Stage::Write))?;
    let _ = write!(out, "{}", analysis.report.summary_table());
    Ok(())
}

fn cmd_synthesize(args: SynthArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let inputs = load_inputs(&args.input)?;
    let config = SynthConfig {
        frozen_side: match args.side {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        },
    };
    let synth = synthesize_asymmetric(&inputs.seq, &inputs.landmarks, &config, &inputs.regions)
        .map_err(labelled(Stage::Synthesis))?;
    ensure_dir(&args.out)?;
    for (frame, id) in synth.frames().iter().zip(synth.source_ids()) {
        let path = args.out.join(format!("{}.png", stem(id)));
        media_io::write_frame_png16(frame, &path).map_err(labelled(Stage::Write))?;
    }
    let _ = writeln!(out, "wrote {} frames to {}", synth.len(), args.out.display());
    Ok(())
}

fn cmd_overlay(args: OverlayArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let p = &args.pipeline;
    let spec = OverlaySpec::new(args.alpha).map_err(|e| CliError::Config(e.to_string()))?;
    let inputs = load_inputs(&p.input)?;
    let analysis = analyze_sequence(
        &inputs.seq,
        &inputs.landmarks,
        &flow_params(p),
        &score_config(p)?,
        &inputs.regions,
    )?;
    ensure_dir(&p.out)?;
    let max = sequence_max(&analysis.magnitudes);
    let crop = analysis.regions.crop;
    for (t, mag) in analysis.magnitudes.iter().enumerate() {
        let frame = &inputs.seq.frames()[t + 1];
        let img = render_overlay(frame, mag, &crop, max, &spec).map_err(labelled(Stage::Write))?;
        let id = &inputs.seq.source_ids()[t + 1];
        let path = p.out.join(format!("overlay_{}.png", stem(id)));
        media_io::write_rgb_png(&img, &path).map_err(labelled(Stage::Write))?;
    }
    let _ = writeln!(
        out,
        "wrote {} overlays to {} (max magnitude {max})",
        analysis.magnitudes.len(),
        p.out.display()
    );
    Ok(())
}

fn cmd_flow(args: PipelineArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let inputs = load_inputs(&args.input)?;
    let analysis = analyze_sequence(
        &inputs.seq,
        &inputs.landmarks,
        &flow_params(&args),
        &score_config(&args)?,
        &inputs.regions,
    )?;
    ensure_dir(&args.out)?;
    for (t, flow) in analysis.flows.iter().enumerate() {
        let id = &inputs.seq.source_ids()[t + 1];
        let path = args.out.join(format!("flow_{}.flo", stem(id)));
        media_io::write_flow_file(flow, &path).map_err(labelled(Stage::Write))?;
    }
    let crop = analysis.regions.crop;
    let _ = writeln!(
        out,
        "wrote {} flow fields ({}x{} crop at {},{}) to {}",
        analysis.flows.len(),
        crop.width(),
        crop.height(),
        crop.x0,
        crop.y0,
        args.out.display()
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let samples = media_io::read_calibration_samples(&args.input).map_err(labelled(Stage::Load))?;
    let lambda = calibrate_lambda(&samples).map_err(labelled(Stage::Scoring))?;
    let _ = writeln!(out, "{lambda}");
    Ok(())
}
