//! `dsm` command line.
//!
//! Every command computes all of its outputs in memory first and writes them
//! only when nothing failed, so an error never leaves a partial set of files.
//! Exit codes: 0 success, 1 degenerate computation, 2 configuration or I/O
//! error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::DsmError;
use crate::forward::{
    self, add_noise, load_far_field, synthesize_far_field, FarFieldData, FarFieldMetadata, NoiseSpec,
};
use crate::imaging::{self, compute_map, extract_peaks, IndicatorMap, MapSource, Peak, SearchGrid};
use crate::indicator::{predicted_peaks, theorem_residual, PeakPrediction};
use crate::model::{
    validate_scene, ExperimentConfig, Point2, Scene, Severity, ValidationIssue, WaveContext,
    DEFAULT_SEPARATION_THRESHOLD,
};
use crate::presets::PaperExample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEGENERATE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const DEFAULT_MIN_PEAK: f64 = 0.5;
pub const DEFAULT_MIN_SEPARATION: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "dsm",
    version,
    about = "Direct sampling imaging of small permeability inclusions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate far-field samples for a scene.
    Synthesize(SynthesizeArgs),
    /// Image far-field samples with the direct sampling indicator.
    Image(ImageArgs),
    /// Closed-form indicator map and peak positions for a scene.
    Predict(PredictArgs),
    /// Run one of the reference examples end to end.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene/experiment JSON file.
    #[arg(long)]
    pub scene: PathBuf,
    /// Override the wavelength from the scene file.
    #[arg(long)]
    pub wavelength: Option<f64>,
    /// Override the incident direction, degrees from the x axis.
    #[arg(long = "incident-deg", allow_negative_numbers = true)]
    pub incident_deg: Option<f64>,
    /// Lower bound on k*|x_m - x_m'| before a separation warning.
    #[arg(long, default_value_t = DEFAULT_SEPARATION_THRESHOLD)]
    pub separation_threshold: f64,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct PeakArgs {
    /// Search grid as x_min,x_max,y_min,y_max,step.
    #[arg(long, default_value_t = SearchGrid::DEFAULT, allow_hyphen_values = true)]
    pub grid: SearchGrid,
    /// Smallest normalized value reported as a peak.
    #[arg(long, default_value_t = DEFAULT_MIN_PEAK)]
    pub min_peak: f64,
    /// Minimum distance between reported peaks.
    #[arg(long, default_value_t = DEFAULT_MIN_SEPARATION)]
    pub min_separation: f64,
}

impl Default for PeakArgs {
    fn default() -> Self {
        PeakArgs {
            grid: SearchGrid::DEFAULT,
            min_peak: DEFAULT_MIN_PEAK,
            min_separation: DEFAULT_MIN_SEPARATION,
        }
    }
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Add complex Gaussian noise at this SNR (dB).
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Override the number of observation directions.
    #[arg(long = "num-dirs")]
    pub num_dirs: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    /// Far-field CSV; its JSON sidecar must sit next to it.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub which: PaperExample,
    #[arg(long = "num-dirs")]
    pub num_dirs: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<DsmError> for CliError {
    fn from(e: DsmError) -> Self {
        let code = match e {
            DsmError::Degenerate(_) => EXIT_DEGENERATE,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

/// Peak list entry in report JSON.
#[derive(Debug, Clone, Serialize)]
pub struct PeakEntry {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

impl From<&Peak> for PeakEntry {
    fn from(p: &Peak) -> Self {
        PeakEntry {
            x: p.position.x,
            y: p.position.y,
            value: p.value,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictedEntry {
    pub inclusion_index: usize,
    pub x: f64,
    pub y: f64,
}

fn predicted_entries(predictions: &[PeakPrediction]) -> Vec<PredictedEntry> {
    predictions
        .iter()
        .flat_map(|p| {
            p.positions.iter().map(move |pos| PredictedEntry {
                inclusion_index: p.inclusion_index,
                x: pos.x,
                y: pos.y,
            })
        })
        .collect()
}

/// `peaks.json` / `predicted.json`.
#[derive(Debug, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<PeakEntry>,
    pub predicted: Vec<PredictedEntry>,
    pub residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CenterValues {
    pub data: Vec<f64>,
    pub analytic: Vec<f64>,
}

/// `report.json` written by `example`.
#[derive(Debug, Serialize)]
pub struct ExampleReport {
    pub example: PaperExample,
    pub config: ExperimentConfig,
    pub grid: SearchGrid,
    pub noise: Option<NoiseSpec>,
    /// `μ₀/(μ_m+μ₀)` per inclusion.
    pub contrast_factors: Vec<f64>,
    pub offset_radius: f64,
    pub peaks: Vec<PeakEntry>,
    pub analytic_peaks: Vec<PeakEntry>,
    pub predicted: Vec<PredictedEntry>,
    pub residual: f64,
    /// Normalized map values at the node nearest each inclusion center.
    pub center_values: CenterValues,
    pub validation: Vec<ValidationIssue>,
}

/// Files produced by one command, written together at the end.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn add_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| config_error(e.to_string()))?;
        text.push('\n');
        self.add(path, text.into_bytes());
        Ok(())
    }

    fn add_map(&mut self, dir: &Path, stem: &str, map: &IndicatorMap) {
        self.add(dir.join(format!("{stem}.csv")), imaging::map_csv_bytes(map));
        self.add(dir.join(format!("{stem}.pgm")), imaging::map_pgm_bytes(map));
    }

    fn write(self, common: &CommonArgs) -> Result<(), CliError> {
        check_writable(common, self.files.iter().map(|(p, _)| p.as_path()))?;
        std::fs::create_dir_all(&common.out).map_err(|e| DsmError::io(&common.out, e))?;
        for (path, bytes) in self.files {
            std::fs::write(&path, bytes).map_err(|e| DsmError::io(&path, e))?;
        }
        Ok(())
    }
}

fn check_writable<'a>(common: &CommonArgs, paths: impl IntoIterator<Item = &'a Path>) -> Result<(), CliError> {
    if common.force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(config_error(format!(
                "{} already exists (use --force to overwrite)",
                p.display()
            )));
        }
    }
    Ok(())
}

fn load_scene_config(args: &SceneArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load(&args.scene)?;
    if let Some(l) = args.wavelength {
        config.wavelength = l;
    }
    if let Some(d) = args.incident_deg {
        config.incident_direction_degrees = d;
    }
    Ok(config)
}

/// Runs scene validation, printing warnings; errors abort.
fn check_scene(scene: &Scene, wave: &WaveContext, threshold: f64) -> Result<Vec<ValidationIssue>, CliError> {
    let report = validate_scene(scene, wave, threshold);
    for issue in &report.issues {
        let tag = match issue.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        eprintln!("{tag}: {}", issue.message);
    }
    if report.has_errors() {
        return Err(config_error("scene failed validation"));
    }
    Ok(report.issues)
}

fn noise_spec(args: &NoiseArgs) -> NoiseSpec {
    match args.snr_db {
        Some(snr) => NoiseSpec::new(snr, args.seed),
        None => NoiseSpec::noiseless(),
    }
}

fn synthesize_data(
    config: &ExperimentConfig,
    noise: &NoiseSpec,
) -> Result<(Scene, WaveContext, FarFieldData), CliError> {
    let scene = config.scene()?;
    let wave = config.wave()?;
    let obs = config.observations()?;
    let clean = synthesize_far_field(&scene, &wave, &obs);
    let data = add_noise(&clean, noise)?;
    Ok((scene, wave, data))
}

fn far_field_files(
    out: &mut Outputs,
    dir: &Path,
    data: &FarFieldData,
    meta: &FarFieldMetadata,
) -> Result<(), CliError> {
    let csv_path = dir.join("farfield.csv");
    out.add(forward::sidecar_path(&csv_path), forward_metadata_bytes(meta)?);
    out.add(csv_path, forward_csv_bytes(data)?);
    Ok(())
}

fn forward_csv_bytes(data: &FarFieldData) -> Result<Vec<u8>, CliError> {
    Ok(forward::far_field_csv(data)?)
}

fn forward_metadata_bytes(meta: &FarFieldMetadata) -> Result<Vec<u8>, CliError> {
    Ok(forward::metadata_json(meta)?)
}

fn cmd_synthesize(args: &SynthesizeArgs) -> Result<(), CliError> {
    let mut config = load_scene_config(&args.scene)?;
    if let Some(n) = args.num_dirs {
        config.num_observation_directions = n;
    }
    let noise = noise_spec(&args.noise);
    let (scene, wave, data) = synthesize_data(&config, &noise)?;
    check_scene(&scene, &wave, args.scene.separation_threshold)?;

    let meta = FarFieldMetadata::new(&wave, &data, Some(&scene), Some(&noise));
    let mut out = Outputs::default();
    far_field_files(&mut out, &args.common.out, &data, &meta)?;
    out.write(&args.common)
}

fn peak_entries(peaks: &[Peak]) -> Vec<PeakEntry> {
    peaks.iter().map(PeakEntry::from).collect()
}

fn cmd_image(args: &ImageArgs) -> Result<(), CliError> {
    let (data, meta) = load_far_field(&args.data)?;
    let grid = args.peaks.grid;
    let map = compute_map(
        MapSource::Data {
            data: &data,
            wavenumber: meta.wavenumber,
        },
        &grid,
    )?;
    let peaks = extract_peaks(&map, args.peaks.min_peak, args.peaks.min_separation);

    let (predicted, residual) = match &meta.scene {
        Some(scene) => {
            let wave = meta.wave()?;
            let residual = theorem_residual(&data, scene, &wave, &grid.points())?;
            (predicted_entries(&predicted_peaks(scene, &wave)), Some(residual))
        }
        None => (Vec::new(), None),
    };

    let mut out = Outputs::default();
    out.add_map(&args.common.out, "indicator", &map);
    out.add_json(
        args.common.out.join("peaks.json"),
        &PeakReport {
            peaks: peak_entries(&peaks),
            predicted,
            residual,
        },
    )?;
    out.write(&args.common)
}

fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let config = load_scene_config(&args.scene)?;
    let scene = config.scene()?;
    let wave = config.wave()?;
    check_scene(&scene, &wave, args.scene.separation_threshold)?;
    let map = compute_map(
        MapSource::Analytic {
            scene: &scene,
            wave: &wave,
        },
        &args.peaks.grid,
    )?;
    let peaks = extract_peaks(&map, args.peaks.min_peak, args.peaks.min_separation);

    let mut out = Outputs::default();
    out.add_map(&args.common.out, "analytic", &map);
    out.add_json(
        args.common.out.join("predicted.json"),
        &PeakReport {
            peaks: peak_entries(&peaks),
            predicted: predicted_entries(&predicted_peaks(&scene, &wave)),
            residual: None,
        },
    )?;
    out.write(&args.common)
}

/// Everything `example` computes, before serialization.
pub struct ExampleRun {
    pub scene: Scene,
    pub wave: WaveContext,
    pub data: FarFieldData,
    pub data_map: IndicatorMap,
    pub analytic_map: IndicatorMap,
    pub report: ExampleReport,
}

/// Runs a reference example in memory.
pub fn run_example(
    which: PaperExample,
    num_dirs: Option<usize>,
    noise: &NoiseSpec,
    peaks: &PeakArgs,
) -> Result<ExampleRun, CliError> {
    let mut config = which.config();
    if let Some(n) = num_dirs {
        config.num_observation_directions = n;
    }
    let (scene, wave, data) = synthesize_data(&config, noise)?;
    let validation = check_scene(&scene, &wave, DEFAULT_SEPARATION_THRESHOLD)?;
    let grid = peaks.grid;

    let data_map = compute_map(
        MapSource::Data {
            data: &data,
            wavenumber: wave.wavenumber,
        },
        &grid,
    )?;
    let analytic_map = compute_map(
        MapSource::Analytic {
            scene: &scene,
            wave: &wave,
        },
        &grid,
    )?;
    let data_peaks = extract_peaks(&data_map, peaks.min_peak, peaks.min_separation);
    let analytic_peaks = extract_peaks(&analytic_map, peaks.min_peak, peaks.min_separation);
    let predictions = predicted_peaks(&scene, &wave);
    let residual = theorem_residual(&data, &scene, &wave, &grid.points())?;

    let mu0 = scene.background_permeability;
    let centers: Vec<Point2> = scene.inclusions.iter().map(|i| i.center).collect();
    let report = ExampleReport {
        example: which,
        config,
        grid,
        noise: (!noise.is_noiseless()).then_some(*noise),
        contrast_factors: scene.inclusions.iter().map(|i| mu0 / (i.permeability + mu0)).collect(),
        offset_radius: predictions[0].offset_radius,
        peaks: peak_entries(&data_peaks),
        analytic_peaks: peak_entries(&analytic_peaks),
        predicted: predicted_entries(&predictions),
        residual,
        center_values: CenterValues {
            data: centers.iter().map(|&c| data_map.value_near(c)).collect(),
            analytic: centers.iter().map(|&c| analytic_map.value_near(c)).collect(),
        },
        validation,
    };
    Ok(ExampleRun {
        scene,
        wave,
        data,
        data_map,
        analytic_map,
        report,
    })
}

fn cmd_example(args: &ExampleArgs) -> Result<(), CliError> {
    let noise = noise_spec(&args.noise);
    let run = run_example(args.which, args.num_dirs, &noise, &args.peaks)?;
    let dir = &args.common.out;

    let mut out = Outputs::default();
    out.add_json(dir.join("scene.json"), &run.report.config)?;
    let meta = FarFieldMetadata::new(&run.wave, &run.data, Some(&run.scene), Some(&noise));
    far_field_files(&mut out, dir, &run.data, &meta)?;
    out.add_map(dir, "indicator", &run.data_map);
    out.add_map(dir, "analytic", &run.analytic_map);
    out.add_json(
        dir.join("peaks.json"),
        &PeakReport {
            peaks: run.report.peaks.clone(),
            predicted: run.report.predicted.clone(),
            residual: Some(run.report.residual),
        },
    )?;
    out.add_json(dir.join("report.json"), &run.report)?;
    out.write(&args.common)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Image(a) => cmd_image(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Example(a) => cmd_example(a),
    }
}

fn threads(cli: &Cli) -> usize {
    match &cli.command {
        Command::Synthesize(a) => a.common.threads,
        Command::Image(a) => a.common.threads,
        Command::Predict(a) => a.common.threads,
        Command::Example(a) => a.common.threads,
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads(&cli)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
