//! The `spillover-lab` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spillover_core::analyzer::{
    bound_inference, classify_identification, mediated_component_note, KappaSign,
};
use spillover_core::estimator::{fit_gain_score_with, spillover_from_fit, CovarianceType};
use spillover_core::graph::{enumerate_paths_with, PathOptions};
use spillover_core::simulator::{ExposureMode, ModelSource, Simulation, SimulationConfig};
use spillover_core::{Param, StructuralParams};

use crate::data::{load_pair_csv, save_pair_csv};
use crate::error::{LabError, Result};
use crate::model_file::load_model;
use crate::parallel::{figure4, monte_carlo, thread_count};
use crate::plot::dot_whisker_svg;
use crate::report::{
    summary_records, to_csv, to_json, EstimateReport, IdentifyReport, PathRecord,
};

#[derive(Debug, Parser)]
#[command(
    name = "spillover-lab",
    version,
    about = "Gain-score estimation and simulation of sibling spillover effects"
)]
pub struct Cli {
    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo study of one model.
    Simulate(SimulateArgs),
    /// Fit the gain-score regression to a pair CSV.
    Estimate(EstimateArgs),
    /// Classify what the spillover coefficient identifies in a model.
    Identify(IdentifyArgs),
    /// List the paths between two variables.
    Paths(PathsArgs),
    /// Monte Carlo study of all nine built-in models.
    Figure4(Figure4Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Thresholded 0/1 exposures.
    Binary,
    /// Continuous exposures with their own unit-variance noise.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Positive,
    Negative,
    Zero,
    Unknown,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset name (fig1a … fig3c) or model JSON file.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "binary")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
    /// Override a preset parameter, e.g. `--set theta=-2.11`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Also write one simulated dataset as a pair CSV.
    #[arg(long, value_name = "PATH")]
    pub emit_sample: Option<PathBuf>,
    /// Replicate written by `--emit-sample`.
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Include the `cov_*` columns as regressors.
    #[arg(long)]
    pub adjust: bool,
    /// HC1 heteroskedasticity-robust standard errors.
    #[arg(long)]
    pub robust: bool,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = spillover_core::analyzer::DEFAULT_DRAWS)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    /// Assumed sign of the reverse spillover; defaults to the model's own.
    #[arg(long, value_enum)]
    pub kappa_sign: Option<SignArg>,
    /// SC value to bound from; defaults to the model's population SC.
    #[arg(long, allow_hyphen_values = true)]
    pub sc: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    /// Conditioning set, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,
    /// Include paths through colliders.
    #[arg(long)]
    pub all: bool,
    /// Permit the gain score in the conditioning set.
    #[arg(long)]
    pub allow_derived_conditioning: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Figure4Args {
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
    /// Also write the dot-and-whisker plot here.
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| LabError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| LabError::io("<stdout>", e)),
    }
}

fn reject_svg(output: &Output, subcommand: &str) -> Result<()> {
    if output.format == Format::Svg {
        return Err(LabError::Usage(format!(
            "svg output is only available for simulate and figure4, not {subcommand}"
        )));
    }
    Ok(())
}

fn parse_overrides(pairs: &[String], params: &mut StructuralParams) -> Result<()> {
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| LabError::Usage(format!("--set expects NAME=VALUE, got {pair:?}")))?;
        let param = Param::from_symbol(name.trim())
            .ok_or_else(|| LabError::Usage(format!("unknown parameter {name:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| LabError::Usage(format!("--set {name}: {value:?} is not a number")))?;
        params.set(param, value);
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let loaded = load_model(&args.model)?;
    let mut config = SimulationConfig {
        n_obs: args.n,
        n_reps: args.reps,
        master_seed: args.seed,
        exposure_mode: match args.mode {
            Mode::Binary => ExposureMode::BinaryThreshold,
            Mode::Linear => ExposureMode::LinearGaussian,
        },
        confidence_level: args.conf,
        ..SimulationConfig::default()
    };
    match loaded.preset {
        Some(preset) => {
            config.model = ModelSource::Preset(preset);
            config.params = StructuralParams::figure4(preset);
            parse_overrides(&args.set, &mut config.params)?;
        }
        None => {
            if !args.set.is_empty() {
                return Err(LabError::Usage(
                    "--set applies to presets; edit the model file instead".into(),
                ));
            }
            config.model = ModelSource::Custom {
                name: loaded.name,
                model: loaded.model,
            };
        }
    }
    if let Some(path) = &args.emit_sample {
        let sample = Simulation::new(&config)?.sample(args.replicate)?;
        save_pair_csv(&sample, path)?;
    }
    let summary = monte_carlo(&config, thread_count()?)?;
    let text = match args.output.format {
        Format::Csv => to_csv(&summary_records(std::slice::from_ref(&summary)))?,
        Format::Json => to_json(&summary_records(std::slice::from_ref(&summary))[0]),
        Format::Svg => dot_whisker_svg(std::slice::from_ref(&summary)),
    };
    emit(&args.output, &text, stdout)
}

fn estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    reject_svg(&args.output, "estimate")?;
    let loaded = load_pair_csv(&args.data)?;
    let covariance = if args.robust {
        CovarianceType::Robust
    } else {
        CovarianceType::Classical
    };
    let fit = fit_gain_score_with(&loaded.dataset, args.adjust, covariance)?;
    let report = EstimateReport::new(
        &spillover_from_fit(fit, args.adjust, args.conf)?,
        loaded.dropped,
    )?;
    let text = match args.output.format {
        Format::Json => to_json(&report),
        _ => report.to_csv()?,
    };
    emit(&args.output, &text, stdout)
}

fn identify(args: &IdentifyArgs, stdout: &mut dyn Write) -> Result<()> {
    reject_svg(&args.output, "identify")?;
    let loaded = load_model(&args.model)?;
    let verdict = classify_identification(&loaded.model, args.draws, args.seed)?;
    let sign = match args.kappa_sign {
        Some(SignArg::Positive) => KappaSign::Positive,
        Some(SignArg::Negative) => KappaSign::Negative,
        Some(SignArg::Zero) => KappaSign::Zero,
        Some(SignArg::Unknown) => KappaSign::Unknown,
        None => {
            let kappa = loaded.model.coefficient("T2", "Y1");
            if kappa > 0.0 {
                KappaSign::Positive
            } else if kappa < 0.0 {
                KappaSign::Negative
            } else {
                KappaSign::Zero
            }
        }
    };
    let bound = bound_inference(args.sc.unwrap_or(verdict.population_sc), sign);
    let note = mediated_component_note(&loaded.model);
    let report = IdentifyReport::new(&loaded.name, &verdict, &bound, note.as_ref());
    let text = match args.output.format {
        Format::Json => to_json(&report),
        _ => report.to_csv()?,
    };
    emit(&args.output, &text, stdout)
}

fn paths(args: &PathsArgs, stdout: &mut dyn Write) -> Result<()> {
    reject_svg(&args.output, "paths")?;
    let loaded = load_model(&args.model)?;
    let options = PathOptions {
        allow_derived_conditioning: args.allow_derived_conditioning,
        ..PathOptions::default()
    };
    let found = enumerate_paths_with(&loaded.model, &args.from, &args.to, &args.given, &options)?;
    let records: Vec<PathRecord> = found
        .iter()
        .filter(|p| args.all || !p.has_collider())
        .map(PathRecord::from)
        .collect();
    let text = match args.output.format {
        Format::Json => to_json(&records),
        _ => to_csv(&records)?,
    };
    emit(&args.output, &text, stdout)
}

fn figure4_command(args: &Figure4Args, stdout: &mut dyn Write) -> Result<()> {
    let summaries = figure4(args.n, args.reps, args.seed, args.conf, thread_count()?)?;
    if let Some(path) = &args.plot {
        fs::write(path, dot_whisker_svg(&summaries)).map_err(|e| LabError::io(path, e))?;
    }
    let text = match args.output.format {
        Format::Csv => to_csv(&summary_records(&summaries))?,
        Format::Json => to_json(&summary_records(&summaries)),
        Format::Svg => dot_whisker_svg(&summaries),
    };
    emit(&args.output, &text, stdout)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Estimate(a) => estimate(a, stdout),
        Command::Identify(a) => identify(a, stdout),
        Command::Paths(a) => paths(a, stdout),
        Command::Figure4(a) => figure4_command(a, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numeric failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            if args.iter().any(|a| a == "--error-json") {
                let err = LabError::Usage(e.kind().to_string());
                let _ = writeln!(stderr, "{}", err.to_json());
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return 1;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            if cli.error_json {
                let _ = writeln!(stderr, "{}", e.to_json());
            } else {
                let _ = writeln!(stderr, "error: {e}");
            }
            e.exit_code()
        }
    }
}
