//! Command-line front end for the trendcast pipeline: synthesize or ingest a
//! workload trace, forecast its trend, score the forecasting methods against
//! each other, and turn forecasts into VM provisioning plans.
//!
//! Settings are resolved as flags > config file > built-in defaults. The
//! config file is a TOML document pointed to by the `TRENDCAST_CONFIG`
//! environment variable; every key mirrors a flag, plus `centered_window`
//! which has no flag of its own.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::{env, fs};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use trendcast_core::estimator::DEFAULT_CAUSAL_WINDOW;
use trendcast_core::evaluation::{
    build_comparison_table, render_text_table, write_report_csv, EvaluationConfig,
};
use trendcast_core::forecast::{
    write_forecast_csv, EstimatorConfig, ForecastEngine, ForecastSeries, Method,
};
use trendcast_core::provisioning::{
    provision_series, write_plan_csv, ProvisioningConfig, DEFAULT_PROVISION_HORIZON,
    DEFAULT_SCALE_FACTOR, DEFAULT_VM_CAPACITY_MS,
};
use trendcast_core::synth::{synthesize_workload, SynthesisSpec};
use trendcast_core::{read_series_csv, write_series_csv, Error as CoreError, TimeSeries64};

const DEFAULT_DAYS: u32 = 10;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_FORECAST_HORIZON: u32 = 30;

#[derive(Parser)]
#[command(
    name = "trendcast",
    version,
    about = "Cloud-workload trend forecasting and VM provisioning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic minute-sampled workload trace.
    Synth(SynthArgs),
    /// Forecast the workload trend from a trace CSV.
    Forecast(ForecastArgs),
    /// Score forecasting methods and print a comparison table.
    Evaluate(EvaluateArgs),
    /// Turn trend forecasts into VM provisioning plans.
    Provision(ProvisionArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path [default: workload.csv]
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
    /// Length of the trace in days [default: 10]
    #[arg(long, value_name = "DAYS")]
    days: Option<u32>,
    /// RNG seed; the same seed reproduces the same trace [default: 0]
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Standard deviation of the additive noise [default: 0.05]
    #[arg(long, value_name = "STD")]
    noise_std: Option<f64>,
}

#[derive(Args)]
struct ForecastArgs {
    /// Input trace CSV [default: workload.csv]
    #[arg(long, short = 'i', value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output CSV path [default: forecast.csv]
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
    /// persistence, scaled, algebraic, mixed or all [default: mixed]
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Forecast horizon in minutes [default: 30]
    #[arg(long, value_name = "MIN")]
    horizon: Option<u32>,
    /// Causal estimation window in minutes [default: 60]
    #[arg(long, value_name = "MIN")]
    window: Option<u32>,
    /// Lift the 60-minute horizon cap
    #[arg(long)]
    allow_long_horizon: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Input trace CSV [default: workload.csv]
    #[arg(long, short = 'i', value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output CSV path [default: evaluation.csv]
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
    /// persistence, scaled, algebraic, mixed or all [default: scaled, algebraic, mixed]
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Comma-separated horizons in minutes [default: 5,30,60]
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    horizons: Option<Vec<u32>>,
    /// Causal estimation window in minutes [default: 60]
    #[arg(long, value_name = "MIN")]
    window: Option<u32>,
    /// Lift the 60-minute horizon cap
    #[arg(long)]
    allow_long_horizon: bool,
}

#[derive(Args)]
struct ProvisionArgs {
    /// Input trace CSV [default: workload.csv]
    #[arg(long, short = 'i', value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output CSV path [default: provision.csv]
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
    /// persistence, scaled, algebraic or mixed [default: mixed]
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Forecast horizon in minutes [default: 30]
    #[arg(long, value_name = "MIN")]
    horizon: Option<u32>,
    /// Causal estimation window in minutes [default: 60]
    #[arg(long, value_name = "MIN")]
    window: Option<u32>,
    /// Normalized-load-to-CPU-milliseconds factor [default: 5e6]
    #[arg(long, value_name = "FACTOR")]
    scale_factor: Option<f64>,
    /// CPU-milliseconds one VM absorbs per minute [default: 30000]
    #[arg(long, value_name = "MS")]
    capacity_ms: Option<f64>,
}

/// Keys accepted in the `TRENDCAST_CONFIG` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    method: Option<String>,
    horizon: Option<u32>,
    horizons: Option<Vec<u32>>,
    window: Option<u32>,
    centered_window: Option<u32>,
    seed: Option<u64>,
    days: Option<u32>,
    noise_std: Option<f64>,
    scale_factor: Option<f64>,
    capacity_ms: Option<f64>,
    allow_long_horizon: Option<bool>,
}

enum CliError {
    /// The request itself is invalid; exit code 2.
    Usage(String),
    /// The data cannot satisfy the request; exit code 1.
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        if is_usage_error(&err) {
            CliError::Usage(err.to_string())
        } else {
            CliError::Data(err.to_string())
        }
    }
}

/// Usage errors reject the request; everything else means the data could not
/// satisfy an otherwise valid request.
fn is_usage_error(err: &CoreError) -> bool {
    match err {
        CoreError::AtOrigin { source, .. } => is_usage_error(source),
        CoreError::HorizonOutOfRange { .. }
        | CoreError::MisalignedHorizon { .. }
        | CoreError::MisalignedWindow { .. }
        | CoreError::UnknownMethod(_)
        | CoreError::InvalidSynthesisSpec(_)
        | CoreError::InsufficientSpan { .. }
        | CoreError::InvalidScaleFactor(_)
        | CoreError::InvalidCapacity(_) => true,
        _ => false,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let file = load_file_config()?;
    match command {
        Command::Synth(args) => cmd_synth(args, &file),
        Command::Forecast(args) => cmd_forecast(args, &file),
        Command::Evaluate(args) => cmd_evaluate(args, &file),
        Command::Provision(args) => cmd_provision(args, &file),
    }
}

fn load_file_config() -> Result<FileConfig, CliError> {
    let Some(raw) = env::var_os("TRENDCAST_CONFIG") else {
        return Ok(FileConfig::default());
    };
    let path = PathBuf::from(raw);
    let text = fs::read_to_string(&path).map_err(|err| {
        CliError::Usage(format!("cannot read config file {}: {err}", path.display()))
    })?;
    toml::from_str(&text)
        .map_err(|err| CliError::Usage(format!("invalid config file {}: {err}", path.display())))
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn estimator_config(window_flag: Option<u32>, file: &FileConfig) -> EstimatorConfig {
    let causal_window = pick(window_flag, file.window, DEFAULT_CAUSAL_WINDOW);
    // The centered hindsight window tolerates, and benefits from, twice the
    // causal span; an explicit `centered_window` config key overrides that.
    let centered_window = file.centered_window.unwrap_or(2 * causal_window);
    EstimatorConfig {
        causal_window,
        centered_window,
    }
}

enum MethodSelection {
    All,
    One(Method),
}

fn parse_method(raw: &str, allow_all: bool) -> Result<MethodSelection, CliError> {
    if raw.eq_ignore_ascii_case("all") {
        if allow_all {
            return Ok(MethodSelection::All);
        }
        return Err(CliError::Usage(
            "method `all` is not valid here; pick one method".to_string(),
        ));
    }
    raw.parse()
        .map(MethodSelection::One)
        .map_err(CliError::from)
}

fn read_input(
    flag: Option<PathBuf>,
    file: &FileConfig,
) -> Result<(TimeSeries64, PathBuf), CliError> {
    let path = pick(flag, file.input.clone(), PathBuf::from("workload.csv"));
    let series = read_series_csv(&path)
        .map_err(|err| rewrap(err, &format!("cannot read {}", path.display())))?;
    Ok((series, path))
}

fn create_output(
    flag: Option<PathBuf>,
    file: &FileConfig,
    default: &str,
) -> Result<(BufWriter<File>, PathBuf), CliError> {
    let path = pick(flag, file.output.clone(), PathBuf::from(default));
    let handle = File::create(&path)
        .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display())))?;
    Ok((BufWriter::new(handle), path))
}

/// Prefix an error with the file it concerns without changing its class.
fn rewrap(err: CoreError, context: &str) -> CliError {
    match CliError::from(err) {
        CliError::Usage(msg) => CliError::Usage(format!("{context}: {msg}")),
        CliError::Data(msg) => CliError::Data(format!("{context}: {msg}")),
    }
}

fn cmd_synth(args: SynthArgs, file: &FileConfig) -> Result<(), CliError> {
    let days = pick(args.days, file.days, DEFAULT_DAYS);
    let seed = pick(args.seed, file.seed, DEFAULT_SEED);
    let spec = SynthesisSpec {
        noise_std: pick(
            args.noise_std,
            file.noise_std,
            SynthesisSpec::default().noise_std,
        ),
        ..Default::default()
    };
    let series = synthesize_workload::<f64>(days, &spec, seed)?;

    let output = pick(
        args.output,
        file.output.clone(),
        PathBuf::from("workload.csv"),
    );
    write_series_csv(&series, &output)
        .map_err(|err| rewrap(err, &format!("cannot write {}", output.display())))?;
    eprintln!(
        "wrote {} samples ({days} days, seed {seed}) to {}",
        series.len(),
        output.display()
    );
    Ok(())
}

fn cmd_forecast(args: ForecastArgs, file: &FileConfig) -> Result<(), CliError> {
    let selection = match args.method.as_deref().or(file.method.as_deref()) {
        Some(raw) => parse_method(raw, true)?,
        None => MethodSelection::One(Method::Mixed),
    };
    let horizon = pick(args.horizon, file.horizon, DEFAULT_FORECAST_HORIZON);
    let allow_long = args.allow_long_horizon || file.allow_long_horizon.unwrap_or(false);

    let (series, _) = read_input(args.input, file)?;
    let mut engine = ForecastEngine::new(series, estimator_config(args.window, file))?;
    if allow_long {
        engine = engine.allow_long_horizons();
    }

    let methods = match selection {
        MethodSelection::All => Method::ALL.to_vec(),
        MethodSelection::One(method) => vec![method],
    };
    let batches: Vec<ForecastSeries<f64>> = methods
        .into_iter()
        .map(|method| engine.batch_default(method, horizon))
        .collect::<Result<_, _>>()?;

    let (writer, output) = create_output(args.output, file, "forecast.csv")?;
    write_forecast_csv(&batches, writer)?;
    let rows: usize = batches.iter().map(|b| b.len()).sum();
    eprintln!(
        "wrote {rows} forecasts ({} method(s), horizon {horizon} min) to {}",
        batches.len(),
        output.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut config = EvaluationConfig::default();
    if let Some(raw) = args.method.as_deref().or(file.method.as_deref()) {
        match parse_method(raw, true)? {
            MethodSelection::All => config.methods = Method::ALL.to_vec(),
            MethodSelection::One(method) => config.methods = vec![method],
        }
    }
    config.horizons = pick(args.horizons, file.horizons.clone(), config.horizons);
    if config.horizons.is_empty() {
        return Err(CliError::Usage(
            "at least one horizon is required".to_string(),
        ));
    }
    config.estimator = estimator_config(args.window, file);
    config.allow_long_horizons =
        args.allow_long_horizon || file.allow_long_horizon.unwrap_or(false);

    let (series, _) = read_input(args.input, file)?;
    let report = build_comparison_table(&series, &config)?;

    print!("{}", render_text_table(&report));

    let (writer, output) = create_output(args.output, file, "evaluation.csv")?;
    write_report_csv(&report, writer)?;
    let (from, to) = report.origin_range;
    eprintln!(
        "scored {} origins ({from}..{to}), input SNR {:.2} dB; wrote {}",
        report.origin_count,
        report.input_snr_db,
        output.display()
    );
    Ok(())
}

fn cmd_provision(args: ProvisionArgs, file: &FileConfig) -> Result<(), CliError> {
    let method = match args.method.as_deref().or(file.method.as_deref()) {
        Some(raw) => match parse_method(raw, false)? {
            MethodSelection::One(method) => method,
            MethodSelection::All => unreachable!("rejected by parse_method"),
        },
        None => Method::Mixed,
    };
    let config = ProvisioningConfig {
        scale_factor: pick(args.scale_factor, file.scale_factor, DEFAULT_SCALE_FACTOR),
        per_vm_capacity_ms: pick(args.capacity_ms, file.capacity_ms, DEFAULT_VM_CAPACITY_MS),
        horizon: pick(args.horizon, file.horizon, DEFAULT_PROVISION_HORIZON),
        method,
        estimator: estimator_config(args.window, file),
    };

    let (series, _) = read_input(args.input, file)?;
    let run = provision_series(&series, &config)?;

    let (writer, output) = create_output(args.output, file, "provision.csv")?;
    write_plan_csv(&run, writer)?;
    eprintln!(
        "wrote {} plans (horizon {} min, {} clamped) to {}",
        run.len(),
        config.horizon,
        run.clamped_count(),
        output.display()
    );
    Ok(())
}
