//! Command-line driver: `simulate`, `bode`, `spectrum` and `bands`.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fcr_core::io::{self as csvio, ColumnSelector};
use fcr_core::spectrum::{self, PeakConfig};
use fcr_core::{run_simulation, simulation_report, Error as CoreError, Service, Unit, Window};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(CoreError::Config(_)) => 2,
            CliError::Data(_) | CliError::Io(_) | CliError::Core(_) => 3,
        }
    }

    fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            other => other,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fcr", version, about = "Band-split frequency control reserves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    None,
    Hann,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::None => Window::None,
            WindowArg::Hann => Window::Hann,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a closed-loop scenario and write timeseries.csv, soc.csv and report.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.directory` in the scenario.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnitude responses of inertia, primary and secondary control.
    Bode {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        fmin: f64,
        #[arg(long)]
        fmax: f64,
        #[arg(long)]
        points: usize,
        /// Add the droop response behind reheater and steam-chest lags.
        #[arg(long)]
        dynamics: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Amplitude spectrum of a sampled signal.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        window: WindowArg,
        /// Value column to analyse (default: first column after time).
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Share of spectral energy per frequency band.
    Bands {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated band edges in Hz.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        edges: Vec<f64>,
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_simulate(config_path: &Path, out: Option<&Path>, stdout: &mut impl Write) -> Result<(), CliError> {
    let scenario = config::load_scenario(config_path)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output.as_ref().map(|o| o.directory.clone()))
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set output.directory".into()))?;
    let sim = scenario.to_sim_config();
    sim.validate()?;
    let result = run_simulation(&sim)?;
    let rows = simulation_report(&result)?;

    std::fs::create_dir_all(&out_dir)?;
    csvio::write_timeseries_csv(create(&out_dir.join("timeseries.csv"))?, &result)?;
    csvio::write_soc_csv(create(&out_dir.join("soc.csv"))?, &result)?;
    csvio::write_report_csv(create(&out_dir.join("report.csv"))?, &rows)?;

    writeln!(
        stdout,
        "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "unit", "p_min", "p_max", "soc_min", "soc_max", "e_cycled"
    )?;
    for row in &rows {
        let (lo, hi) = row.power_range();
        match row.storage() {
            Some(r) => writeln!(
                stdout,
                "{:<10} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
                r.name, lo, hi, r.soc_min, r.soc_max, r.e_cycled
            )?,
            None => writeln!(
                stdout,
                "{:<10} {:>10.2} {:>10.2} {:>10} {:>10} {:>10}",
                row.name(),
                lo,
                hi,
                "-",
                "-",
                "-"
            )?,
        }
    }
    writeln!(
        stdout,
        "frequency nadir {:.5} Hz, final deviation {:.3e} Hz",
        result.nadir(),
        result.freq_deviation.values().last().copied().unwrap_or(0.0)
    )?;
    writeln!(stdout, "wrote {}", out_dir.display())?;
    Ok(())
}

pub fn cmd_bode(
    params_path: &Path,
    fmin: f64,
    fmax: f64,
    points: usize,
    dynamics: bool,
    out: &Path,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let grid = spectrum::log_grid(fmin, fmax, points).map_err(|e| CliError::Usage(e.to_string()))?;
    let params = config::load_grid_params(params_path)?;
    let mut services = vec![Service::Inertia, Service::Primary, Service::Secondary];
    if dynamics {
        services.push(Service::PrimaryWithDynamics);
    }
    let curves = services
        .iter()
        .map(|&s| fcr_core::bode_magnitude(s, &params, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let named: Vec<(&str, &fcr_core::BodeCurve)> =
        services.iter().map(|s| service_column(*s)).zip(&curves).collect();
    csvio::write_bode_csv(create(out)?, &named)?;

    let c = fcr_core::crossover_frequencies(&params)?;
    writeln!(
        stdout,
        "secondary/primary crossover: {:.4e} Hz (period {:.1} min)",
        c.secondary_primary,
        1.0 / c.secondary_primary / 60.0
    )?;
    writeln!(
        stdout,
        "inertia/primary crossover:   {:.4e} Hz (period {:.1} s)",
        c.inertia_primary,
        1.0 / c.inertia_primary
    )?;
    Ok(())
}

pub fn service_column(s: Service) -> &'static str {
    match s {
        Service::Inertia => "inertia",
        Service::Primary => "primary",
        Service::Secondary => "secondary",
        Service::PrimaryWithDynamics => "primary_with_dynamics",
    }
}

fn read_input(input: &Path, column: Option<&str>) -> Result<fcr_core::TimeSeries, CliError> {
    let file =
        File::open(input).map_err(|e| CliError::Data(format!("cannot open {}: {e}", input.display())))?;
    let selector = column.map_or(ColumnSelector::First, |c| ColumnSelector::Named(c.to_string()));
    csvio::read_series_csv(std::io::BufReader::new(file), &selector, Unit::Dimensionless)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))
}

fn describe_period(seconds: f64) -> String {
    if seconds >= 120.0 {
        format!("{:.1} min", seconds / 60.0)
    } else {
        format!("{seconds:.1} s")
    }
}

pub fn cmd_spectrum(
    input: &Path,
    window: Window,
    column: Option<&str>,
    out: &Path,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let series = read_input(input, column)?;
    let spec = fcr_core::amplitude_spectrum(&series, window)?;
    csvio::write_spectrum_csv(create(out)?, &spec)?;
    let peaks = fcr_core::find_peaks(&spec, &PeakConfig::default());
    writeln!(stdout, "{} samples, dt {} s, mean {}", spec.n_samples, spec.dt, spec.mean)?;
    for p in peaks.iter().take(10) {
        writeln!(
            stdout,
            "peak {:.4e} Hz (period {}) amplitude {:.4e}",
            p.frequency,
            describe_period(p.period()),
            p.amplitude
        )?;
    }
    Ok(())
}

pub fn cmd_bands(
    input: &Path,
    edges: &[f64],
    column: Option<&str>,
    out: &Path,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let series = read_input(input, column)?;
    let spec = fcr_core::amplitude_spectrum(&series, Window::None)?;
    let report = spectrum::band_energy_from_spectrum(&spec, edges).map_err(|e| match e {
        CoreError::Input(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    csvio::write_bands_csv(create(out)?, &report, spec.nyquist())?;
    for (i, share) in report.shares.iter().enumerate() {
        let (lo, hi) = report.band_limits(i, spec.nyquist());
        writeln!(stdout, "[{lo:.4e}, {hi:.4e}) Hz: {:6.2} %", 100.0 * share)?;
    }
    if report.degenerate {
        writeln!(stdout, "signal has no energy outside DC; shares set uniform")?;
    }
    Ok(())
}

pub fn execute(cli: Cli, stdout: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out.as_deref(), stdout),
        Command::Bode { params, fmin, fmax, points, dynamics, out } => {
            cmd_bode(&params, fmin, fmax, points, dynamics, &out, stdout)
        }
        Command::Spectrum { input, window, column, out } => {
            cmd_spectrum(&input, window.into(), column.as_deref(), &out, stdout)
        }
        Command::Bands { input, edges, column, out } => {
            cmd_bands(&input, &edges, column.as_deref(), &out, stdout)
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
