mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{read_config_file, ConfigError, ExperimentConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<taperspec::Error> for CliError {
    fn from(e: taperspec::Error) -> Self {
        use taperspec::Error::*;
        match e {
            InvalidParameter(_) | Domain { .. } | Shape { .. } | Model(_) => CliError::Config(e.to_string()),
            Numerical(_) | DegenerateSpectrum(_) | EdgeFrequency(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// Tapered, smoothed spectral estimation experiments.
#[derive(Parser)]
#[command(name = "taperspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// `key = value` configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (also read from TAPERSPEC_THREADS).
    #[arg(long, global = true, env = "TAPERSPEC_THREADS")]
    threads: Option<usize>,

    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate S(f) and its decibel value up to the Nyquist frequency.
    Spectrum,
    /// Exact, usual and new relative variances on the Fourier grid.
    Figure2,
    /// Monte-Carlo check of the exact relative variances.
    McValidate,
    /// Time the direct and accelerated exact covariance grids.
    Bench,
    /// Run quick internal consistency checks.
    Selftest,
}

/// Experiment settings. Lists are comma separated.
#[derive(Args)]
struct Settings {
    /// Processes: white-noise, ar4 or ar:φ1:φ2:...
    #[arg(long, global = true)]
    process: Option<String>,
    /// Series length N.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Grid sizes as multiples of N.
    #[arg(long, global = true)]
    nprime_factors: Option<String>,
    /// Taper proportions.
    #[arg(long, global = true)]
    p: Option<String>,
    /// Smoothing half-widths.
    #[arg(long, global = true)]
    m: Option<String>,
    /// Sampling interval.
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Innovation variance.
    #[arg(long, global = true)]
    sigma2: Option<String>,
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted or '-'.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Monte-Carlo replicates.
    #[arg(long, global = true)]
    replicates: Option<String>,
    /// Grid indices for mc-validate.
    #[arg(long, global = true)]
    k: Option<String>,
    /// Series lengths for bench.
    #[arg(long, global = true)]
    sizes: Option<String>,
    /// Frequency intervals for spectrum.
    #[arg(long, global = true)]
    points: Option<String>,
    /// Mean handling: known, arithmetic or weighted.
    #[arg(long, global = true)]
    mean: Option<String>,
    /// Exact covariance method: accelerated or direct.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Zero-frequency term near k = 0: renormalize, exclude or include.
    #[arg(long, global = true)]
    edge: Option<String>,
}

impl Settings {
    fn overlay(self, map: &mut BTreeMap<String, String>) {
        let pairs = [
            ("process", self.process),
            ("n", self.n),
            ("nprime-factors", self.nprime_factors),
            ("p", self.p),
            ("m", self.m),
            ("delta", self.delta),
            ("sigma2", self.sigma2),
            ("seed", self.seed.map(|s| s.to_string())),
            ("output", self.output),
            ("replicates", self.replicates),
            ("k", self.k),
            ("sizes", self.sizes),
            ("points", self.points),
            ("mean", self.mean),
            ("method", self.method),
            ("edge", self.edge),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut settings = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    cli.settings.overlay(&mut settings);
    let config = ExperimentConfig::from_settings(&settings)?;

    match cli.command {
        Command::Spectrum => commands::spectrum(&config),
        Command::Figure2 => commands::figure2(&config),
        Command::McValidate => commands::mc_validate(&config),
        Command::Bench => commands::bench(&config).map(|_| ()),
        Command::Selftest => match commands::selftest()? {
            0 => Ok(()),
            n => Err(CliError::Numerical(format!("{n} self-test check(s) failed"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("taperspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
