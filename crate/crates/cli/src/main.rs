use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::RunConfig;

/// Guided-mode fields, directional scattering fluxes and fits for a
/// nanoparticle on an optical nanofiber.
#[derive(Debug, Parser)]
#[command(name = "nanochiral", version)]
struct Cli {
    /// Configuration file (key = value lines) layered over the built-in defaults.
    #[arg(long, global = true, env = "NANOCHIRAL_CONFIG")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Write output here instead of stdout. The file only appears once complete.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// HE11 mode parameters as JSON.
    Modes,
    /// Overlap of one fiber mode with a polarization over the transverse plane (CSV x,y,overlap).
    OverlapMap {
        #[arg(long, value_enum, default_value = "y+")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "sigma-")]
        pol: PolArg,
    },
    /// Excitation intensity over the transverse plane relative to the incident beam (CSV x,y,intensity).
    FieldMap {
        #[arg(long, value_enum, default_value = "z")]
        pol: DrivePolArg,
    },
    /// Detected fluxes on the configured (phi, theta) grid.
    FluxMap,
    /// Directionality against plate angle at fixed azimuths.
    Directionality {
        /// Azimuths in degrees, comma separated; defaults to the configured grid.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Synthetic noisy flux dataset from the forward model.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        /// Relative noise level; defaults to synth.noise_rel.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Fit kappa_f and phi0 to a flux dataset CSV.
    Fit { data: PathBuf },
    /// Fiber-coupled scattering cross-section in both detector conventions.
    CrossSection {
        #[arg(long, default_value_t = 90.0)]
        phi: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "x+")]
    XPlus,
    #[value(name = "x-")]
    XMinus,
    #[value(name = "y+")]
    YPlus,
    #[value(name = "y-")]
    YMinus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolArg {
    #[value(name = "sigma+")]
    SigmaPlus,
    #[value(name = "sigma-")]
    SigmaMinus,
    Pi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DrivePolArg {
    Y,
    Z,
    #[value(name = "sigma+")]
    SigmaPlus,
    #[value(name = "sigma-")]
    SigmaMinus,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Csv(String),
    Fit(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Csv(_) => 4,
            CliError::Fit(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Csv(m) => write!(f, "data error: {m}"),
            CliError::Fit(m) => write!(f, "fit error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<nanochiral::Error> for CliError {
    fn from(e: nanochiral::Error) -> Self {
        use nanochiral::Error as E;
        match e {
            E::MissingColumn(_) | E::MalformedRow { .. } => CliError::Csv(e.to_string()),
            E::FitNonConvergence(_) => CliError::Fit(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

/// Write to a temporary file beside `path` and rename it into place.
fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(content.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let output = match cli.command {
        Command::Modes => commands::modes(&cfg)?,
        Command::OverlapMap { mode, pol } => commands::overlap_map(&cfg, mode.label(), pol.state())?,
        Command::FieldMap { pol } => commands::field_map(&cfg, pol.state())?,
        Command::FluxMap => commands::flux_map(&cfg)?,
        Command::Directionality { phi } => {
            let phis = match phi {
                Some(text) => config::parse_grid("--phi", &text)?,
                None => cfg.phis_deg.clone(),
            };
            commands::directionality(&cfg, &phis)?
        }
        Command::Synth { seed, noise } => {
            let noise = noise.unwrap_or(cfg.noise_rel);
            if !(noise >= 0.0) {
                return Err(CliError::Config(format!("--noise must be >= 0, got {noise}")));
            }
            commands::synth(&cfg, seed.unwrap_or(cfg.seed), noise)?
        }
        Command::Fit { data } => commands::fit(&cfg, &data)?,
        Command::CrossSection { phi } => commands::cross_section(&cfg, phi)?,
    };
    match cli.out {
        Some(path) => write_atomic(&path, &output),
        None => std::io::stdout()
            .write_all(output.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl ModeArg {
    fn label(self) -> nanochiral::fiber::ModeLabel {
        use nanochiral::fiber::{Axis, Direction, ModeLabel};
        match self {
            ModeArg::XPlus => ModeLabel::new(Axis::X, Direction::Plus),
            ModeArg::XMinus => ModeLabel::new(Axis::X, Direction::Minus),
            ModeArg::YPlus => ModeLabel::new(Axis::Y, Direction::Plus),
            ModeArg::YMinus => ModeLabel::new(Axis::Y, Direction::Minus),
        }
    }
}

impl PolArg {
    fn state(self) -> nanochiral::polarization::PolState3 {
        use nanochiral::polarization::PolState3;
        match self {
            PolArg::SigmaPlus => PolState3::sigma_plus(),
            PolArg::SigmaMinus => PolState3::sigma_minus(),
            PolArg::Pi => PolState3::pi(),
        }
    }
}

impl DrivePolArg {
    fn state(self) -> nanochiral::polarization::PolState3 {
        use nanochiral::polarization::PolState3;
        match self {
            DrivePolArg::Y => PolState3::linear_y(),
            DrivePolArg::Z => PolState3::linear_z(),
            DrivePolArg::SigmaPlus => PolState3::sigma_plus(),
            DrivePolArg::SigmaMinus => PolState3::sigma_minus(),
        }
    }
}
