//! Command-line front end: `check`, `period`, `compare` and `limit-cycle`
//! over JSON system files.
//!
//! Exit codes: 0 success, 1 mathematical failure (a hypothesis or a period
//! threshold), 2 usage or parse error.

mod commands;
pub mod system;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::cycles::CycleOptions;
use crate::equiv::EquivError;
use crate::flow::FlowOptions;
use crate::symmetry::SymmetryError;

use commands::Settings;
use system::{ConfigError, System};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Usage(String),
    Output { path: PathBuf, source: std::io::Error },
    Io(std::io::Error),
    Equiv(EquivError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Usage(m) => f.write_str(m),
            CliError::Output { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Io(e) => e.fmt(f),
            CliError::Equiv(e) => e.fmt(f),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<EquivError> for CliError {
    fn from(e: EquivError) -> Self {
        CliError::Equiv(e)
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        CliError::Equiv(e.into())
    }
}

/// `start:stop:count`, expanding to `count` evenly spaced radii.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiiSpec(pub Vec<f64>);

impl FromStr for RadiiSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err("expected start:stop:count".into());
        };
        let a: f64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad stop `{b}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad count `{n}`"))?;
        if n == 0 {
            return Err("count must be at least 1".into());
        }
        if !(a.is_finite() && b.is_finite() && a > 0.0) {
            return Err("radii must be positive".into());
        }
        if n == 1 {
            return Ok(RadiiSpec(vec![a]));
        }
        if b <= a {
            return Err("stop must exceed start".into());
        }
        Ok(RadiiSpec((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()))
    }
}

/// Comma-separated origin then direction, e.g. `0,0,1,0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RaySpec(pub Vec<f64>);

impl FromStr for RaySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() % 2 != 0 || v.iter().any(|x| !x.is_finite()) {
            return Err("expected origin and direction coordinates".into());
        }
        Ok(RaySpec(v))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

#[derive(Parser, Debug)]
#[command(name = "equiperiod", version, about = "Symmetry checks and period comparison for polynomial vector fields")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Integrator tolerance (relative and absolute)
    #[arg(long, global = true, default_value = "1e-12", value_parser = positive)]
    pub tol: f64,
    /// Relative cycle-closure tolerance, scaled by 1+|z0|
    #[arg(long = "cycle-tol", global = true, default_value = "1e-8", value_parser = positive)]
    pub cycle_tol: f64,
    /// Longest integration time per measurement
    #[arg(long, global = true, default_value = "1e4", value_parser = positive)]
    pub horizon: f64,
    /// Radii as start:stop:count
    #[arg(long, global = true, default_value = "0.1:0.9:9")]
    pub radii: RadiiSpec,
    /// Ray as origin then direction, e.g. 0,0,1,0
    #[arg(long, global = true, default_value = "0,0,1,0", allow_hyphen_values = true)]
    pub ray: RaySpec,
    /// Largest accepted relative period difference
    #[arg(long, global = true, default_value = "1e-7", value_parser = positive)]
    pub threshold: f64,
    /// Write CSV output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check declared symmetries, sigma-oddness of delta and compatibility of alpha
    Check { system: PathBuf },
    /// Sample the period function along a ray
    Period {
        system: PathBuf,
        /// Measure the scaled field alpha*V instead of V
        #[arg(long)]
        scaled: bool,
    },
    /// Compare period functions of V and alpha*V
    Compare {
        system: PathBuf,
        /// Only use the named involution
        #[arg(long)]
        involution: Option<String>,
    },
    /// Locate a limit cycle through the configured section
    LimitCycle { system: PathBuf },
}

impl GlobalOpts {
    fn settings(&self) -> Settings {
        let mut flow = FlowOptions::with_tol(self.tol);
        flow.horizon = self.horizon;
        Settings {
            cycle: CycleOptions { flow, cycle_tol: self.cycle_tol, ..CycleOptions::default() },
            radii: self.radii.0.clone(),
            ray: self.ray.0.clone(),
            threshold: self.threshold,
            out: self.out.clone(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Equiv(_) => EXIT_FAILURE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let settings = cli.opts.settings();
    let load = |p: &PathBuf| System::load(p).map_err(CliError::Config);
    match &cli.command {
        Command::Check { system } => commands::check(&load(system)?, out),
        Command::Period { system, scaled } => commands::period(&load(system)?, &settings, *scaled, out, err),
        Command::Compare { system, involution } => {
            commands::compare(&load(system)?, &settings, involution.as_deref(), out, err)
        }
        Command::LimitCycle { system } => commands::limit_cycle(&load(system)?, &settings, out),
    }
}
