//! `ctrl`: batch front end. One command per process; reports are JSON with
//! sorted keys, trajectories are CSV.

mod commands;
mod output;
mod spec;
mod systems;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Flags;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ctrlkit::Error> for CliError {
    fn from(e: ctrlkit::Error) -> Self {
        use ctrlkit::Error::*;
        match e {
            Dimension(_) | InvalidInput(_) | Grid(_) | Config(_) | UnsupportedShape(_) | DegreeMismatch { .. } | NormalizeFirst => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ctrl", version, about = "Controllability, stabilization, optimal control and spectral PDE control in batch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank tests, decomposition and Gramian of a linear system (or Lie brackets).
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Horizon for the Gramian.
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
    /// Pole placement, or a Routh/Hurwitz check of a polynomial.
    Stabilize {
        #[command(flatten)]
        common: Common,
        /// Comma-separated target poles, e.g. "-1,-2+1j,-2-1j".
        #[arg(long, allow_hyphen_values = true)]
        poles: Option<String>,
        /// Comma-separated coefficients, highest degree first.
        #[arg(long, allow_hyphen_values = true)]
        routh: Option<String>,
        /// Horizon of the closed-loop simulation.
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
    /// Finite-horizon linear-quadratic regulator.
    Lq {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
    /// Indirect shooting on the maximum principle.
    Shoot {
        #[command(flatten)]
        common: Common,
        /// Initial adjoint guess, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<String>,
        /// Final-time guess for free-time problems.
        #[arg(long)]
        tf: Option<f64>,
        /// Shortcut for `--param x1=<value>`.
        #[arg(long, allow_hyphen_values = true)]
        x1: Option<f64>,
    },
    /// Spectral wave/heat scenarios.
    Pde {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L")]
        length: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long = "N")]
        modes: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Report,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Spec file, or the name of a shipped example.
    spec: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output file; defaults to $CTRL_OUTPUT_DIR/<spec>.<command>.<ext>, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Override a builtin parameter, `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Add wall-clock timing to the report (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match std::panic::catch_unwind(|| run(cli, &argv)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("ctrl: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => {
            eprintln!("ctrl: internal numerical failure");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let (name, common, mut flags) = match cli.command {
        Command::Analyze { common, horizon } => ("analyze", common, Flags { horizon, ..Default::default() }),
        Command::Stabilize { common, poles, routh, horizon } => ("stabilize", common, Flags { poles, routh, horizon, ..Default::default() }),
        Command::Lq { common, horizon } => ("lq", common, Flags { horizon, ..Default::default() }),
        Command::Shoot { mut common, guess, tf, x1 } => {
            if let Some(x) = x1 {
                common.params.push(format!("x1={x}"));
            }
            ("shoot", common, Flags { guess, tf, ..Default::default() })
        }
        Command::Pde { common, length, horizon, modes } => ("pde", common, Flags { length, horizon, modes, ..Default::default() }),
    };
    flags.tol = common.tol;
    flags.steps = common.steps;

    let source = common.spec.as_deref().map(spec::resolve).transpose()?;
    let mut parsed = source.as_ref().map(spec::parse).transpose()?;
    if let Some(s) = parsed.as_mut() {
        apply_params(s, &common.params)?;
    } else if !common.params.is_empty() {
        return Err(CliError::Input("--param needs a spec".into()));
    }
    let outcome = match (name, parsed.as_ref()) {
        ("stabilize", p) => commands::stabilize(p, &flags)?,
        (_, None) => return Err(CliError::Input(format!("`{name}` needs a spec file or builtin name"))),
        ("analyze", Some(p)) => commands::analyze(p, &flags)?,
        ("lq", Some(p)) => commands::lq(p, &flags)?,
        ("shoot", Some(p)) => commands::shoot(p, &flags)?,
        (_, Some(p)) => commands::pde(p, &flags)?,
    };

    let text = match common.format {
        Format::Report => {
            let timing = common.timing.then(|| started.elapsed().as_secs_f64() * 1e3);
            output::report(argv, source.as_ref(), parsed.as_ref().and_then(|p| p.name.as_deref()), outcome, timing)
        }
        Format::Csv => match &outcome.table {
            Some(t) => output::csv(t),
            None => return Err(CliError::Input(format!("`{name}` produced no trajectory for this input; use --format report"))),
        },
    };
    let ext = if common.format == Format::Csv { "csv" } else { "json" };
    let dest = common.out.clone().or_else(|| {
        std::env::var_os("CTRL_OUTPUT_DIR").map(|dir| {
            let stem = common.spec.as_deref().map(output::stem).unwrap_or_else(|| "inline".into());
            PathBuf::from(dir).join(format!("{stem}.{name}.{ext}"))
        })
    });
    output::emit(dest.as_deref(), &text)
}

fn apply_params(spec: &mut spec::SpecFile, params: &[String]) -> Result<(), CliError> {
    if params.is_empty() {
        return Ok(());
    }
    let b = spec.builtin.as_mut().ok_or_else(|| CliError::Input("--param only applies to builtin specs".into()))?;
    for kv in params {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Input(format!("--param expects key=value, got `{kv}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Input(format!("--param {k}: `{v}` is not a number")))?;
        b.params.insert(k.trim().to_string(), v);
    }
    Ok(())
}
