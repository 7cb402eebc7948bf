//! Declarative input files. One TOML document per run; every table rejects
//! unknown keys so typos surface as schema errors instead of silent defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Lti,
    LtvTabulated,
    NonlinearBuiltin,
    #[serde(rename = "spectral-1d")]
    Spectral1d,
    OcProblem,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub name: Option<String>,
    pub system: Option<LtiSection>,
    pub tabulated: Option<TabulatedSection>,
    pub builtin: Option<BuiltinSection>,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub stabilize: StabilizeSection,
    pub lq: Option<LqSection>,
    #[serde(default)]
    pub shoot: ShootSection,
    pub pde: Option<PdeSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtiSection {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

/// `A(t)`, `B(t)` sampled on `times`, linearly interpolated in between.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSection {
    pub times: Vec<f64>,
    pub a: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSection {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub horizon: Option<f64>,
    /// Instants for the time-varying rank test.
    #[serde(default)]
    pub ltv_times: Vec<f64>,
    pub depth: Option<usize>,
    /// Steer `x0 → x1` with the minimum-energy control.
    pub x0: Option<Vec<f64>>,
    pub x1: Option<Vec<f64>>,
    /// Base point of the bracket test.
    pub point: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PoleEntry {
    Real(f64),
    Text(String),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeSection {
    pub poles: Option<Vec<PoleEntry>>,
    pub routh: Option<Vec<f64>>,
    /// Closed-loop simulation from `x0` over `horizon`.
    pub x0: Option<Vec<f64>>,
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqSection {
    pub w: Option<Vec<Vec<f64>>>,
    pub u: Option<Vec<Vec<f64>>>,
    pub q: Option<Vec<Vec<f64>>>,
    pub horizon: f64,
    pub x0: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSection {
    pub guess: Option<Vec<f64>>,
    pub tf: Option<f64>,
    #[serde(default)]
    pub abnormal: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    WaveHum,
    Observe,
    Moment,
    Damping,
    Semilinear,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::WaveHum => "wave-hum",
            Scenario::Observe => "observe",
            Scenario::Moment => "moment",
            Scenario::Damping => "damping",
            Scenario::Semilinear => "semilinear",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub scenario: Scenario,
    pub length: Option<f64>,
    pub horizon: Option<f64>,
    pub modes: Option<usize>,
    /// Intervals making up ω.
    pub omega: Option<Vec<[f64; 2]>>,
    /// Initial coefficients (position modes for the wave).
    pub y0: Option<Vec<f64>>,
    /// Initial velocity coefficients (wave only).
    pub y0_velocity: Option<Vec<f64>>,
    /// Number of modes driven to zero (moment method).
    pub controlled: Option<usize>,
    pub x_points: Option<usize>,
}

/// Raw text plus where it came from; the digest is taken over `text`.
pub struct Source {
    pub label: String,
    pub text: String,
}

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../examples/", $name, ".toml")))),*]
    };
}

/// Example specs compiled into the binary, addressable by name.
pub const SHIPPED: &[(&str, &str)] = shipped![
    "rlc",
    "springs",
    "double-integrator",
    "pendulum",
    "maxwell-bloch",
    "dubins",
    "heisenberg",
    "ltv-tabulated",
    "scalar",
    "brachistochrone",
    "zermelo",
    "predator-prey",
    "double-integrator-min-time",
    "wave-hum",
    "observe",
    "moment",
    "damping",
    "semilinear-heat",
];

pub fn resolve(arg: &str) -> Result<Source, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
        return Ok(Source { label: arg.to_string(), text });
    }
    match SHIPPED.iter().find(|(name, _)| *name == arg) {
        Some((name, text)) => Ok(Source { label: format!("builtin:{name}"), text: text.to_string() }),
        None => Err(CliError::Input(format!("`{arg}` is neither a readable file nor a builtin name"))),
    }
}

pub fn parse(src: &Source) -> Result<SpecFile, CliError> {
    let spec: SpecFile = toml::from_str(&src.text).map_err(|e| CliError::Input(format!("{}: {e}", src.label)))?;
    if spec.version != FORMAT_VERSION {
        return Err(CliError::Input(format!("{}: unsupported version {} (expected {FORMAT_VERSION})", src.label, spec.version)));
    }
    let need = |present: bool, table: &str| {
        if present {
            Ok(())
        } else {
            Err(CliError::Input(format!("{}: kind `{:?}` requires a [{table}] table", src.label, spec.kind)))
        }
    };
    match spec.kind {
        Kind::Lti => need(spec.system.is_some(), "system")?,
        Kind::LtvTabulated => need(spec.tabulated.is_some(), "tabulated")?,
        Kind::NonlinearBuiltin | Kind::OcProblem => need(spec.builtin.is_some(), "builtin")?,
        Kind::Spectral1d => need(spec.pde.is_some(), "pde")?,
    }
    Ok(spec)
}

pub fn parse_complex(token: &str) -> Result<(f64, f64), CliError> {
    let t = token.trim();
    let bad = || CliError::Input(format!("cannot read `{token}` as a number (use forms like -1, -1+2j)"));
    if let Ok(x) = t.parse::<f64>() {
        return Ok((x, 0.0));
    }
    let body = t.strip_suffix('j').or_else(|| t.strip_suffix('i')).ok_or_else(bad)?;
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let cut = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..cut].parse::<f64>().map_err(|_| bad())?;
    let im = match &body[cut..] {
        "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    Ok((re, im))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Input(format!("cannot read `{t}` as a number"))))
        .collect()
}
