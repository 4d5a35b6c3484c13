//! Run parameters from flags, an optional `key = value` file and defaults,
//! in that order of precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapId {
    /// Kahan map in original coordinates (epsilon, lambda, h, a).
    Kahan,
    /// Euler map in original coordinates.
    Euler,
    /// Kahan map in the scaling chart K2 (lambda and r are lambda2, r2).
    K2Kahan,
    /// Euler map in chart K2.
    K2Euler,
    /// Symplectic Euler in canonical coordinates; x0, y0 are read as v0, w0.
    SymplecticEuler,
}

impl MapId {
    pub fn as_str(self) -> &'static str {
        match self {
            MapId::Kahan => "kahan",
            MapId::Euler => "euler",
            MapId::K2Kahan => "k2-kahan",
            MapId::K2Euler => "k2-euler",
            MapId::SymplecticEuler => "symplectic-euler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Parameters shared by all subcommands. Every flag can also be set in the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Plain-text `key = value` file; flags take precedence over its entries.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub map: Option<MapId>,
    /// Step size (> 0).
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    /// Must be 0: the cubic coefficient vanishes identically in this model.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a3: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a4: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a5: Option<f64>,
    /// Half-width of the Melnikov sum range.
    #[arg(long = "N", global = true)]
    pub n: Option<i64>,
    #[arg(long, global = true)]
    pub steps: Option<u64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o', global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Fully resolved parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub map: MapId,
    pub h: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub r: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub steps: u64,
    pub x0: f64,
    pub y0: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// True when the format was chosen explicitly (flag or file).
    #[serde(skip)]
    pub format_explicit: bool,
}

impl RunConfig {
    pub fn coefficients(&self) -> canard_core::integrators::Coefficients {
        canard_core::integrators::Coefficients::new(self.a1, self.a2, self.a4, self.a5)
    }
}

/// Canonical one-line serialization used in `# config:` provenance lines.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "command={} map={} h={:?} epsilon={:?} lambda={:?} r={:?} a1={:?} a2={:?} a3={:?} a4={:?} a5={:?} N={} steps={} x0={:?} y0={:?}",
            self.command,
            self.map.as_str(),
            self.h,
            self.epsilon,
            self.lambda,
            self.r,
            self.a1,
            self.a2,
            self.a3,
            self.a4,
            self.a5,
            self.n,
            self.steps,
            self.x0,
            self.y0
        )
    }
}

const KNOWN_KEYS: &[&str] = &[
    "map", "h", "epsilon", "lambda", "r", "a1", "a2", "a3", "a4", "a5", "N", "steps", "x0", "y0", "output", "format",
];

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| CliError::Config {
        path: path.display().to_string(),
        line,
        reason: format!("invalid value {v:?} for {key}"),
    })
}

/// Parse a config file into `ParamArgs`. Blank lines and `#` comments are skipped; unknown keys are errors.
pub fn parse_config_file(path: &Path) -> CliResult<ParamArgs> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(path, &text)
}

pub fn parse_config_text(path: &Path, text: &str) -> CliResult<ParamArgs> {
    let mut p = ParamArgs::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| CliError::Config {
            path: path.display().to_string(),
            line,
            reason: format!("expected `key = value`, got {content:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config {
                path: path.display().to_string(),
                line,
                reason: format!("unknown key {key:?}"),
            });
        }
        let f = |v| parse_value::<f64>(path, line, key, v);
        match key {
            "map" => {
                p.map = Some(MapId::from_str(value, false).map_err(|_| CliError::Config {
                    path: path.display().to_string(),
                    line,
                    reason: format!("unknown map {value:?}"),
                })?)
            }
            "format" => {
                p.format = Some(Format::from_str(value, true).map_err(|_| CliError::Config {
                    path: path.display().to_string(),
                    line,
                    reason: format!("unknown format {value:?}"),
                })?)
            }
            "output" => p.output = Some(PathBuf::from(value)),
            "h" => p.h = Some(f(value)?),
            "epsilon" => p.epsilon = Some(f(value)?),
            "lambda" => p.lambda = Some(f(value)?),
            "r" => p.r = Some(f(value)?),
            "a1" => p.a1 = Some(f(value)?),
            "a2" => p.a2 = Some(f(value)?),
            "a3" => p.a3 = Some(f(value)?),
            "a4" => p.a4 = Some(f(value)?),
            "a5" => p.a5 = Some(f(value)?),
            "N" => p.n = Some(parse_value(path, line, key, value)?),
            "steps" => p.steps = Some(parse_value(path, line, key, value)?),
            "x0" => p.x0 = Some(f(value)?),
            "y0" => p.y0 = Some(f(value)?),
            _ => unreachable!("key checked against KNOWN_KEYS"),
        }
    }
    Ok(p)
}

/// Command-specific defaults used where neither a flag nor the file sets a value.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub map: MapId,
    pub h: f64,
    pub n: i64,
    pub steps: u64,
    pub x0: f64,
    pub y0: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self { map: MapId::K2Kahan, h: 0.01, n: 2000, steps: 1000, x0: 0.0, y0: -0.4 }
    }
}

pub fn resolve(command: &str, flags: &ParamArgs, defaults: Defaults) -> CliResult<RunConfig> {
    let file = match &flags.config {
        Some(path) => parse_config_file(path)?,
        None => ParamArgs::default(),
    };
    macro_rules! pick {
        ($field:ident, $default:expr) => {
            flags.$field.clone().or(file.$field.clone()).unwrap_or($default)
        };
    }
    let format_explicit = flags.format.is_some() || file.format.is_some();
    let cfg = RunConfig {
        command: command.to_string(),
        map: pick!(map, defaults.map),
        h: pick!(h, defaults.h),
        epsilon: pick!(epsilon, 0.01),
        lambda: pick!(lambda, 0.0),
        r: pick!(r, 0.0),
        a1: pick!(a1, 0.0),
        a2: pick!(a2, 0.0),
        a3: pick!(a3, 0.0),
        a4: pick!(a4, 0.0),
        a5: pick!(a5, 0.0),
        n: pick!(n, defaults.n),
        steps: pick!(steps, defaults.steps),
        x0: pick!(x0, defaults.x0),
        y0: pick!(y0, defaults.y0),
        output: flags.output.clone().or(file.output.clone()),
        format: pick!(format, Format::Csv),
        format_explicit,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(c: &RunConfig) -> CliResult<()> {
    let finite = [
        ("h", c.h),
        ("epsilon", c.epsilon),
        ("lambda", c.lambda),
        ("r", c.r),
        ("a1", c.a1),
        ("a2", c.a2),
        ("a4", c.a4),
        ("a5", c.a5),
        ("x0", c.x0),
        ("y0", c.y0),
    ];
    if let Some((k, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Usage(format!("{k} must be finite, got {v}")));
    }
    if !(c.h > 0.0) {
        return Err(CliError::Usage(format!("h must be > 0, got {}", c.h)));
    }
    if c.a3 != 0.0 {
        return Err(CliError::Usage("a3 is identically zero in this model".into()));
    }
    if c.n < 1 {
        return Err(CliError::Usage(format!("N must be >= 1, got {}", c.n)));
    }
    Ok(())
}
