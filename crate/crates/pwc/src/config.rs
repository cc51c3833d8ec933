//! Run configuration: a TOML file with defaults for every field.
//!
//! ```toml
//! dt = "T/4000"
//! state = "coherent:1.0+0.0i"
//! lags = [0, "T/8", "0.5T", "T"]
//!
//! [params]
//! mass = 1.0
//! omega = 1.0
//! hbar = 1.0
//!
//! [grid]
//! x_min = -10.0
//! x_max = 10.0
//! n_points = 1024
//!
//! [ensemble]
//! n = 10000
//! scheme = "quantile"
//! seed = 0
//! ```
//!
//! Times are plain numbers or multiples of the period `T`: `"0.5T"`,
//! `"T/8"`, `"3T/8"`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use pwc_core::bohm::SamplingScheme;
use pwc_core::correlators::SweepConfig;
use pwc_core::oscillator::build_state;
use pwc_core::{Grid, OscillatorParams, StateSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Invalid or unreadable configuration (exit status 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl From<pwc_core::Error> for ConfigError {
    fn from(e: pwc_core::Error) -> Self {
        match e {
            pwc_core::Error::Config(m) => ConfigError(m),
            other => ConfigError(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeValue {
    Absolute(f64),
    Text(String),
}

impl TimeValue {
    pub fn periods(fraction: &str) -> Self {
        TimeValue::Text(fraction.to_string())
    }

    pub fn resolve(&self, period: f64) -> Result<f64, ConfigError> {
        let value = match self {
            TimeValue::Absolute(v) => *v,
            TimeValue::Text(s) => parse_time(s, period)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(invalid(format!("time {self:?} is not finite")))
        }
    }
}

fn parse_time(text: &str, period: f64) -> Result<f64, ConfigError> {
    let s = text.trim();
    let bad = || {
        invalid(format!(
            "cannot parse time {text:?} (expected e.g. 1.5, \"0.5T\", \"T/8\")"
        ))
    };
    let Some((coef, rest)) = s.split_once('T') else {
        return s.parse().map_err(|_| bad());
    };
    let coef = coef.trim();
    let coef: f64 = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.trim_end_matches('*').trim().parse().map_err(|_| bad())?,
    };
    let rest = rest.trim();
    let divisor: f64 = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?
    };
    Ok(coef * period / divisor)
}

/// Parses `eigenstate:N`, `coherent:A` or `superposition:[c0,c1,...]` with
/// complex numbers written like `0.5`, `1-2i`, `0.3+0.1i`. Superposition
/// coefficients are renormalized.
pub fn parse_state(text: &str) -> Result<StateSpec, ConfigError> {
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| invalid(format!("state {text:?} must look like kind:argument")))?;
    let complex = |s: &str| {
        Complex64::from_str(&s.replace(' ', "")).map_err(|_| {
            invalid(format!(
                "cannot parse complex number {s:?} in state {text:?}"
            ))
        })
    };
    match kind.trim() {
        "eigenstate" => arg.trim().parse().map(StateSpec::Eigenstate).map_err(|_| {
            invalid(format!(
                "eigenstate level {arg:?} is not a nonnegative integer"
            ))
        }),
        "coherent" => Ok(StateSpec::Coherent(complex(arg)?)),
        "superposition" => {
            let inner = arg.trim().trim_start_matches('[').trim_end_matches(']');
            let coeffs = inner
                .split(',')
                .map(complex)
                .collect::<Result<Vec<_>, _>>()?;
            let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(invalid(format!("superposition {text:?} has no weight")));
            }
            StateSpec::superposition(coeffs.into_iter().map(|c| c / norm).collect())
                .map_err(ConfigError::from)
        }
        other => Err(invalid(format!("unknown state kind {other:?}"))),
    }
}

pub fn format_state(spec: &StateSpec) -> String {
    let c = |z: &Complex64| format!("{}{:+}i", z.re, z.im);
    match spec {
        StateSpec::Eigenstate(n) => format!("eigenstate:{n}"),
        StateSpec::Coherent(a) => format!("coherent:{}", c(a)),
        StateSpec::Superposition(cs) => {
            format!(
                "superposition:[{}]",
                cs.iter().map(c).collect::<Vec<_>>().join(",")
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -10.0,
            x_max: 10.0,
            n_points: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Quantile,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub n: usize,
    pub scheme: Scheme,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            scheme: Scheme::Quantile,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Largest Schrödinger step.
    pub dt: TimeValue,
    pub state: String,
    /// Correlation lags `tau` (rows use `s = tau`, `t = 0`).
    pub lags: Vec<TimeValue>,
    /// Length of exported trajectories.
    pub duration: TimeValue,
    /// Keep every k-th trajectory step.
    pub record_every: usize,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub ensemble: EnsembleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: TimeValue::periods("T/4000"),
            state: "eigenstate:0".into(),
            lags: ["0", "T/8", "T/4", "3T/8", "T/2", "5T/8", "3T/4", "T"]
                .into_iter()
                .map(TimeValue::periods)
                .collect(),
            duration: TimeValue::periods("T"),
            record_every: 40,
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Validates every field and evaluates period-relative times.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let p = &self.params;
        if ![p.mass, p.omega, p.hbar, self.grid.x_min, self.grid.x_max]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(invalid("parameters and grid bounds must be finite"));
        }
        let params = OscillatorParams::new(p.mass, p.omega, p.hbar)?;
        let grid = Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)?;
        let period = params.period();
        let dt = self.dt.resolve(period)?;
        if dt <= 0.0 {
            return Err(invalid(format!("dt must be positive (got {dt})")));
        }
        let duration = self.duration.resolve(period)?;
        if duration <= 0.0 {
            return Err(invalid(format!(
                "duration must be positive (got {duration})"
            )));
        }
        let lags = self
            .lags
            .iter()
            .map(|l| l.resolve(period))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(l) = lags.iter().find(|&&l| l < 0.0) {
            return Err(invalid(format!("lags must be nonnegative (got {l})")));
        }
        if self.ensemble.n == 0 {
            return Err(invalid("ensemble.n must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        let state = parse_state(&self.state)?;
        build_state(&state, &params, &grid)
            .map_err(|e| invalid(format!("state {}: {e}", self.state)))?;
        let sampling = match self.ensemble.scheme {
            Scheme::Quantile => SamplingScheme::Quantile,
            Scheme::Random => SamplingScheme::Random {
                seed: self.ensemble.seed,
            },
        };
        Ok(Resolved {
            raw: self.clone(),
            params,
            grid,
            dt,
            state,
            ensemble_size: self.ensemble.n,
            sampling,
            lags,
            duration,
            record_every: self.record_every,
        })
    }
}

/// A validated configuration with every time in absolute units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub params: OscillatorParams,
    pub grid: Grid,
    pub dt: f64,
    pub state: StateSpec,
    pub ensemble_size: usize,
    pub sampling: SamplingScheme,
    pub lags: Vec<f64>,
    pub duration: f64,
    pub record_every: usize,
}

impl Resolved {
    pub fn period(&self) -> f64 {
        self.params.period()
    }

    pub fn sweep_config(&self, lags: Vec<f64>) -> SweepConfig {
        SweepConfig {
            params: self.params,
            grid: self.grid.clone(),
            dt: self.dt,
            ensemble_size: self.ensemble_size,
            sampling: self.sampling,
            record_every: self.record_every,
            fock_dimension: None,
            lags,
        }
    }

    pub fn params_json(&self) -> Value {
        json!({
            "mass": self.params.mass(),
            "omega": self.params.omega(),
            "hbar": self.params.hbar(),
            "period": self.period(),
        })
    }

    pub fn grid_json(&self) -> Value {
        json!({
            "x_min": self.grid.x_min(),
            "x_max": self.grid.x_max(),
            "n_points": self.grid.n_points(),
            "dx": self.grid.dx(),
        })
    }

    /// The fully resolved configuration, embedded in every JSON report.
    pub fn echo(&self) -> Value {
        let (scheme, seed) = match self.sampling {
            SamplingScheme::Quantile => ("quantile", None),
            SamplingScheme::Random { seed } => ("random", Some(seed)),
        };
        json!({
            "params": self.params_json(),
            "grid": self.grid_json(),
            "dt": self.dt,
            "state": format_state(&self.state),
            "ensemble": { "n": self.ensemble_size, "scheme": scheme, "seed": seed },
            "lags": self.lags,
            "duration": self.duration,
            "record_every": self.record_every,
            "source": serde_json::to_value(&self.raw).expect("config serializes"),
        })
    }
}
