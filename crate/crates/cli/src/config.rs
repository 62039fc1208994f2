//! Scenario configuration: `key=value` files merged with command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stationary_light::C64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    Fig2Cold,
    Fig2Thermal,
    Fig3QuasiCold,
    Fig4Compare,
    NonadiabaticStanding,
    NonadiabaticTraveling,
    MbConvergence,
    CoeffTable,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        Self::Fig2Cold,
        Self::Fig2Thermal,
        Self::Fig3QuasiCold,
        Self::Fig4Compare,
        Self::NonadiabaticStanding,
        Self::NonadiabaticTraveling,
        Self::MbConvergence,
        Self::CoeffTable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2Cold => "fig2_cold",
            Self::Fig2Thermal => "fig2_thermal",
            Self::Fig3QuasiCold => "fig3_quasi_cold",
            Self::Fig4Compare => "fig4_compare",
            Self::NonadiabaticStanding => "nonadiabatic_standing",
            Self::NonadiabaticTraveling => "nonadiabatic_traveling",
            Self::MbConvergence => "mb_convergence",
            Self::CoeffTable => "coeff_table",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Fig2Cold => "standing-wave retrieval in a cold medium, analytic and numeric energy density",
            Self::Fig2Thermal => "standing-wave retrieval in a thermal gas, diffusing energy density",
            Self::Fig3QuasiCold => "quasi-standing retrieval in a cold medium, Psi+ and Psi- amplitudes",
            Self::Fig4Compare => "quasi-standing retrieval, cold vs thermal energy density",
            Self::NonadiabaticStanding => "spectral propagator with absorption length, standing wave",
            Self::NonadiabaticTraveling => "spectral propagator with absorption length, traveling wave",
            Self::MbConvergence => "Maxwell-Bloch harmonic oracle error vs gamma_ba T_s and truncation",
            Self::CoeffTable => "closed-form Fourier coefficients vs quadrature over y",
        }
    }

    /// Figure of the original study the scenario regenerates, if any.
    pub fn figure(self) -> &'static str {
        match self {
            Self::Fig2Cold => "Fig. 2 (left)",
            Self::Fig2Thermal => "Fig. 2 (right)",
            Self::Fig3QuasiCold => "Fig. 3",
            Self::Fig4Compare => "Fig. 4",
            _ => "-",
        }
    }

    fn default_kappa_plus_sq(self) -> f64 {
        match self {
            Self::Fig3QuasiCold | Self::Fig4Compare => 0.55,
            Self::NonadiabaticTraveling => 1.0,
            _ => 0.5,
        }
    }

    fn default_t_max(self) -> f64 {
        match self {
            Self::Fig3QuasiCold => 24.0,
            _ => 10.0,
        }
    }

    fn default_nz(self) -> usize {
        match self {
            Self::MbConvergence => 128,
            _ => 2048,
        }
    }

    fn default_z0(self) -> f64 {
        match self {
            Self::NonadiabaticTraveling => -5.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (see `list`)"))
    }
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Line(usize),
    Flag(&'static str),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(n) => write!(f, "line {n}"),
            Source::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_}: malformed line `{text}`, expected key=value")]
    Malformed { source_: Source, text: String },
    #[error("{source_}: unknown key `{key}`")]
    UnknownKey { source_: Source, key: String },
    #[error("{source_}: invalid value `{value}` for `{key}`: {reason}")]
    OutOfRange {
        source_: Source,
        key: String,
        value: String,
        reason: String,
    },
    #[error("no scenario given")]
    MissingScenario,
    #[error("cannot read config {path}: {err}")]
    Read { path: PathBuf, err: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub kappa_plus_sq: f64,
    pub kappa_minus_sq: f64,
    /// Relative phase of the counter-propagating coupling field.
    pub phi: f64,
    pub l_a: f64,
    pub gamma_bc: C64,
    pub z_min: f64,
    pub z_max: f64,
    pub nz: usize,
    pub t_max: f64,
    /// Number of time slices per heatmap, both ends included.
    pub snapshots: usize,
    /// Centre of the stored pulse.
    pub z0: f64,
    pub pulse_length: f64,
    pub out_dir: PathBuf,
}

pub const KEYS: [&str; 15] = [
    "scenario",
    "kappa_plus_sq",
    "kappa_minus_sq",
    "phi",
    "l_a",
    "gamma_bc",
    "gamma_bc_im",
    "z_min",
    "z_max",
    "nz",
    "t_max",
    "snapshots",
    "z0",
    "pulse_length",
    "out",
];

impl ScenarioConfig {
    pub fn defaults(scenario: ScenarioName) -> Self {
        let p = scenario.default_kappa_plus_sq();
        Self {
            scenario,
            kappa_plus_sq: p,
            kappa_minus_sq: 1.0 - p,
            phi: 0.0,
            l_a: 0.1,
            gamma_bc: C64::new(0.0, 0.0),
            z_min: -10.0,
            z_max: 10.0,
            nz: scenario.default_nz(),
            t_max: scenario.default_t_max(),
            snapshots: 100,
            z0: scenario.default_z0(),
            pulse_length: 1.0,
            out_dir: Path::new("output").join(scenario.as_str()),
        }
    }

    /// `key=value` lines, the form read by [`parse_config`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        line("scenario", self.scenario.to_string());
        line("kappa_plus_sq", self.kappa_plus_sq.to_string());
        line("kappa_minus_sq", self.kappa_minus_sq.to_string());
        line("phi", self.phi.to_string());
        line("l_a", self.l_a.to_string());
        line("gamma_bc", self.gamma_bc.re.to_string());
        line("gamma_bc_im", self.gamma_bc.im.to_string());
        line("z_min", self.z_min.to_string());
        line("z_max", self.z_max.to_string());
        line("nz", self.nz.to_string());
        line("t_max", self.t_max.to_string());
        line("snapshots", self.snapshots.to_string());
        line("z0", self.z0.to_string());
        line("pulse_length", self.pulse_length.to_string());
        line("out", self.out_dir.display().to_string());
        s
    }
}

/// Command-line overrides; these win over file entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
    pub nz: Option<usize>,
    pub t_max: Option<f64>,
    pub kappa_plus_sq: Option<f64>,
    pub l_a: Option<f64>,
    pub gamma_bc: Option<f64>,
}

impl Overrides {
    fn entries(&self) -> Vec<Entry> {
        let mut v = Vec::new();
        let mut push = |key: &'static str, flag: &'static str, value: Option<String>| {
            if let Some(value) = value {
                v.push(Entry {
                    key: key.to_string(),
                    value,
                    source: Source::Flag(flag),
                });
            }
        };
        push("scenario", "scenario", self.scenario.clone());
        push("out", "out", self.out.as_ref().map(|p| p.display().to_string()));
        push("nz", "nz", self.nz.map(|x| x.to_string()));
        push("t_max", "tmax", self.t_max.map(|x| x.to_string()));
        push(
            "kappa_plus_sq",
            "kappa-plus-sq",
            self.kappa_plus_sq.map(|x| x.to_string()),
        );
        push("l_a", "la", self.l_a.map(|x| x.to_string()));
        push("gamma_bc", "gamma-bc", self.gamma_bc.map(|x| x.to_string()));
        v
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    source: Source,
}

fn parse_lines(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let source = Source::Line(i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                source_: source,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                source_: source,
                key: key.to_string(),
            });
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            source,
        });
    }
    Ok(entries)
}

fn bad(e: &Entry, reason: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange {
        source_: e.source.clone(),
        key: e.key.clone(),
        value: e.value.clone(),
        reason: reason.into(),
    }
}

fn real(e: &Entry) -> Result<f64, ConfigError> {
    match e.value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(bad(e, "not a finite number")),
    }
}

fn in_range(e: &Entry, lo: f64, hi: f64) -> Result<f64, ConfigError> {
    let x = real(e)?;
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(bad(e, format!("out of [{lo}, {hi}]")))
    }
}

fn positive(e: &Entry) -> Result<f64, ConfigError> {
    let x = real(e)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(bad(e, "must be positive"))
    }
}

fn count(e: &Entry, min: usize) -> Result<usize, ConfigError> {
    match e.value.parse::<usize>() {
        Ok(n) if n >= min => Ok(n),
        Ok(_) => Err(bad(e, format!("must be at least {min}"))),
        Err(_) => Err(bad(e, "not a non-negative integer")),
    }
}

/// Builds a config from optional file contents plus flag overrides.
pub fn resolve(file_text: Option<&str>, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let mut entries = match file_text {
        Some(t) => parse_lines(t)?,
        None => Vec::new(),
    };
    entries.extend(overrides.entries());

    // The scenario fixes the defaults, so it is resolved first; the last
    // mention (flags come last) wins.
    let scenario_entry = entries
        .iter()
        .rev()
        .find(|e| e.key == "scenario")
        .ok_or(ConfigError::MissingScenario)?;
    let scenario = scenario_entry
        .value
        .parse::<ScenarioName>()
        .map_err(|reason| bad(scenario_entry, reason))?;
    let mut cfg = ScenarioConfig::defaults(scenario);

    let mut plus: Option<(f64, &Entry)> = None;
    let mut minus: Option<(f64, &Entry)> = None;
    for e in &entries {
        match e.key.as_str() {
            "scenario" => {}
            "kappa_plus_sq" => plus = Some((in_range(e, 0.0, 1.0)?, e)),
            "kappa_minus_sq" => minus = Some((in_range(e, 0.0, 1.0)?, e)),
            "phi" => cfg.phi = real(e)?,
            "l_a" => cfg.l_a = in_range(e, 0.0, f64::MAX)?,
            "gamma_bc" => cfg.gamma_bc.re = in_range(e, 0.0, f64::MAX)?,
            "gamma_bc_im" => cfg.gamma_bc.im = real(e)?,
            "z_min" => cfg.z_min = real(e)?,
            "z_max" => cfg.z_max = real(e)?,
            "nz" => cfg.nz = count(e, 16)?,
            "t_max" => cfg.t_max = positive(e)?,
            "snapshots" => cfg.snapshots = count(e, 2)?,
            "z0" => cfg.z0 = real(e)?,
            "pulse_length" => cfg.pulse_length = positive(e)?,
            "out" => {
                if e.value.is_empty() {
                    return Err(bad(e, "empty path"));
                }
                cfg.out_dir = PathBuf::from(&e.value);
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    source_: e.source.clone(),
                    key: e.key.clone(),
                })
            }
        }
    }

    match (plus, minus) {
        (Some((p, _)), None) => (cfg.kappa_plus_sq, cfg.kappa_minus_sq) = (p, 1.0 - p),
        (None, Some((m, _))) => (cfg.kappa_plus_sq, cfg.kappa_minus_sq) = (1.0 - m, m),
        (Some((p, _)), Some((m, e))) => {
            if p + m <= 0.0 {
                return Err(bad(e, "kappa_plus_sq + kappa_minus_sq must be positive"));
            }
            (cfg.kappa_plus_sq, cfg.kappa_minus_sq) = (p / (p + m), m / (p + m));
        }
        (None, None) => {}
    }

    let last = |key: &str| entries.iter().rev().find(|e| e.key == key);
    if cfg.z_min >= cfg.z_max {
        let e = last("z_max").or(last("z_min")).expect("defaults are ordered");
        return Err(bad(e, "z_min must be below z_max"));
    }
    if !(cfg.z_min..cfg.z_max).contains(&cfg.z0) {
        if let Some(e) = last("z0") {
            return Err(bad(e, "pulse centre outside the domain"));
        }
    }
    Ok(cfg)
}

/// Reads `path` (if any) and merges the flag overrides.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|err| ConfigError::Read {
            path: p.to_path_buf(),
            err,
        })?),
        None => None,
    };
    resolve(text.as_deref(), overrides)
}
