//! Experiment configuration: a flat TOML file of key-value pairs.
//!
//! ```toml
//! n_files = 5
//! n_users = 5
//! total_rate = 1.0
//! alpha = [1.0, 0.0, 0.0, 0.0, 0.0]   # or: level_rates = [...]
//! inv_gain_intercept = 2.0             # 1/h_k² = intercept - slope·(k-1)
//! inv_gain_slope = 0.2                 # or: gains_sq = [...]
//! sweep = "alpha"                      # or "memory"
//! memory = 0.5                         # fixed M, alpha sweeps only
//! sweep_alpha_index = 5
//! complement_alpha_index = 1
//! sweep_start = 0.0
//! sweep_stop = 1.0
//! sweep_steps = 20
//! grid_resolution = 20                 # optional
//! refine_tol = 1e-10                   # optional
//! include_piggyback = true             # optional
//! include_ignorant = true              # optional
//! ```

use std::path::{Path, PathBuf};

use corrcache::superposition::OptimizerSettings;
use corrcache::model::MAX_EXHAUSTIVE;
use corrcache::{AlphaProfile, ChannelConfig, CorrelatedLibrary};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("unknown preset `{0}` (available: {names})", names = PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", "))]
    UnknownPreset(String),
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, message: message.into() }
}

const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("three_users", include_str!("../presets/three_users.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_files: Option<usize>,
    n_users: Option<usize>,
    total_rate: Option<f64>,
    alpha: Option<Vec<f64>>,
    level_rates: Option<Vec<f64>>,
    gains_sq: Option<Vec<f64>>,
    inv_gain_intercept: Option<f64>,
    inv_gain_slope: Option<f64>,
    sweep: Option<String>,
    memory: Option<f64>,
    sweep_alpha_index: Option<usize>,
    complement_alpha_index: Option<usize>,
    sweep_start: Option<f64>,
    sweep_stop: Option<f64>,
    sweep_steps: Option<usize>,
    grid_resolution: Option<usize>,
    refine_tol: Option<f64>,
    include_piggyback: Option<bool>,
    include_ignorant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateSpec {
    Levels(Vec<f64>),
    Alpha { alpha: Vec<f64>, total_rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Memory,
    /// `alpha[index] = x`, `alpha[complement]` absorbs the remainder.
    Alpha { memory: f64, index: usize, complement: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_files: usize,
    pub n_users: usize,
    pub rates: RateSpec,
    pub channel: ChannelConfig,
    pub sweep: Sweep,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_steps: usize,
    pub optimizer: OptimizerSettings,
    pub include_piggyback: bool,
    pub include_ignorant: bool,
}

/// One sweep point: the swept value, the library and the cache size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub library: CorrelatedLibrary,
    pub memory: f64,
}

fn require<T>(v: Option<T>, name: &'static str) -> Result<T, ConfigError> {
    v.ok_or_else(|| field(name, "missing"))
}

fn finite(v: f64, name: &'static str) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field(name, format!("{v} is not a finite number")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let text = preset_source(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
        Self::parse(text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let n_files = require(raw.n_files, "n_files")?;
        let n_users = require(raw.n_users, "n_users")?;
        if n_files == 0 || n_files > MAX_EXHAUSTIVE {
            return Err(field("n_files", format!("must be in [1, {MAX_EXHAUSTIVE}]")));
        }
        if n_users == 0 || n_users > MAX_EXHAUSTIVE {
            return Err(field("n_users", format!("must be in [1, {MAX_EXHAUSTIVE}]")));
        }

        let rates = match (raw.level_rates, raw.alpha) {
            (Some(_), Some(_)) => return Err(field("alpha", "give either `alpha` or `level_rates`, not both")),
            (None, None) => return Err(field("level_rates", "missing (or give `alpha` with `total_rate`)")),
            (Some(r), None) => {
                if raw.total_rate.is_some() {
                    return Err(field("total_rate", "only valid together with `alpha`"));
                }
                if r.len() != n_files {
                    return Err(field("level_rates", format!("expected {n_files} entries, got {}", r.len())));
                }
                CorrelatedLibrary::new(r.clone()).map_err(|e| field("level_rates", e.to_string()))?;
                RateSpec::Levels(r)
            }
            (None, Some(a)) => {
                if a.len() != n_files {
                    return Err(field("alpha", format!("expected {n_files} entries, got {}", a.len())));
                }
                let total_rate = finite(require(raw.total_rate, "total_rate")?, "total_rate")?;
                if total_rate <= 0.0 {
                    return Err(field("total_rate", "must be positive"));
                }
                RateSpec::Alpha { alpha: a, total_rate }
            }
        };

        let channel = match (raw.gains_sq, raw.inv_gain_intercept, raw.inv_gain_slope) {
            (Some(g), None, None) => {
                if g.len() != n_users {
                    return Err(field("gains_sq", format!("expected {n_users} entries, got {}", g.len())));
                }
                ChannelConfig::new(g).map_err(|e| field("gains_sq", e.to_string()))?
            }
            (None, Some(a), Some(b)) => {
                let a = finite(a, "inv_gain_intercept")?;
                let b = finite(b, "inv_gain_slope")?;
                if a <= 0.0 {
                    return Err(field("inv_gain_intercept", "must be positive"));
                }
                if a - b * (n_users - 1) as f64 <= 0.0 {
                    return Err(field("inv_gain_slope", "profile gives a non-positive 1/h_K²"));
                }
                ChannelConfig::linear_inverse_profile(n_users, a, b)
                    .map_err(|e| field("inv_gain_slope", e.to_string()))?
            }
            (Some(_), _, _) => return Err(field("gains_sq", "give either `gains_sq` or the inverse-gain profile, not both")),
            (None, None, _) => return Err(field("inv_gain_intercept", "missing (or give `gains_sq`)")),
            (None, Some(_), None) => return Err(field("inv_gain_slope", "missing")),
        };

        let sweep_start = finite(require(raw.sweep_start, "sweep_start")?, "sweep_start")?;
        let sweep_stop = finite(require(raw.sweep_stop, "sweep_stop")?, "sweep_stop")?;
        let sweep_steps = require(raw.sweep_steps, "sweep_steps")?;
        if sweep_stop < sweep_start {
            return Err(field("sweep_stop", "must not be below `sweep_start`"));
        }
        if sweep_steps == 0 && sweep_stop != sweep_start {
            return Err(field("sweep_steps", "must be positive unless start equals stop"));
        }

        let sweep = match require(raw.sweep, "sweep")?.as_str() {
            "memory" => {
                for (v, name) in [(raw.memory.is_some(), "memory"),
                    (raw.sweep_alpha_index.is_some(), "sweep_alpha_index"),
                    (raw.complement_alpha_index.is_some(), "complement_alpha_index")]
                {
                    if v {
                        return Err(field(name, "only valid for `sweep = \"alpha\"`"));
                    }
                }
                if sweep_start < 0.0 {
                    return Err(field("sweep_start", "cache size must be non-negative"));
                }
                Sweep::Memory
            }
            "alpha" => {
                if !matches!(rates, RateSpec::Alpha { .. }) {
                    return Err(field("sweep", "alpha sweeps need `alpha` and `total_rate`"));
                }
                let memory = finite(require(raw.memory, "memory")?, "memory")?;
                if memory < 0.0 {
                    return Err(field("memory", "must be non-negative"));
                }
                let index = require(raw.sweep_alpha_index, "sweep_alpha_index")?;
                let complement = require(raw.complement_alpha_index, "complement_alpha_index")?;
                if index == 0 || index > n_files {
                    return Err(field("sweep_alpha_index", format!("must be in [1, {n_files}]")));
                }
                if complement == 0 || complement > n_files || complement == index {
                    return Err(field("complement_alpha_index", format!("must be in [1, {n_files}] and differ from the swept index")));
                }
                if sweep_start < 0.0 || sweep_stop > 1.0 {
                    return Err(field("sweep_stop", "swept fraction must stay in [0, 1]"));
                }
                Sweep::Alpha { memory, index: index - 1, complement: complement - 1 }
            }
            other => return Err(field("sweep", format!("`{other}` is neither \"memory\" nor \"alpha\""))),
        };

        let grid_resolution = raw.grid_resolution.unwrap_or(20);
        if grid_resolution == 0 {
            return Err(field("grid_resolution", "must be positive"));
        }
        let refine_tol = finite(raw.refine_tol.unwrap_or(1e-10), "refine_tol")?;
        if refine_tol <= 0.0 {
            return Err(field("refine_tol", "must be positive"));
        }

        let cfg = ExperimentConfig {
            n_files,
            n_users,
            rates,
            channel,
            sweep,
            sweep_start,
            sweep_stop,
            sweep_steps,
            optimizer: OptimizerSettings { grid_resolution, refine_tol, ..OptimizerSettings::default() },
            include_piggyback: raw.include_piggyback.unwrap_or(true),
            include_ignorant: raw.include_ignorant.unwrap_or(true),
        };
        cfg.points()?;
        Ok(cfg)
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        if self.sweep_steps == 0 {
            return vec![self.sweep_start];
        }
        let span = self.sweep_stop - self.sweep_start;
        (0..=self.sweep_steps)
            .map(|i| {
                if i == self.sweep_steps {
                    self.sweep_stop
                } else {
                    self.sweep_start + span * i as f64 / self.sweep_steps as f64
                }
            })
            .collect()
    }

    /// Every sweep point, in sweep order.
    pub fn points(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        self.sweep_values()
            .into_iter()
            .map(|value| {
                let (library, memory) = match (&self.sweep, &self.rates) {
                    (Sweep::Memory, RateSpec::Levels(r)) => (
                        CorrelatedLibrary::new(r.clone()).map_err(|e| field("level_rates", e.to_string()))?,
                        value,
                    ),
                    (Sweep::Memory, RateSpec::Alpha { alpha, total_rate }) => {
                        (alpha_library(alpha.clone(), *total_rate, "alpha")?, value)
                    }
                    (Sweep::Alpha { memory, index, complement }, RateSpec::Alpha { alpha, total_rate }) => {
                        let mut a = alpha.clone();
                        a[*index] = value;
                        let others: f64 = a
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| i != index && i != complement)
                            .map(|(_, v)| v)
                            .sum();
                        a[*complement] = 1.0 - value - others;
                        (alpha_library(a, *total_rate, "sweep_stop")?, *memory)
                    }
                    (Sweep::Alpha { .. }, RateSpec::Levels(_)) => unreachable!("rejected while parsing"),
                };
                Ok(SweepPoint { value, library, memory })
            })
            .collect()
    }
}

fn alpha_library(alpha: Vec<f64>, total_rate: f64, name: &'static str) -> Result<CorrelatedLibrary, ConfigError> {
    let a = AlphaProfile::new(alpha).map_err(|e| field(name, e.to_string()))?;
    CorrelatedLibrary::from_alpha(&a, total_rate).map_err(|e| field(name, e.to_string()))
}
