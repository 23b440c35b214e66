//! Experiment configuration files (TOML).
//!
//! A config is flat: scalar keys and grids at the top level, the target family as a
//! `[target]` table. Keys not listed here are rejected.

use scaling_lab::diagnostics::{
    StepConstant, StepExponent, SweepConfig, TargetFamily, DEFAULT_DEGENERATE_HIGH, DEFAULT_DEGENERATE_LOW,
    DEFAULT_I_STAR, DEFAULT_REPLICATES, DEFAULT_SJD_TOLERANCE, DEFAULT_TOLERANCE,
};
use scaling_lab::ProposalKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_i_star() -> usize {
    DEFAULT_I_STAR
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_sjd_tolerance() -> f64 {
    DEFAULT_SJD_TOLERANCE
}
fn default_high() -> f64 {
    DEFAULT_DEGENERATE_HIGH
}
fn default_low() -> f64 {
    DEFAULT_DEGENERATE_LOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory receiving `sweep.csv` (and `sweep.gp`).
    pub output_path: String,
    pub kernels: Vec<ProposalKind>,
    pub n_grid: Vec<usize>,
    pub rho_grid: Vec<StepExponent>,
    pub l_grid: Vec<StepConstant>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "default_i_star")]
    pub i_star: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_sjd_tolerance")]
    pub sjd_tolerance: f64,
    #[serde(default = "default_high")]
    pub degenerate_high: f64,
    #[serde(default = "default_low")]
    pub degenerate_low: f64,
    pub target: TargetFamily,
}

impl ExperimentConfig {
    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            target: self.target.clone(),
            kernels: self.kernels.clone(),
            n_grid: self.n_grid.clone(),
            rho_grid: self.rho_grid.clone(),
            l_grid: self.l_grid.clone(),
            iterations: self.iterations,
            burn_in: self.burn_in,
            replicates: self.replicates,
            master_seed: self.master_seed,
            i_star: self.i_star,
            tolerance: self.tolerance,
            sjd_tolerance: self.sjd_tolerance,
            degenerate_high: self.degenerate_high,
            degenerate_low: self.degenerate_low,
        }
    }

    /// Parses and validates a config held in memory. `origin` only labels errors.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let position = e.span().map(|span| line_col(text, span.start));
            ConfigError::new(origin, position, e.message().trim().to_string())
        })?;
        config.sweep().validate().map_err(|e| {
            let message = e.to_string();
            let position = locate_key(text, &message).map(|line| (line, 1));
            ConfigError::new(origin, position, message)
        })?;
        if config.output_path.trim().is_empty() {
            let position = locate_key(text, "output_path").map(|line| (line, 1));
            return Err(ConfigError::new(origin, position, "output_path must be nonempty".into()));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path, None, format!("cannot read config: {e}")))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    /// 1-based line and column.
    pub position: Option<(usize, usize)>,
    pub message: String,
}

impl ConfigError {
    fn new(path: &Path, position: Option<(usize, usize)>, message: String) -> Self {
        Self { path: path.to_path_buf(), position, message }
    }

    pub fn line(&self) -> Option<usize> {
        self.position.map(|p| p.0)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some((line, col)) => write!(f, "{}:{line}:{col}: {}", self.path.display(), self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

const KEYS: [&str; 15] = [
    "output_path",
    "kernels",
    "n_grid",
    "rho_grid",
    "l_grid",
    "iterations",
    "burn_in",
    "replicates",
    "master_seed",
    "i_star",
    "tolerance",
    "sjd_tolerance",
    "degenerate_high",
    "degenerate_low",
    "target",
];

/// Line of the first config key named in a validation message.
fn locate_key(text: &str, message: &str) -> Option<usize> {
    let mut named: Vec<(usize, &str)> = KEYS
        .iter()
        .filter_map(|k| {
            message
                .match_indices(k)
                .find(|(i, _)| {
                    let before = message[..*i].chars().next_back();
                    let after = message[i + k.len()..].chars().next();
                    !before.is_some_and(|c| c == '_' || c.is_alphanumeric())
                        && !after.is_some_and(|c| c == '_' || c.is_alphanumeric())
                })
                .map(|(i, _)| (i, *k))
        })
        .collect();
    named.sort();
    named
        .iter()
        .find_map(|(_, key)| {
            text.lines().position(|l| {
                let l = l.trim_start();
                l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
                    || (*key == "target" && l.starts_with("[target]"))
            })
        })
        .map(|i| i + 1)
}
