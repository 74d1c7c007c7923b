//! Experiment configuration: a JSON document, overridable field by field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Caps,
    MeasureFit,
    Integrals,
    Regress,
    JacobianCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Caps => "caps",
            Mode::MeasureFit => "measure-fit",
            Mode::Integrals => "integrals",
            Mode::Regress => "regress",
            Mode::JacobianCheck => "jacobian-check",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Rates of the headline valence regression (`N = 4π²λ ≈ 10², 10³, 10⁴`).
pub const REGRESSION_LAMBDAS: [f64; 3] = [2.533, 25.33, 253.3];

/// All fields optional in the file; mode defaults fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub samples: Option<u64>,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub bins: Option<usize>,
    pub tol: Option<f64>,
}

/// A configuration with every field the mode needs resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub lambdas: Vec<f64>,
    pub trials: u64,
    pub samples: u64,
    pub master_seed: u64,
    pub format: Format,
    pub t_min: f64,
    pub t_max: f64,
    pub bins: usize,
    pub tol: f64,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))
    }

    /// Fills mode defaults and checks the invariants.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let mode = self.mode.ok_or_else(|| config_err("no mode given"))?;
        let lambdas = match (&self.lambdas, self.lambda) {
            (Some(l), _) => l.clone(),
            (None, Some(l)) => vec![l],
            (None, None) => match mode {
                Mode::Integrals => vec![1.0, 2.0, 4.0],
                Mode::Regress => REGRESSION_LAMBDAS.to_vec(),
                Mode::Simulate => return Err(config_err("simulate needs --lambda")),
                _ => Vec::new(),
            },
        };
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(config_err(format!("rates must be positive and finite: {lambdas:?}")));
        }
        let (trials, samples) = match mode {
            Mode::Simulate => (self.trials.unwrap_or(1000), 0),
            Mode::Caps => (0, self.samples.unwrap_or(1_000_000)),
            Mode::MeasureFit => (0, self.samples.unwrap_or(10_000_000)),
            Mode::Integrals => (self.trials.unwrap_or(10_000), self.samples.unwrap_or(1_000_000)),
            Mode::Regress => (self.trials.unwrap_or(200), 0),
            Mode::JacobianCheck => (0, self.samples.unwrap_or(1000)),
        };
        let needs_trials = matches!(mode, Mode::Simulate | Mode::Integrals | Mode::Regress);
        let needs_samples = !matches!(mode, Mode::Simulate | Mode::Regress);
        if needs_trials && trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if needs_samples && samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        if mode == Mode::Simulate && lambdas.len() != 1 {
            return Err(config_err("simulate takes a single rate"));
        }
        if mode == Mode::Regress {
            let mut distinct = lambdas.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let span = (distinct.last().unwrap_or(&1.0) / distinct.first().unwrap_or(&1.0)).log10();
            if distinct.len() < 3 || span < 1.5 {
                return Err(config_err("regress needs at least 3 distinct rates spanning 1.5 decades"));
            }
        }
        let t_min = self.t_min.unwrap_or(0.005);
        let t_max = self.t_max.unwrap_or(0.3);
        let bins = self.bins.unwrap_or(60);
        if mode == Mode::MeasureFit && !(t_min > 0.0 && t_min < t_max && t_max < 0.5 && bins >= 2) {
            return Err(config_err("measure-fit needs 0 < tmin < tmax < 0.5 and bins >= 2"));
        }
        let tol = self.tol.unwrap_or(1e-5);
        if !(tol > 0.0) {
            return Err(config_err("tol must be positive"));
        }
        Ok(ResolvedConfig {
            mode,
            lambdas,
            trials,
            samples,
            master_seed: self.master_seed,
            format: self.format,
            t_min,
            t_max,
            bins,
            tol,
        })
    }
}
