//! TOML run configuration.
//!
//! Top-level keys apply to every subcommand; each subcommand reads its own
//! section. Relative paths are resolved against the directory holding the
//! config file.
//!
//! ```toml
//! seed = 7
//! workers = 4
//! output = "report.json"
//! format = "json"            # or "csv"
//!
//! [variance]
//! mu = "mu.csv"
//! null_mask = "mask.csv"     # optional: nulls are the zero entries of mu
//! sigma = "sigma.fdpm"       # optional: identity when absent
//! t = 0.005
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use fdpvar_core::pi0::Pi0Method;
use fdpvar_core::simulate::{Model, DEFAULT_N, DEFAULT_P, DEFAULT_PFA_THRESHOLD, DEFAULT_REPS};
use fdpvar_core::theory::{BoundInterpretation, PairCase, DEFAULT_SKIP_EPS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub variance: Option<VarianceSection>,
    pub estimate: Option<EstimateSection>,
    pub simulate: Option<SimulateSection>,
    pub signcheck: Option<SigncheckSection>,
    pub conditions: Option<ConditionsSection>,
    pub sigma: Option<SigmaSection>,
}

fn default_skip_eps() -> f64 {
    DEFAULT_SKIP_EPS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSection {
    pub mu: PathBuf,
    pub null_mask: Option<PathBuf>,
    pub sigma: Option<PathBuf>,
    pub t: f64,
    #[serde(default = "default_skip_eps")]
    pub skip_eps: f64,
    /// Constant for the alternative/alternative condition; reported only when set.
    pub cond2_constant: Option<f64>,
}

fn default_methods() -> Vec<Pi0Method> {
    vec![Pi0Method::storey(), Pi0Method::smoothed(), Pi0Method::bootstrap(), Pi0Method::grenander()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub z: PathBuf,
    pub sigma: Option<PathBuf>,
    pub t: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Pi0Method>,
    #[serde(default = "default_skip_eps")]
    pub skip_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Asymptotic against Monte Carlo FDP standard deviation.
    #[default]
    Table2,
    /// Plug-in estimates of the SD and of p1 under each π0 method.
    Table3,
}

fn default_models() -> Vec<Model> {
    vec![Model::M1]
}
fn default_t_grid() -> Vec<f64> {
    vec![0.005, 0.02, 0.05]
}
fn default_p1_grid() -> Vec<usize> {
    vec![50, 100, 200]
}
fn default_p() -> usize {
    DEFAULT_P
}
fn default_n() -> usize {
    DEFAULT_N
}
fn default_pfa() -> f64 {
    DEFAULT_PFA_THRESHOLD
}
fn default_reps() -> usize {
    DEFAULT_REPS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default)]
    pub study: Study,
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    #[serde(default = "default_t_grid")]
    pub t: Vec<f64>,
    #[serde(default = "default_p1_grid")]
    pub p1: Vec<usize>,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_pfa")]
    pub pfa_threshold: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_skip_eps")]
    pub skip_eps: f64,
    /// π0 methods for the table3 study.
    #[serde(default = "default_methods")]
    pub methods: Vec<Pi0Method>,
    /// Where the CSV table goes; defaults to the output path with a `.csv`
    /// extension.
    pub csv_output: Option<PathBuf>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        toml::from_str("").expect("all simulate keys have defaults")
    }
}

fn default_sign_mu_multiples() -> Vec<f64> {
    vec![-4.0, -3.0, -2.1, -1.0, -0.5, 0.0, 0.5, 1.0, 2.1, 3.0, 4.0]
}
fn default_sign_sigma() -> Vec<f64> {
    vec![-0.9, -0.7, -0.5, -0.3, -0.2, -0.1, -0.05, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]
}
fn default_sign_t() -> Vec<f64> {
    vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigncheckSection {
    /// Means as multiples of |z_{t/2}|, so one grid spans every threshold.
    #[serde(default = "default_sign_mu_multiples")]
    pub mu_multiples: Vec<f64>,
    /// Absolute means; replaces `mu_multiples` when present.
    pub mu: Option<Vec<f64>>,
    #[serde(default = "default_sign_sigma")]
    pub sigma: Vec<f64>,
    #[serde(default = "default_sign_t")]
    pub t: Vec<f64>,
    #[serde(default)]
    pub bound_interpretation: BoundInterpretation,
    /// Restricts the sweep to one pair type.
    pub case: Option<PairCase>,
}

impl Default for SigncheckSection {
    fn default() -> Self {
        toml::from_str("").expect("all signcheck keys have defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsSection {
    pub mu: PathBuf,
    pub null_mask: Option<PathBuf>,
    pub sigma: Option<PathBuf>,
    pub t: f64,
    pub cond2_constant: Option<f64>,
}

/// Writes a model's post-PFA correlation matrix for use as a Σ input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSection {
    pub model: Model,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_pfa")]
    pub pfa_threshold: f64,
    /// FDPM unless the extension is `.csv`.
    pub matrix: PathBuf,
}

impl RunConfig {
    /// Parses a config file and resolves its relative paths.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(path, format!("cannot read: {e}")))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::input(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.resolve(&base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix_opt(&mut self.output);
        if let Some(s) = &mut self.variance {
            fix(&mut s.mu);
            fix_opt(&mut s.null_mask);
            fix_opt(&mut s.sigma);
        }
        if let Some(s) = &mut self.estimate {
            fix(&mut s.z);
            fix_opt(&mut s.sigma);
        }
        if let Some(s) = &mut self.simulate {
            fix_opt(&mut s.csv_output);
        }
        if let Some(s) = &mut self.conditions {
            fix(&mut s.mu);
            fix_opt(&mut s.null_mask);
            fix_opt(&mut s.sigma);
        }
        if let Some(s) = &mut self.sigma {
            fix(&mut s.matrix);
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

pub fn check_t(t: f64) -> CliResult<f64> {
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(CliError::Config(format!("t = {t} must lie in (0, 1)")))
    }
}
