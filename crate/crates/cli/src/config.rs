use std::fmt;
use std::path::{Path, PathBuf};

use fredholm_core::problems::ONE_D;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tsve,
    Tikhonov,
    /// Truncated SVD of the Gauss-Legendre collocation matrix.
    DiscreteTsvd,
    /// Tikhonov on the Gauss-Legendre collocation matrix.
    DiscreteTikhonov,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Tsve => "tsve",
            Method::Tikhonov => "tikhonov",
            Method::DiscreteTsvd => "discrete-tsvd",
            Method::DiscreteTikhonov => "discrete-tikhonov",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Method::DiscreteTsvd | Method::DiscreteTikhonov)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the truncation index is chosen for truncated methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Smallest index whose residual is at most `eta * delta`.
    #[default]
    Discrepancy,
    /// Largest index with `sigma >= eta * delta`.
    Sigma,
}

fn default_discrete_n() -> usize {
    400
}

fn default_max_rank() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<String>,
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub eta: f64,
    /// Relative singular value cutoff of the expansion.
    pub cutoff_eps: f64,
    pub aca_tol: f64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub rule: Rule,
    /// Gauss-Legendre nodes for the discrete methods.
    #[serde(default = "default_discrete_n")]
    pub discrete_n: usize,
    #[serde(default = "default_max_rank")]
    pub max_rank: usize,
}

impl Default for ExperimentConfig {
    /// The table grid: five problems, three noise levels, both continuous
    /// methods, seeds 1 to 10.
    fn default() -> Self {
        Self {
            problems: ONE_D.iter().map(|s| s.to_string()).collect(),
            alphas: vec![1e-3, 1e-2, 1e-1],
            methods: vec![Method::Tsve, Method::Tikhonov],
            seeds: (1..=10).collect(),
            eta: 1.0,
            cutoff_eps: fredholm_core::sve::DEFAULT_CUTOFF,
            aca_tol: 1e-13,
            output_dir: PathBuf::from("out"),
            rule: Rule::Discrepancy,
            discrete_n: default_discrete_n(),
            max_rank: default_max_rank(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.problems.is_empty() {
            return bad("problem list is empty".into());
        }
        if self.alphas.is_empty() {
            return bad("noise level list is empty".into());
        }
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        for p in &self.problems {
            if !ONE_D.contains(&p.as_str()) {
                return bad(format!("unknown 1D problem {p:?}"));
            }
        }
        for &a in &self.alphas {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("noise level {a} must be finite and >= 0"));
            }
        }
        for (name, v) in [("cutoff_eps", self.cutoff_eps), ("aca_tol", self.aca_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} is outside (0, 1)"));
            }
        }
        if !(self.eta >= 1.0 && self.eta.is_finite()) {
            return bad(format!("eta = {} must be >= 1", self.eta));
        }
        if self.discrete_n < 2 {
            return bad("discrete_n must be >= 2".into());
        }
        if self.max_rank == 0 {
            return bad("max_rank must be >= 1".into());
        }
        Ok(())
    }

    /// Number of rows `run_bench` produces.
    pub fn cardinality(&self) -> usize {
        self.problems.len() * self.methods.len() * self.alphas.len() * self.seeds.len()
    }
}
