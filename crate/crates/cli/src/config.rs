//! Experiment configuration, schema version 1.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "problem": { "kind": "random_game", "dx": 20, "dy": 20, "noise": 0.5, "seed": 7 },
//!   "algorithm": "smd_vertex",
//!   "mode": "quadratic",
//!   "epsilon": 1.0,
//!   "delta": 1e-5,
//!   "n_grid": [1000, 10000],
//!   "trials": 3,
//!   "master_seed": 42
//! }
//! ```
//!
//! Relative file paths inside `problem` resolve against the config's directory.

use std::path::{Path, PathBuf};

use dpmirror::Mode;
use serde::{Deserialize, Serialize};

use crate::fail::{CliError, Kind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SmdVertex,
    SmdBiasReduced,
    Boosted,
    DpSco,
    NonprivateSmd,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::SmdVertex => "smd_vertex",
            Algorithm::SmdBiasReduced => "smd_bias_reduced",
            Algorithm::Boosted => "boosted",
            Algorithm::DpSco => "dp_sco",
            Algorithm::NonprivateSmd => "nonprivate_smd",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Dense game. Give `payoff` (and optionally `noise`) inline as rows, or
    /// `payoff_file` / `noise_file` in the binary matrix format.
    MatrixGame {
        #[serde(default)]
        payoff: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        noise: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        payoff_file: Option<PathBuf>,
        #[serde(default)]
        noise_file: Option<PathBuf>,
    },
    RandomGame { dx: usize, dy: usize, noise: f64, seed: u64 },
    SeparableQuadratic { dim: usize, sigma: f64, seed: u64 },
    /// Worst of `components` random separable quadratics.
    MaxLoss { dim: usize, components: usize, sigma: f64, seed: u64 },
    /// Query release over a finite domain. Data comes from `data_file`
    /// (categorical CSV) or is drawn from `distribution` (uniform if absent).
    SynthData {
        domain: usize,
        queries: Vec<Vec<f64>>,
        #[serde(default)]
        symmetric: bool,
        #[serde(default)]
        data_file: Option<PathBuf>,
        #[serde(default)]
        distribution: Option<Vec<f64>>,
    },
}

/// Explicit schedule values. Anything left out comes from the planner; the
/// merged schedule is re-validated against the budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub t: Option<usize>,
    pub tau: Option<f64>,
    pub k: Option<usize>,
    pub q: Option<usize>,
    pub batch: Option<usize>,
    pub u: Option<f64>,
    pub m: Option<u32>,
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostConfig {
    #[serde(default)]
    pub candidates: Option<usize>,
    #[serde(default)]
    pub responses: Option<usize>,
    /// Failure probability used for the default repetition counts.
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub epsilon: f64,
    pub delta: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub overrides: Option<Overrides>,
    #[serde(default)]
    pub boost: Option<BoostConfig>,
    /// Steps of inner mirror ascent when the gap has no closed form.
    #[serde(default = "default_inner_steps")]
    pub gap_inner_steps: usize,
    /// Off by default so repeated runs produce identical bytes.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_inner_steps() -> usize {
    20_000
}

impl ExperimentConfig {
    /// Parses and validates. Returns the config and the raw bytes (for hashing).
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let raw = std::fs::read(path)
            .map_err(|e| CliError::new(Kind::Config, format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_slice(&raw)
            .map_err(|e| CliError::new(Kind::Config, format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check()?;
        Ok((cfg, raw))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::new(Kind::Config, m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", self.schema_version));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("n_grid must be a nonempty list of positive integers".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.gap_inner_steps == 0 {
            return bad("gap_inner_steps must be positive".into());
        }
        let convex = matches!(self.problem, ProblemSpec::SeparableQuadratic { .. });
        match (self.algorithm, convex) {
            (Algorithm::DpSco, false) => return bad("dp_sco needs a separable_quadratic problem".into()),
            (Algorithm::DpSco, true) => {}
            (a, true) => return bad(format!("{} needs a saddle problem, got separable_quadratic", a.as_str())),
            _ => {}
        }
        if self.algorithm == Algorithm::DpSco && self.mode == Mode::Quadratic {
            return bad("dp_sco supports first_order and second_order modes".into());
        }
        if self.algorithm == Algorithm::Boosted && self.mode == Mode::Quadratic {
            return bad("boosted uses the convex solver for best responses; pick first_order or second_order".into());
        }
        if let Some(o) = &self.overrides {
            let allowed: &[&str] = match self.algorithm {
                Algorithm::SmdVertex => &["t", "tau", "k", "batch"],
                Algorithm::SmdBiasReduced => &["u", "m", "alpha", "tau"],
                Algorithm::DpSco => &["t", "tau", "k", "q", "batch"],
                Algorithm::NonprivateSmd => &["t", "tau"],
                Algorithm::Boosted => &[],
            };
            let given = [
                ("t", o.t.is_some()),
                ("tau", o.tau.is_some()),
                ("k", o.k.is_some()),
                ("q", o.q.is_some()),
                ("batch", o.batch.is_some()),
                ("u", o.u.is_some()),
                ("m", o.m.is_some()),
                ("alpha", o.alpha.is_some()),
            ];
            for (name, set) in given {
                if set && !allowed.contains(&name) {
                    return bad(format!("override '{name}' does not apply to {}", self.algorithm.as_str()));
                }
            }
        }
        if self.boost.is_some() && self.algorithm != Algorithm::Boosted {
            return bad("the boost section only applies to the boosted algorithm".into());
        }
        Ok(())
    }
}
