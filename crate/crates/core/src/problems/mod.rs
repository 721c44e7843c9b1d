//! Problem instances, evaluation oracles and Monte Carlo checks.

mod fit;
mod gap;
mod matrix_game;
mod maurey;
mod max_loss;
mod nash;
mod smoke;
mod synth;
mod testfns;

pub use fit::{fit_rate, RateFit};
pub use gap::{exact_gap_bilinear, gap_general, smoothed_max_bilinear, GapMethod, GapReport};
pub use matrix_game::MatrixGame;
pub use maurey::{verify_all, verify_maurey_suite, Check, MaureyReport, MaureySuite};
pub use max_loss::{make_max_loss_objective, MaxLossObjective, SeparableQuadratic};
pub use nash::{nash_equilibrium, nash_value_bruteforce, NashResult};
pub use smoke::{dp_smoke_alg1, SmokeReport};
pub use synth::{make_synth_data_objective, synth_data_generate, SynthDataProblem, SynthObjective, SynthReport};
pub use testfns::TestFunction;

use crate::error::{ensure, Result};
use crate::oracles::SampleSource;
use crate::rng::RngStream;

/// Draws ids from a finite categorical distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(probs: &[f64]) -> Result<Self> {
        ensure!(!probs.is_empty(), InvalidParameter, "empty distribution");
        ensure!(
            probs.iter().all(|p| p.is_finite() && *p >= 0.0),
            InvalidParameter,
            "probabilities must be finite and nonnegative"
        );
        let total: f64 = probs.iter().sum();
        ensure!(total > 0.0, InvalidParameter, "probabilities sum to zero");
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self { cdf })
    }

    pub fn uniform(n: usize) -> Self {
        Self { cdf: (1..=n).map(|i| i as f64 / n as f64).collect() }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|c| {
                let p = c - prev;
                prev = *c;
                p
            })
            .collect()
    }
}

impl SampleSource for Categorical {
    fn draw(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform_open() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|c| *c < u).min(self.cdf.len() - 1)
    }
}

/// Normalized histogram of ids in `0..k`.
pub fn empirical(samples: &[usize], k: usize) -> Vec<f64> {
    let mut h = vec![0.0; k];
    for &s in samples {
        h[s] += 1.0;
    }
    let n = samples.len().max(1) as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}
