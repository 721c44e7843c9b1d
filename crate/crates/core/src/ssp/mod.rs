//! Stochastic saddle-point solvers over a pair of simplices.
//!
//! All private solvers start from the uniform pair, update both players by
//! multiplicative weights in the log domain, and release only vertices drawn
//! from the current iterates.

mod bias_reduced;
mod boosted;
mod nonprivate;
mod smd_vertex;

pub use bias_reduced::{solve_smd_bias_reduced, BrRunTrace};
pub use boosted::{
    boost_scores, boost_select, default_repetitions, solve_boosted, BoostOptions, FixedX, FixedY,
};
pub use nonprivate::{solve_smd_nonprivate, solve_smd_nonprivate_with};
pub use smd_vertex::{solve_smd_vertex, solve_smd_vertex_with, SmdOptions};

use serde::Serialize;

use crate::privacy::PrivacyAudit;
use crate::scalar::Scalar;
use crate::simplex::SimplexPoint;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleSolution<S> {
    #[serde(skip)]
    pub x: SimplexPoint<S>,
    #[serde(skip)]
    pub y: SimplexPoint<S>,
    pub samples_used: usize,
    pub steps_run: usize,
    pub vertex_draws: u64,
    /// Realized privacy spend; `None` for non-private runs.
    pub audit: Option<PrivacyAudit>,
}

/// What an observer sees after each step of a saddle solver.
#[derive(Debug)]
pub struct StepView<'a, S: Scalar> {
    /// 1-based step index.
    pub t: usize,
    /// Iterates the step was taken from.
    pub x: &'a SimplexPoint<S>,
    pub y: &'a SimplexPoint<S>,
    /// Vertices released for the output average at this step.
    pub x_released: usize,
    pub y_released: usize,
}

pub(crate) fn ln_dims(dx: usize, dy: usize) -> f64 {
    (dx as f64).ln() + (dy as f64).ln()
}
