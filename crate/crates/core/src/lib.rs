//! Differentially private stochastic saddle-point and convex optimization over
//! probability simplices.
//!
//! The iterate arithmetic is generic over [`Scalar`] (`f32` or `f64`); privacy
//! accounting and planning always run in `f64`. Aliases for the common
//! instantiations live at the crate root.

pub mod error;
pub mod oracles;
pub mod privacy;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod sco;
pub mod simplex;
pub mod ssp;

pub use error::{Error, Result};
pub use oracles::{
    ConvexObjective, Dataset, ObjectiveConstants, PopulationConvex, PopulationObjective,
    SaddleGradient, SaddleObjective, SampleSource, TruncGeom,
};
pub use privacy::{BrPlan, Mode, PrivacyParams, ScoPlan, SsmdPlan};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use simplex::{LogWeights, SimplexPoint, VertexSampler};

pub type Point64 = SimplexPoint<f64>;
pub type Point32 = SimplexPoint<f32>;
pub type LogWeights64 = LogWeights<f64>;
pub type LogWeights32 = LogWeights<f32>;
pub type SaddleSolution64 = ssp::SaddleSolution<f64>;
pub type SaddleSolution32 = ssp::SaddleSolution<f32>;
pub type ScoSolution64 = sco::ScoSolution<f64>;
pub type ScoSolution32 = sco::ScoSolution<f32>;
