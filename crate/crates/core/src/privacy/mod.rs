//! Privacy accounting: budget validation, the step-size and stopping-rule
//! conditions each solver must satisfy, composition rules, the exponential
//! mechanism and the parameter planners.
//!
//! Everything here runs in `f64`.

mod exp_mech;
mod plan;

pub use exp_mech::{exp_mech_probabilities, exp_mech_sample};
pub use plan::{plan_alg1, plan_alg3, plan_alg5, BrPlan, Mode, ScoPlan, SsmdPlan};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// An `(epsilon, delta)` budget with `0 < delta < 1` and
/// `0 < epsilon < 8 ln(1/delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        ensure!(
            delta > 0.0 && delta < 1.0,
            Budget,
            "delta must lie in (0, 1), got {delta}"
        );
        let cap = 8.0 * (1.0 / delta).ln();
        ensure!(
            epsilon > 0.0 && epsilon < cap,
            Budget,
            "epsilon must lie in (0, 8 ln(1/delta)) = (0, {cap}), got {epsilon}"
        );
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ln(1/delta)`.
    pub fn ln_inv_delta(&self) -> f64 {
        (1.0 / self.delta).ln()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(v > 0.0 && v.is_finite(), Budget, "{name} must be positive and finite, got {v}");
    Ok(())
}

/// Largest step size for which the vertex-sampling saddle solver is private:
/// `B eps / (16 L0 sqrt(T (K+1) ln(1/delta)))`.
pub fn max_step_alg1(
    batch: usize,
    privacy: &PrivacyParams,
    l0: f64,
    t: usize,
    k: usize,
) -> Result<f64> {
    ensure!(batch >= 1 && t >= 1 && k >= 1, Budget, "B, T and K must be positive");
    positive("L0", l0)?;
    let denom = 16.0 * l0 * ((t as f64) * (k as f64 + 1.0) * privacy.ln_inv_delta()).sqrt();
    Ok(batch as f64 * privacy.epsilon() / denom)
}

/// Largest step size for which the convex solver is private:
/// `B eps / (8 L0 sqrt(2 (T K / q + q K) ln(1/delta)))`.
pub fn max_step_alg5(
    batch: usize,
    privacy: &PrivacyParams,
    l0: f64,
    t: usize,
    k: usize,
    q: usize,
) -> Result<f64> {
    ensure!(
        batch >= 1 && t >= 1 && k >= 1 && q >= 1,
        Budget,
        "B, T, K and q must be positive"
    );
    positive("L0", l0)?;
    let draws = (t as f64) * (k as f64) / (q as f64) + (q as f64) * (k as f64);
    let denom = 8.0 * l0 * (2.0 * draws * privacy.ln_inv_delta()).sqrt();
    Ok(batch as f64 * privacy.epsilon() / denom)
}

/// Largest stopping parameter for which the bias-reduced solver is private:
/// `eps^2 / (48 ln(1/delta) (9 tau alpha L0)^2)`.
pub fn max_u_alg3(privacy: &PrivacyParams, tau: f64, alpha: f64, l0: f64) -> Result<f64> {
    positive("tau", tau)?;
    positive("alpha", alpha)?;
    positive("L0", l0)?;
    let per = 9.0 * tau * alpha * l0;
    Ok(privacy.epsilon().powi(2) / (48.0 * privacy.ln_inv_delta() * per * per))
}

/// Per-mechanism budget under which `T` adaptively composed pure-DP
/// mechanisms are `(eps, delta)`-DP: `eps / (2 sqrt(2 T ln(1/delta)))`.
pub fn advanced_composition_eps(t: usize, privacy: &PrivacyParams) -> Result<f64> {
    ensure!(t >= 1, Budget, "composition over zero mechanisms");
    Ok(privacy.epsilon() / (2.0 * (2.0 * t as f64 * privacy.ln_inv_delta()).sqrt()))
}

/// Stopping functional of fully adaptive composition for pure-DP mechanisms:
/// true iff `sqrt(2 ln(1/delta') sum eps_m^2) + sum eps_m^2 / 2 <= eps`.
pub fn adaptive_budget_ok(eps_list: &[f64], eps: f64, delta_prime: f64) -> bool {
    let sum_sq: f64 = eps_list.iter().map(|e| e * e).sum();
    adaptive_budget_ok_sum_sq(sum_sq, eps, delta_prime)
}

/// [`adaptive_budget_ok`] given `sum eps_m^2` directly.
pub fn adaptive_budget_ok_sum_sq(sum_sq: f64, eps: f64, delta_prime: f64) -> bool {
    let spent = (2.0 * (1.0 / delta_prime).ln() * sum_sq).sqrt() + 0.5 * sum_sq;
    spent <= eps * (1.0 + 1e-12)
}

/// What a solver actually spent, recomputed from realized counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyAudit {
    /// Number of vertex releases treated as individual mechanisms.
    pub mechanisms: u64,
    /// Privacy cost of each release (for the bias-reduced solver, the largest).
    pub per_mechanism_eps: f64,
    /// The budget each release was allowed.
    pub allowed_eps: f64,
}
