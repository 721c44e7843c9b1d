//! Private stochastic convex optimization over one simplex, with lazily
//! refreshed sparse gradient points.

use serde::Serialize;

use crate::error::{ensure, Result};
use crate::oracles::{ConvexObjective, Dataset, PopulationConvex};
use crate::privacy::{advanced_composition_eps, PrivacyAudit, PrivacyParams, ScoPlan};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::simplex::{running_average, LogWeights, SimplexPoint};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScoOptions {
    /// Refresh the gradient point to the exact average instead of a K-draw
    /// sparsification. Not private; the run carries no audit.
    pub exact_sparsify: bool,
    /// Keep per-step iterates, gradients and averages.
    pub record: bool,
}

/// Per-step record of a run, indexed from step 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoTrace<S> {
    /// Mirror iterates `x^t`.
    pub x: Vec<Vec<S>>,
    /// Averaged iterates `w^t`.
    pub w: Vec<Vec<S>>,
    /// Stochastic gradients `g^t` used for the update.
    pub g: Vec<Vec<S>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoSolution<S> {
    /// Released point: a fresh sparsification of the final average.
    #[serde(skip)]
    pub w_hat: SimplexPoint<S>,
    /// The final average itself (not private).
    #[serde(skip)]
    pub w_avg: SimplexPoint<S>,
    pub samples_used: usize,
    pub steps_run: usize,
    /// Sparsifications drawn, counting the final release.
    pub refresh_count: usize,
    pub vertex_draws: u64,
    /// `max_t t * ||w^t - w^(t-1)||_1`, at most 2 by construction.
    pub max_average_drift: f64,
    pub audit: Option<PrivacyAudit>,
    #[serde(skip)]
    pub trace: Option<ScoTrace<S>>,
}

/// Private mirror descent over the simplex. The gradient at step `t` is taken
/// at a K-draw sparsification of the running average `w^t`, refreshed when
/// `t <= q` or `q | t` and reused otherwise.
pub fn solve_dp_sco<S: Scalar, O: ConvexObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &ScoPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<ScoSolution<S>> {
    solve_dp_sco_with(obj, data, plan, privacy, rng, ScoOptions::default())
}

pub fn solve_dp_sco_with<S: Scalar, O: ConvexObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &ScoPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
    options: ScoOptions,
) -> Result<ScoSolution<S>> {
    let constants = obj.constants();
    plan.validate(data.len(), privacy, constants.l0)?;
    ensure!(
        data.remaining() >= plan.t * plan.batch,
        Dataset,
        "need {} fresh samples, {} remain",
        plan.t * plan.batch,
        data.remaining()
    );
    let d = obj.dim();
    let tau = S::of(plan.tau);
    let start = data.consumed();
    let sparsify = |w: &SimplexPoint<S>, rng: &mut RngStream| -> Result<SimplexPoint<S>> {
        if options.exact_sparsify {
            Ok(w.clone())
        } else {
            w.sparsify(plan.k, rng)
        }
    };

    let mut lw = LogWeights::<S>::uniform(d);
    let mut w = SimplexPoint::<S>::uniform(d);
    let mut w_hat = w.clone();
    let mut g = vec![S::zero(); d];
    let mut refreshes = 0usize;
    let mut drift = 0.0f64;
    let mut trace = options.record.then(ScoTrace::default);

    for t in 1..=plan.t {
        let x = lw.to_point();
        let next = running_average(&w, &x, t)?;
        if t > 1 {
            let r = t as f64 * next.l1_distance(&w).as_f64();
            drift = drift.max(r);
        }
        w = next;
        if t <= plan.q || t % plan.q == 0 {
            w_hat = sparsify(&w, rng)?;
            refreshes += 1;
        }
        let batch = data.take(plan.batch)?;
        obj.batch_grad(w_hat.coords(), batch, &mut g);
        ensure!(g.iter().all(|v| v.is_finite()), Numeric, "non-finite gradient at step {t}");
        lw.descend(&g, tau)?;
        if let Some(tr) = trace.as_mut() {
            tr.x.push(x.into_vec());
            tr.w.push(w.coords().to_vec());
            tr.g.push(g.clone());
        }
    }
    ensure!(
        drift <= 2.0 + 1e-9,
        Diagnostic,
        "running average moved {drift} / t in l1, more than 2 / t"
    );

    let released = sparsify(&w, rng)?;
    refreshes += 1;

    let audit = if options.exact_sparsify {
        None
    } else {
        let mechanisms = plan.k * refreshes;
        let per = 4.0 * plan.tau * constants.l0 / plan.batch as f64;
        let allowed = advanced_composition_eps(mechanisms, privacy)?;
        ensure!(
            per <= allowed * (1.0 + 1e-12),
            Budget,
            "each of {mechanisms} vertex releases costs {per}, budget allows {allowed}"
        );
        Some(PrivacyAudit { mechanisms: mechanisms as u64, per_mechanism_eps: per, allowed_eps: allowed })
    };

    Ok(ScoSolution {
        w_hat: released,
        w_avg: w,
        samples_used: data.consumed() - start,
        steps_run: plan.t,
        refresh_count: refreshes,
        vertex_draws: (plan.k * refreshes) as u64,
        max_average_drift: drift,
        audit,
        trace,
    })
}

/// Terms of the excess-risk decomposition of a recorded run against a
/// comparator `u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    /// `sum_t <g_t, x_t - u>`.
    pub regret: f64,
    /// `sum_t <grad F(w^t) - g_t, x_t - u>`.
    pub coupling: f64,
    /// `(regret + coupling) / T`.
    pub bound: f64,
    /// `F(w^T) - F(u)`.
    pub excess: f64,
}

/// By convexity of `F`, `excess <= bound` holds deterministically.
pub fn decompose<S: Scalar, O: PopulationConvex<S> + ?Sized>(
    obj: &O,
    trace: &ScoTrace<S>,
    comparator: &[S],
) -> Result<Decomposition> {
    let t = trace.x.len();
    ensure!(t >= 1 && trace.w.len() == t && trace.g.len() == t, Shape, "empty or ragged trace");
    ensure!(comparator.len() == obj.dim(), Shape, "comparator has the wrong dimension");
    let mut grad = vec![S::zero(); obj.dim()];
    let (mut regret, mut coupling) = (0.0, 0.0);
    for ((x, w), g) in trace.x.iter().zip(&trace.w).zip(&trace.g) {
        obj.population_grad(w, &mut grad);
        for j in 0..x.len() {
            let diff = (x[j] - comparator[j]).as_f64();
            regret += g[j].as_f64() * diff;
            coupling += (grad[j] - g[j]).as_f64() * diff;
        }
    }
    let last = &trace.w[t - 1];
    let excess = (obj.population_value(last) - obj.population_value(comparator)).as_f64();
    Ok(Decomposition { regret, coupling, bound: (regret + coupling) / t as f64, excess })
}
