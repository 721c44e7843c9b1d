use serde::Serialize;

use super::{SaddleSolution, StepView};
use crate::error::{ensure, Result};
use crate::oracles::{bias_reduced_gradient, Dataset, SaddleObjective, TruncGeom};
use crate::privacy::{adaptive_budget_ok_sum_sq, BrPlan, PrivacyAudit, PrivacyParams};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::simplex::{LogWeights, SimplexPoint};

/// Random quantities realized by one run of [`solve_smd_bias_reduced`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrRunTrace {
    /// Level drawn for every executed step, in order.
    pub n_sequence: Vec<u32>,
    /// Sum of `2^N` over executed steps.
    pub total_weight: f64,
    /// Number of executed steps minus one: the last step index at which
    /// the loop condition was checked with all prior weight counted.
    pub stop_step: usize,
}

/// Private stochastic mirror descent with multilevel bias-reduced gradients
/// and a random stopping time.
///
/// Step `t` draws a level `N_t`, consumes `max(1, ceil(2^N_t / alpha))`
/// fresh samples and runs while the weight spent before it is at most
/// `U - 2^M`. The output averages one vertex draw per executed step.
pub fn solve_smd_bias_reduced<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &BrPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<(SaddleSolution<S>, BrRunTrace)> {
    solve_smd_bias_reduced_with(obj, data, plan, privacy, rng, |_| {})
}

pub(crate) fn solve_smd_bias_reduced_with<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &BrPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
    mut observe: impl FnMut(StepView<'_, S>),
) -> Result<(SaddleSolution<S>, BrRunTrace)> {
    let constants = obj.constants();
    plan.validate(data.len(), privacy, constants.l0)?;
    let (dx, dy) = obj.dims();
    let tg = TruncGeom::half(plan.m);
    let tau = S::of(plan.tau);
    let threshold = plan.u - 2f64.powi(plan.m as i32);
    let start = data.consumed();

    let mut wx = LogWeights::<S>::uniform(dx);
    let mut wy = LogWeights::<S>::uniform(dy);
    let mut out_x = vec![0u64; dx];
    let mut out_y = vec![0u64; dy];
    let mut levels = Vec::new();
    let mut spent = 0.0f64;
    let mut draws = 0u64;
    let mut level = tg.sample(rng);

    while spent <= threshold {
        let t = levels.len() + 1;
        let weight = 2f64.powi(level as i32);
        let size = ((weight / plan.alpha).ceil() as usize).max(1);
        let x = wx.to_point();
        let y = wy.to_point();
        let (rx, ry) = (x.sample_vertex(rng), y.sample_vertex(rng));
        out_x[rx] += 1;
        out_y[ry] += 1;
        let batch = data.take(size)?;
        let g = bias_reduced_gradient(obj, &x, &y, level, batch, &tg, rng)?;
        wx.descend(&g.gx, tau)?;
        wy.descend(&g.gy, tau)?;
        observe(StepView { t, x: &x, y: &y, x_released: rx, y_released: ry });
        draws += 4 * (1u64 << level) + 2;
        spent += weight;
        levels.push(level);
        level = tg.sample(rng);
    }

    // Every executed step released 4 * 2^N + 2 vertices at the same cost.
    let per = 9.0 * plan.tau * plan.alpha * constants.l0;
    let sum_sq = draws as f64 * per * per;
    ensure!(
        adaptive_budget_ok_sum_sq(sum_sq, privacy.epsilon(), privacy.delta()),
        Budget,
        "{draws} releases at {per} each overrun the budget"
    );
    let audit = PrivacyAudit { mechanisms: draws, per_mechanism_eps: per, allowed_eps: privacy.epsilon() };

    let steps = levels.len();
    let solution = SaddleSolution {
        x: SimplexPoint::from_counts(&out_x)?,
        y: SimplexPoint::from_counts(&out_y)?,
        samples_used: data.consumed() - start,
        steps_run: steps,
        vertex_draws: draws,
        audit: Some(audit),
    };
    let trace = BrRunTrace { n_sequence: levels, total_weight: spent, stop_step: steps - 1 };
    Ok((solution, trace))
}
