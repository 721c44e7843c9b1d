use super::{SaddleSolution, StepView};
use crate::error::{ensure, Result};
use crate::oracles::{batch_gradient, Dataset, SaddleObjective};
use crate::privacy::{advanced_composition_eps, PrivacyAudit, PrivacyParams, SsmdPlan};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::simplex::{LogWeights, SimplexPoint};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SmdOptions {
    /// Evaluate gradients at the exact iterates instead of K-draw averages.
    /// The run is then not private and carries no audit.
    pub exact_iterates: bool,
}

/// Private stochastic mirror descent with vertex sampling.
pub fn solve_smd_vertex<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &SsmdPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<SaddleSolution<S>> {
    solve_smd_vertex_with(obj, data, plan, privacy, rng, SmdOptions::default(), |_| {})
}

/// [`solve_smd_vertex`] with options and a per-step observer.
pub fn solve_smd_vertex_with<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    data: &mut Dataset,
    plan: &SsmdPlan,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
    options: SmdOptions,
    mut observe: impl FnMut(StepView<'_, S>),
) -> Result<SaddleSolution<S>> {
    let constants = obj.constants();
    plan.validate(data.len(), privacy, constants.l0)?;
    ensure!(
        data.remaining() >= plan.t * plan.batch,
        Dataset,
        "need {} fresh samples, {} remain",
        plan.t * plan.batch,
        data.remaining()
    );
    let (dx, dy) = obj.dims();
    let tau = S::of(plan.tau);
    let start = data.consumed();
    let mut wx = LogWeights::<S>::uniform(dx);
    let mut wy = LogWeights::<S>::uniform(dy);
    let mut out_x = vec![0u64; dx];
    let mut out_y = vec![0u64; dy];

    for t in 1..=plan.t {
        let x = wx.to_point();
        let y = wy.to_point();
        let (sx, sy) = (x.sampler(), y.sampler());
        let (xh, yh) = if options.exact_iterates {
            (x.coords().to_vec(), y.coords().to_vec())
        } else {
            let cx = sx.counts(plan.k, rng);
            let cy = sy.counts(plan.k, rng);
            (
                SimplexPoint::<S>::from_counts(&cx)?.into_vec(),
                SimplexPoint::<S>::from_counts(&cy)?.into_vec(),
            )
        };
        let (rx, ry) = (sx.sample(rng), sy.sample(rng));
        out_x[rx] += 1;
        out_y[ry] += 1;
        let batch = data.take(plan.batch)?;
        let g = batch_gradient(obj, &xh, &yh, batch)?;
        wx.descend(&g.gx, tau)?;
        wy.descend(&g.gy, tau)?;
        observe(StepView { t, x: &x, y: &y, x_released: rx, y_released: ry });
    }

    let audit = if options.exact_iterates {
        None
    } else {
        let mechanisms = 2 * plan.t * (plan.k + 1);
        let per = 4.0 * constants.l0 * plan.tau / plan.batch as f64;
        let allowed = advanced_composition_eps(mechanisms, privacy)?;
        ensure!(
            per <= allowed * (1.0 + 1e-12),
            Budget,
            "each of {mechanisms} vertex releases costs {per}, budget allows {allowed}"
        );
        Some(PrivacyAudit { mechanisms: mechanisms as u64, per_mechanism_eps: per, allowed_eps: allowed })
    };

    let samples_used = data.consumed() - start;
    debug_assert_eq!(samples_used, plan.t * plan.batch);
    Ok(SaddleSolution {
        x: SimplexPoint::from_counts(&out_x)?,
        y: SimplexPoint::from_counts(&out_y)?,
        samples_used,
        steps_run: plan.t,
        vertex_draws: (plan.t * (2 * plan.k + 2)) as u64,
        audit,
    })
}
