use super::{SaddleSolution, StepView};
use crate::error::{ensure, Result};
use crate::oracles::PopulationObjective;
use crate::scalar::Scalar;
use crate::simplex::{running_average, LogWeights, SimplexPoint};

/// Mirror descent-ascent with exact population gradients. Returns the
/// running means of the iterates `x^1..x^T`; `T = 1` gives the uniform pair.
pub fn solve_smd_nonprivate<S: Scalar, O: PopulationObjective<S> + ?Sized>(
    obj: &O,
    t: usize,
    tau: f64,
) -> Result<SaddleSolution<S>> {
    solve_smd_nonprivate_with(obj, t, tau, |_| {})
}

/// [`solve_smd_nonprivate`] with a per-step observer. Nothing is released,
/// so the reported vertex indices are always zero.
pub fn solve_smd_nonprivate_with<S: Scalar, O: PopulationObjective<S> + ?Sized>(
    obj: &O,
    t: usize,
    tau: f64,
    mut observe: impl FnMut(StepView<'_, S>),
) -> Result<SaddleSolution<S>> {
    ensure!(t >= 1, InvalidParameter, "need at least one step");
    ensure!(tau > 0.0 && tau.is_finite(), InvalidParameter, "step size must be positive");
    let (dx, dy) = obj.dims();
    let step = S::of(tau);
    let mut wx = LogWeights::<S>::uniform(dx);
    let mut wy = LogWeights::<S>::uniform(dy);
    let mut avg_x = SimplexPoint::uniform(dx);
    let mut avg_y = SimplexPoint::uniform(dy);
    let mut gx = vec![S::zero(); dx];
    let mut gy = vec![S::zero(); dy];

    for s in 1..=t {
        let x = wx.to_point();
        let y = wy.to_point();
        avg_x = running_average(&avg_x, &x, s)?;
        avg_y = running_average(&avg_y, &y, s)?;
        if s < t {
            obj.population_grads(x.coords(), y.coords(), &mut gx, &mut gy);
            ensure!(
                gx.iter().chain(&gy).all(|v| v.is_finite()),
                Numeric,
                "non-finite population gradient at step {s}"
            );
            wx.descend(&gx, step)?;
            wy.ascend(&gy, step)?;
        }
        observe(StepView { t: s, x: &x, y: &y, x_released: 0, y_released: 0 });
    }

    Ok(SaddleSolution { x: avg_x, y: avg_y, samples_used: 0, steps_run: t, vertex_draws: 0, audit: None })
}
