use super::{SaddleGradient, SaddleObjective, TruncGeom};
use crate::error::{ensure, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::simplex::SimplexPoint;

/// Multilevel bias-reduced estimate of the saddle operator at `(x, y)`.
///
/// Draws `2^(N+1)` vertex pairs from `P_x x P_y`, averages all of them
/// (`plus`) and the first `2^N` (`minus`), and returns
/// `gx = C_M 2^N (grad_x f(plus) - grad_x f(minus)) + grad_x f(first)` with
/// the mirrored form for `gy`, which carries the saddle-operator sign.
pub fn bias_reduced_gradient<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    x: &SimplexPoint<S>,
    y: &SimplexPoint<S>,
    level: u32,
    batch: &[usize],
    tg: &TruncGeom,
    rng: &mut RngStream,
) -> Result<SaddleGradient<S>> {
    ensure!(
        level <= tg.m(),
        InvalidParameter,
        "level {level} exceeds truncation level {}",
        tg.m()
    );
    ensure!(!batch.is_empty(), InvalidParameter, "batch must be nonempty");
    let (dx, dy) = obj.dims();
    ensure!(
        x.dim() == dx && y.dim() == dy,
        Shape,
        "objective has dims ({dx}, {dy}), got ({}, {})",
        x.dim(),
        y.dim()
    );

    let half = 1usize << level;
    let (sx, sy) = (x.sampler(), y.sampler());
    let mut cx_minus = vec![0u64; dx];
    let mut cy_minus = vec![0u64; dy];
    let mut cx_plus = vec![0u64; dx];
    let mut cy_plus = vec![0u64; dy];
    let mut first = (0, 0);
    for i in 0..2 * half {
        let (i_x, i_y) = (sx.sample(rng), sy.sample(rng));
        if i == 0 {
            first = (i_x, i_y);
        }
        if i < half {
            cx_minus[i_x] += 1;
            cy_minus[i_y] += 1;
        }
        cx_plus[i_x] += 1;
        cy_plus[i_y] += 1;
    }
    let avg = |c: &[u64], k: usize| -> Vec<S> {
        let inv = S::one() / S::from_usize_lossy(k);
        c.iter().map(|&v| S::of(v as f64) * inv).collect()
    };
    let (xp, yp) = (avg(&cx_plus, 2 * half), avg(&cy_plus, 2 * half));
    let (xm, ym) = (avg(&cx_minus, half), avg(&cy_minus, half));
    let mut x1 = vec![S::zero(); dx];
    let mut y1 = vec![S::zero(); dy];
    x1[first.0] = S::one();
    y1[first.1] = S::one();

    let mut gxp = vec![S::zero(); dx];
    let mut gyp = vec![S::zero(); dy];
    let mut gxm = vec![S::zero(); dx];
    let mut gym = vec![S::zero(); dy];
    let mut gx1 = vec![S::zero(); dx];
    let mut gy1 = vec![S::zero(); dy];
    obj.batch_grads(&xp, &yp, batch, &mut gxp, &mut gyp);
    obj.batch_grads(&xm, &ym, batch, &mut gxm, &mut gym);
    obj.batch_grads(&x1, &y1, batch, &mut gx1, &mut gy1);

    let w = S::of(tg.c_m() * half as f64);
    let gx = (0..dx).map(|j| w * (gxp[j] - gxm[j]) + gx1[j]).collect();
    let gy = (0..dy).map(|i| -(w * (gyp[i] - gym[i])) - gy1[i]).collect();
    let g = SaddleGradient { gx, gy };
    ensure!(g.is_finite(), Numeric, "bias-reduced gradient is not finite");
    Ok(g)
}
