use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::oracles::PopulationObjective;
use crate::scalar::Scalar;
use crate::simplex::{running_average, LogWeights, SimplexPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    ExactBilinear,
    InnerMirrorAscent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap_estimate: f64,
    /// The true gap lies in `[gap_estimate, gap_estimate + inner_error_bound]`.
    pub inner_error_bound: f64,
    pub method: GapMethod,
}

/// Duality gap of `x^T A y` at `(x, y)`: `max_j (A^T x)_j - min_i (A y)_i`.
pub fn exact_gap_bilinear(a: &[f64], dx: usize, dy: usize, x: &[f64], y: &[f64]) -> Result<GapReport> {
    ensure!(
        a.len() == dx * dy && x.len() == dx && y.len() == dy,
        Shape,
        "matrix is {} entries for {dx} x {dy}, points have dims {} and {}",
        a.len(),
        x.len(),
        y.len()
    );
    let mut best_y = f64::NEG_INFINITY;
    for j in 0..dy {
        let v: f64 = (0..dx).map(|i| a[i * dy + j] * x[i]).sum();
        best_y = best_y.max(v);
    }
    let mut best_x = f64::INFINITY;
    for i in 0..dx {
        let v: f64 = (0..dy).map(|j| a[i * dy + j] * y[j]).sum();
        best_x = best_x.min(v);
    }
    Ok(GapReport { gap_estimate: best_y - best_x, inner_error_bound: 0.0, method: GapMethod::ExactBilinear })
}

/// Entropic mirror ascent on `v -> sign * F(., v)` style inner problems.
/// Returns the best value seen (a lower bound on the max) and the error bound
/// `L0 sqrt(2 ln d / T)`.
fn inner_max<S: Scalar>(
    d: usize,
    steps: usize,
    l0: f64,
    mut eval: impl FnMut(&[S], &mut [S]) -> S,
) -> Result<(f64, f64)> {
    let mut grad = vec![S::zero(); d];
    if d == 1 {
        return Ok((eval(&[S::one()], &mut grad).as_f64(), 0.0));
    }
    let ln_d = (d as f64).ln();
    let eta = S::of((2.0 * ln_d / steps as f64).sqrt() / l0);
    let mut w = LogWeights::<S>::uniform(d);
    let mut avg = SimplexPoint::<S>::uniform(d);
    let mut best = f64::NEG_INFINITY;
    for t in 1..=steps {
        let v = w.to_point();
        avg = running_average(&avg, &v, t)?;
        best = best.max(eval(v.coords(), &mut grad).as_f64());
        w.ascend(&grad, eta)?;
    }
    best = best.max(eval(avg.coords(), &mut grad).as_f64());
    Ok((best, l0 * (2.0 * ln_d / steps as f64).sqrt()))
}

/// Duality gap of the population objective at `(x, y)`, with both inner
/// problems solved by `inner_t` steps of entropic mirror ascent/descent.
///
/// The estimate never exceeds the true gap, and falls short of it by at most
/// `inner_error_bound = 2 L0 sqrt(ell / inner_t)`.
pub fn gap_general<S: Scalar, O: PopulationObjective<S> + ?Sized>(
    obj: &O,
    x: &[S],
    y: &[S],
    inner_t: usize,
) -> Result<GapReport> {
    let (dx, dy) = obj.dims();
    ensure!(x.len() == dx && y.len() == dy, Shape, "points do not match the objective dims");
    ensure!(inner_t >= 1, InvalidParameter, "inner_t must be positive");
    let l0 = obj.constants().l0;
    let mut scratch_x = vec![S::zero(); dx];
    let mut scratch_y = vec![S::zero(); dy];
    let (max_v, err_y) = inner_max::<S>(dy, inner_t, l0, |v, g| {
        obj.population_grads(x, v, &mut scratch_x, g);
        obj.population_value(x, v)
    })?;
    let (neg_min_w, err_x) = inner_max::<S>(dx, inner_t, l0, |w, g| {
        obj.population_grads(w, y, g, &mut scratch_y);
        g.iter_mut().for_each(|v| *v = -*v);
        -obj.population_value(w, y)
    })?;
    let ell = (dx as f64).ln() + (dy as f64).ln();
    debug_assert!(err_x + err_y <= 2.0 * l0 * (ell / inner_t as f64).sqrt() * (1.0 + 1e-12));
    Ok(GapReport {
        gap_estimate: max_v + neg_min_w,
        inner_error_bound: 2.0 * l0 * (ell / inner_t as f64).sqrt(),
        method: GapMethod::InnerMirrorAscent,
    })
}

/// Entropy-smoothed best response value of `x^T A y`:
/// `max_y [x^T A y + lambda H(y)] = lambda ln sum_j exp((A^T x)_j / lambda)`.
pub fn smoothed_max_bilinear(a: &[f64], dx: usize, dy: usize, x: &[f64], lambda: f64) -> Result<f64> {
    ensure!(a.len() == dx * dy && x.len() == dx, Shape, "shape mismatch");
    ensure!(lambda > 0.0, InvalidParameter, "lambda must be positive");
    let scores: Vec<f64> = (0..dy).map(|j| (0..dx).map(|i| a[i * dy + j] * x[i]).sum::<f64>() / lambda).collect();
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = scores.iter().map(|v| (v - m).exp()).sum();
    Ok(lambda * (m + s.ln()))
}
