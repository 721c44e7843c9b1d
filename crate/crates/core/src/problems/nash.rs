use serde::Serialize;

use super::exact_gap_bilinear;
use crate::error::{ensure, Error, Result};
use crate::simplex::LogWeights;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashResult {
    /// Midpoint of the certified interval containing the game value.
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Exact duality gap of `(x, y)`; the value is within `gap / 2`.
    pub gap: f64,
    pub iterations: usize,
}

/// Game value of `x^T A y` by entropic mirror-prox self-play, stopped once the
/// averaged pair has exact duality gap at most `target`.
pub fn nash_equilibrium(
    a: &[f64],
    dx: usize,
    dy: usize,
    target: f64,
    max_iter: usize,
) -> Result<NashResult> {
    ensure!(a.len() == dx * dy && dx >= 1 && dy >= 1, Shape, "matrix does not match {dx} x {dy}");
    ensure!(target > 0.0, InvalidParameter, "target gap must be positive");
    let l = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let uniform = |d: usize| vec![1.0 / d as f64; d];
    if l == 0.0 {
        return Ok(NashResult { value: 0.0, x: uniform(dx), y: uniform(dy), gap: 0.0, iterations: 0 });
    }
    let eta = 1.0 / l;
    let ay = |y: &[f64]| -> Vec<f64> { (0..dx).map(|i| (0..dy).map(|j| a[i * dy + j] * y[j]).sum()).collect() };
    let atx = |x: &[f64]| -> Vec<f64> { (0..dy).map(|j| (0..dx).map(|i| a[i * dy + j] * x[i]).sum()).collect() };

    let mut wx = LogWeights::<f64>::uniform(dx);
    let mut wy = LogWeights::<f64>::uniform(dy);
    let mut sx = vec![0.0; dx];
    let mut sy = vec![0.0; dy];
    let mut last_gap = f64::INFINITY;
    for it in 1..=max_iter {
        let x = wx.to_point();
        let y = wy.to_point();
        let hx = wx.stepped(&ay(y.coords()).iter().map(|g| -eta * g).collect::<Vec<_>>())?.to_point();
        let hy = wy.stepped(&atx(x.coords()).iter().map(|g| eta * g).collect::<Vec<_>>())?.to_point();
        wx.descend(&ay(hy.coords()), eta)?;
        wy.ascend(&atx(hx.coords()), eta)?;
        sx.iter_mut().zip(hx.coords()).for_each(|(s, v)| *s += v);
        sy.iter_mut().zip(hy.coords()).for_each(|(s, v)| *s += v);
        if it % 64 == 0 || it == max_iter {
            let n = it as f64;
            let xa: Vec<f64> = sx.iter().map(|v| v / n).collect();
            let ya: Vec<f64> = sy.iter().map(|v| v / n).collect();
            let gap = exact_gap_bilinear(a, dx, dy, &xa, &ya)?.gap_estimate;
            last_gap = gap;
            if gap <= target {
                let hi = atx(&xa).into_iter().fold(f64::NEG_INFINITY, f64::max);
                let lo = ay(&ya).into_iter().fold(f64::INFINITY, f64::min);
                return Ok(NashResult { value: 0.5 * (hi + lo), x: xa, y: ya, gap, iterations: it });
            }
        }
    }
    Err(Error::Oracle(format!(
        "self-play reached gap {last_gap} after {max_iter} iterations, target {target}"
    )))
}

/// [`nash_equilibrium`] with gap target `1e-3` and at most `10^6` iterations,
/// for games up to `50 x 50`.
pub fn nash_value_bruteforce(a: &[f64], dx: usize, dy: usize) -> Result<NashResult> {
    ensure!(dx <= 50 && dy <= 50, InvalidParameter, "brute-force oracle is limited to 50 x 50");
    nash_equilibrium(a, dx, dy, 1e-3, 1_000_000)
}
