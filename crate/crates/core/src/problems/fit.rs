use serde::Serialize;

use crate::error::{ensure, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `gap(n) ~ a sqrt(ell / n) + b sqrt(ell^1.5 sqrt(L) / (n eps))`
/// with `L = ln(1/delta)`, no intercept.
///
/// Both basis functions scale as `n^(-1/2)`, so the design has rank one; the
/// minimum-norm solution is returned and `r_squared` is the centered
/// coefficient of determination of the fitted curve.
pub fn fit_rate(ns: &[f64], gaps: &[f64], ell: f64, ln_inv_delta: f64, eps: f64) -> Result<RateFit> {
    ensure!(ns.len() == gaps.len() && ns.len() >= 2, Shape, "need matching n and gap lists of length >= 2");
    ensure!(ns.iter().all(|n| *n > 0.0), InvalidParameter, "sample sizes must be positive");
    let f1: Vec<f64> = ns.iter().map(|n| (ell / n).sqrt()).collect();
    let f2: Vec<f64> = ns.iter().map(|n| (ell.powf(1.5) * ln_inv_delta.sqrt() / (n * eps)).sqrt()).collect();
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let (g11, g12, g22) = (dot(&f1, &f1), dot(&f1, &f2), dot(&f2, &f2));
    let (r1, r2) = (dot(&f1, gaps), dot(&f2, gaps));
    let det = g11 * g22 - g12 * g12;
    let (a, b) = if det.abs() > 1e-10 * (g11 + g22).powi(2) {
        ((g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det)
    } else {
        // f2 = k f1: fit c f1, split c as (c, c k) / (1 + k^2).
        let k = (g12 / g11).max(0.0);
        let c = r1 / g11;
        (c / (1.0 + k * k), c * k / (1.0 + k * k))
    };
    let pred: Vec<f64> = f1.iter().zip(&f2).map(|(u, v)| a * u + b * v).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let ss_res: f64 = gaps.iter().zip(&pred).map(|(g, p)| (g - p).powi(2)).sum();
    let ss_tot: f64 = gaps.iter().map(|g| (g - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(RateFit { a, b, r_squared })
}
