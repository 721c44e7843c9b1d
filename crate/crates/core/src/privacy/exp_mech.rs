use crate::error::{ensure, Result};
use crate::rng::RngStream;

fn check(scores: &[f64], sensitivity: f64, eps: f64) -> Result<()> {
    ensure!(!scores.is_empty(), InvalidParameter, "no candidates to select from");
    ensure!(scores.iter().all(|s| s.is_finite()), Numeric, "scores must be finite");
    ensure!(
        sensitivity > 0.0 && sensitivity.is_finite(),
        InvalidParameter,
        "sensitivity must be positive"
    );
    ensure!(eps > 0.0 && eps.is_finite(), InvalidParameter, "epsilon must be positive");
    Ok(())
}

/// Exponential mechanism: index `i` with probability proportional to
/// `exp(eps * scores[i] / (2 * sensitivity))`, drawn by Gumbel-argmax.
pub fn exp_mech_sample(
    scores: &[f64],
    sensitivity: f64,
    eps: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    check(scores, sensitivity, eps)?;
    let scale = eps / (2.0 * sensitivity);
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &s) in scores.iter().enumerate() {
        let v = scale * s + rng.gumbel();
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best.0)
}

/// Exact selection probabilities of [`exp_mech_sample`].
pub fn exp_mech_probabilities(scores: &[f64], sensitivity: f64, eps: f64) -> Result<Vec<f64>> {
    check(scores, sensitivity, eps)?;
    let scale = eps / (2.0 * sensitivity);
    let m = scores.iter().map(|s| scale * s).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = scores.iter().map(|s| (scale * s - m).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}
