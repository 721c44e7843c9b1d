use rayon::prelude::*;
use serde::Serialize;

use super::MatrixGame;
use crate::error::Result;
use crate::oracles::{Dataset, SaddleObjective};
use crate::privacy::{max_step_alg1, Mode, PrivacyParams, SsmdPlan};
use crate::rng::{role, RngStream};
use crate::ssp::{solve_smd_vertex_with, SmdOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmokeReport {
    pub runs: usize,
    /// Budgeted per-release epsilon, `4 L0 tau / B`.
    pub eps_budget: f64,
    /// `max_j |ln P_S(j) - ln P_S'(j)|` for the first data-dependent release.
    pub estimated_loss: f64,
    /// Three standard errors of the estimate (delta method).
    pub mc_error: f64,
    pub counts: [u64; 2],
    pub neighbor_counts: [u64; 2],
}

const CHUNK: usize = 4096;

fn histogram(game: &MatrixGame, data: &Dataset, plan: &SsmdPlan, p: &PrivacyParams, runs: usize, seed: u64) -> Result<[u64; 2]> {
    let parts: Vec<[u64; 2]> = (0..runs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut h = [0u64; 2];
            for r in c * CHUNK..((c + 1) * CHUNK).min(runs) {
                let mut rng = RngStream::derive(seed, r as u64, role::SOLVER);
                let mut work = data.clone();
                let mut second = 0;
                solve_smd_vertex_with::<f64, _>(game, &mut work, plan, p, &mut rng, SmdOptions::default(), |s| {
                    if s.t == 2 {
                        second = s.x_released;
                    }
                })?;
                h[second] += 1;
            }
            Ok(h)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold([0, 0], |a, h| [a[0] + h[0], a[1] + h[1]]))
}

/// Empirical privacy loss of the vertex-sampling solver on a 2 x 2 game with
/// `n = 10`, `T = 2`, `K = 1`, `B = 5`, comparing an all-zero dataset with a
/// neighbor whose first sample is flipped. The first release at step 1 is
/// data independent, so the vertex released at step 2 is measured.
pub fn dp_smoke_alg1(runs: usize, privacy: &PrivacyParams, seed: u64) -> Result<SmokeReport> {
    let game = MatrixGame::new(2, 2, vec![0.0; 4], vec![1.0, -1.0, -1.0, 1.0])?;
    let l0 = SaddleObjective::<f64>::constants(&game).l0;
    let (t, k, batch) = (2, 1, 5);
    let tau = max_step_alg1(batch, privacy, l0, t, k)?;
    let plan = SsmdPlan { t, tau, k, batch, mode: Mode::FirstOrder };
    let data = Dataset::new(vec![0; 10]);
    let neighbor = data.with_replaced(0, 1);
    let counts = histogram(&game, &data, &plan, privacy, runs, seed)?;
    let neighbor_counts = histogram(&game, &neighbor, &plan, privacy, runs, seed ^ 0xabcdef)?;

    let n = runs as f64;
    let mut loss: f64 = 0.0;
    let mut var_at: f64 = 0.0;
    for j in 0..2 {
        let (p, q) = (counts[j] as f64 / n, neighbor_counts[j] as f64 / n);
        let l = (p.ln() - q.ln()).abs();
        // Var(ln p_hat) ~ (1 - p) / (n p).
        let v = (1.0 - p) / (n * p) + (1.0 - q) / (n * q);
        if l >= loss {
            loss = l;
            var_at = v;
        }
    }
    Ok(SmokeReport {
        runs,
        eps_budget: 4.0 * l0 * tau / batch as f64,
        estimated_loss: loss,
        mc_error: 3.0 * var_at.sqrt(),
        counts,
        neighbor_counts,
    })
}
