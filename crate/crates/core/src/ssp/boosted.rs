use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SaddleSolution;
use crate::error::{ensure, Error, Result};
use crate::oracles::{ConvexObjective, Dataset, ObjectiveConstants, SaddleObjective};
use crate::privacy::{
    exp_mech_sample, plan_alg3, plan_alg5, Mode, PrivacyAudit, PrivacyParams,
};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sco::solve_dp_sco;
use crate::simplex::SimplexPoint;

/// `f(., y; z)` for a fixed `y`, as a convex loss in `x`.
pub struct FixedY<'a, S, O: ?Sized> {
    obj: &'a O,
    y: Vec<S>,
}

impl<'a, S: Scalar, O: SaddleObjective<S> + ?Sized> FixedY<'a, S, O> {
    pub fn new(obj: &'a O, y: &[S]) -> Self {
        Self { obj, y: y.to_vec() }
    }
}

impl<S: Scalar, O: SaddleObjective<S> + ?Sized> ConvexObjective<S> for FixedY<'_, S, O> {
    fn dim(&self) -> usize {
        self.obj.dims().0
    }
    fn constants(&self) -> ObjectiveConstants {
        self.obj.constants()
    }
    fn value(&self, x: &[S], z: usize) -> S {
        self.obj.value(x, &self.y, z)
    }
    fn grad(&self, x: &[S], z: usize, out: &mut [S]) {
        self.obj.grad_x(x, &self.y, z, out)
    }
    fn batch_grad(&self, x: &[S], batch: &[usize], out: &mut [S]) {
        let mut gy = vec![S::zero(); self.y.len()];
        self.obj.batch_grads(x, &self.y, batch, out, &mut gy)
    }
}

/// `-f(x, .; z)` for a fixed `x`, as a convex loss in `y`.
pub struct FixedX<'a, S, O: ?Sized> {
    obj: &'a O,
    x: Vec<S>,
}

impl<'a, S: Scalar, O: SaddleObjective<S> + ?Sized> FixedX<'a, S, O> {
    pub fn new(obj: &'a O, x: &[S]) -> Self {
        Self { obj, x: x.to_vec() }
    }
}

impl<S: Scalar, O: SaddleObjective<S> + ?Sized> ConvexObjective<S> for FixedX<'_, S, O> {
    fn dim(&self) -> usize {
        self.obj.dims().1
    }
    fn constants(&self) -> ObjectiveConstants {
        self.obj.constants()
    }
    fn value(&self, y: &[S], z: usize) -> S {
        -self.obj.value(&self.x, y, z)
    }
    fn grad(&self, y: &[S], z: usize, out: &mut [S]) {
        self.obj.grad_y(&self.x, y, z, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
    fn batch_grad(&self, y: &[S], batch: &[usize], out: &mut [S]) {
        let mut gx = vec![S::zero(); self.x.len()];
        self.obj.batch_grads(&self.x, y, batch, &mut gx, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostOptions {
    /// Number of candidate pairs.
    pub candidates: usize,
    /// Best-response runs per candidate and player.
    pub responses: usize,
    /// Schedule family for the best-response solver.
    pub inner_mode: Mode,
}

impl BoostOptions {
    /// Repetition counts for confidence `1 - beta`.
    pub fn for_confidence(beta: f64, inner_mode: Mode) -> Result<Self> {
        let (candidates, responses) = default_repetitions(beta)?;
        Ok(Self { candidates, responses, inner_mode })
    }
}

/// `(ceil(log2(4/beta)), ceil(log2(8 I/beta)))`.
pub fn default_repetitions(beta: f64) -> Result<(usize, usize)> {
    ensure!(beta > 0.0 && beta < 1.0, InvalidParameter, "beta must lie in (0, 1), got {beta}");
    let i = (4.0 / beta).log2().ceil() as usize;
    let j = (8.0 * i as f64 / beta).log2().ceil() as usize;
    Ok((i, j))
}

/// `G_i = max_j F_S(x_i, y_ij) + max_j -F_S(x_ij, y_i)`, the empirical gap of
/// each candidate against its best-response estimates on `sample`.
pub fn boost_scores<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    sample: &[usize],
    candidates: &[(SimplexPoint<S>, SimplexPoint<S>)],
    responses: &[Vec<(SimplexPoint<S>, SimplexPoint<S>)>],
) -> Result<Vec<f64>> {
    ensure!(!sample.is_empty(), Dataset, "selection sample is empty");
    ensure!(
        candidates.len() == responses.len() && !candidates.is_empty(),
        Shape,
        "{} candidates but {} response sets",
        candidates.len(),
        responses.len()
    );
    candidates
        .iter()
        .zip(responses)
        .map(|((xi, yi), resp)| {
            ensure!(!resp.is_empty(), Shape, "candidate has no best responses");
            let mut up = f64::NEG_INFINITY;
            let mut down = f64::NEG_INFINITY;
            for (xij, yij) in resp {
                up = up.max(obj.batch_value(xi.coords(), yij.coords(), sample).as_f64());
                down = down.max(-obj.batch_value(xij.coords(), yi.coords(), sample).as_f64());
            }
            let g = up + down;
            ensure!(g.is_finite(), Numeric, "non-finite candidate score");
            Ok(g)
        })
        .collect()
}

/// Picks a candidate with probability proportional to
/// `exp(-eps |S| G_i / (8 B))`, i.e. the exponential mechanism on `-G` at
/// sensitivity `4 B / |S|`. Returns the index and the scores.
pub fn boost_select<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    sample: &[usize],
    candidates: &[(SimplexPoint<S>, SimplexPoint<S>)],
    responses: &[Vec<(SimplexPoint<S>, SimplexPoint<S>)>],
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<(usize, Vec<f64>)> {
    let scores = boost_scores(obj, sample, candidates, responses)?;
    let neg: Vec<f64> = scores.iter().map(|g| -g).collect();
    let sensitivity = 4.0 * obj.constants().b / sample.len() as f64;
    let pick = exp_mech_sample(&neg, sensitivity, privacy.epsilon(), rng)?;
    Ok((pick, scores))
}

fn shard_context(err: Error, what: &str, index: usize) -> Error {
    match err {
        Error::Budget(m) => Error::Budget(format!("{what} shard {index}: {m}")),
        Error::Dataset(m) => Error::Dataset(format!("{what} shard {index}: {m}")),
        other => other,
    }
}

/// High-probability wrapper: candidates from the bias-reduced solver on
/// disjoint shards, best responses from the convex solver, private
/// selection on a held-out quarter.
pub fn solve_boosted<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    data: &Dataset,
    options: &BoostOptions,
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<SaddleSolution<S>> {
    let (ni, nj) = (options.candidates, options.responses);
    ensure!(ni >= 1 && nj >= 1, InvalidParameter, "I and J must be positive");
    let (dx, dy) = obj.dims();
    ensure!(dx >= 2 && dy >= 2, InvalidParameter, "both simplices need dimension >= 2");
    let constants = obj.constants();
    let ell = super::ln_dims(dx, dy);

    let parts = data.split_equal(4)?;
    let s1 = parts[0].split_equal(ni)?;
    let s2 = parts[1].split_equal(ni * nj)?;
    let s3 = parts[2].split_equal(ni * nj)?;
    let s4 = parts[3].samples();

    let candidates: Vec<(SaddleSolution<S>, usize)> = s1
        .into_par_iter()
        .enumerate()
        .map(|(i, mut shard)| {
            let plan = plan_alg3(shard.len(), privacy, &constants, ell)
                .map_err(|e| shard_context(e, "candidate", i))?;
            let mut r = rng.fork(i as u64);
            let (sol, _) = super::solve_smd_bias_reduced(obj, &mut shard, &plan, privacy, &mut r)
                .map_err(|e| shard_context(e, "candidate", i))?;
            Ok((sol, i))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, Dataset, Dataset)> =
        s2.into_iter().zip(s3).enumerate().map(|(k, (a, b))| (k, a, b)).collect();
    let inner: Vec<(SimplexPoint<S>, SimplexPoint<S>, usize, usize, u64)> = jobs
        .into_par_iter()
        .map(|(k, mut sx, mut sy)| {
            let (xi, yi) = (&candidates[k / nj].0.x, &candidates[k / nj].0.y);
            let fx = FixedY::new(obj, yi.coords());
            let plan_x = plan_alg5(sx.len(), privacy, &constants, (dx as f64).ln(), options.inner_mode)
                .map_err(|e| shard_context(e, "response", k))?;
            let mut r = rng.fork((1u64 << 32) + k as u64);
            let bx = solve_dp_sco(&fx, &mut sx, &plan_x, privacy, &mut r)
                .map_err(|e| shard_context(e, "response", k))?;
            let fy = FixedX::new(obj, xi.coords());
            let plan_y = plan_alg5(sy.len(), privacy, &constants, (dy as f64).ln(), options.inner_mode)
                .map_err(|e| shard_context(e, "response", k))?;
            let mut r = rng.fork((2u64 << 32) + k as u64);
            let by = solve_dp_sco(&fy, &mut sy, &plan_y, privacy, &mut r)
                .map_err(|e| shard_context(e, "response", k))?;
            Ok((
                bx.w_hat,
                by.w_hat,
                bx.samples_used + by.samples_used,
                bx.steps_run + by.steps_run,
                bx.vertex_draws + by.vertex_draws,
            ))
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(SimplexPoint<S>, SimplexPoint<S>)> =
        candidates.iter().map(|(s, _)| (s.x.clone(), s.y.clone())).collect();
    let responses: Vec<Vec<(SimplexPoint<S>, SimplexPoint<S>)>> = inner
        .chunks(nj)
        .map(|c| c.iter().map(|(x, y, ..)| (x.clone(), y.clone())).collect())
        .collect();
    let mut r = rng.fork(3u64 << 32);
    let (pick, _) = boost_select(obj, s4, &pairs, &responses, privacy, &mut r)?;

    let samples_used = candidates.iter().map(|(s, _)| s.samples_used).sum::<usize>()
        + inner.iter().map(|t| t.2).sum::<usize>()
        + s4.len();
    let steps_run = candidates.iter().map(|(s, _)| s.steps_run).sum::<usize>()
        + inner.iter().map(|t| t.3).sum::<usize>();
    let vertex_draws = candidates.iter().map(|(s, _)| s.vertex_draws).sum::<u64>()
        + inner.iter().map(|t| t.4).sum::<u64>();
    let (x, y) = pairs.into_iter().nth(pick).expect("selected index in range");
    // Each part touches disjoint samples, so the run as a whole is
    // (eps, delta)-DP by parallel composition.
    let audit = PrivacyAudit { mechanisms: 1, per_mechanism_eps: privacy.epsilon(), allowed_eps: privacy.epsilon() };
    Ok(SaddleSolution { x, y, samples_used, steps_run, vertex_draws, audit: Some(audit) })
}
