use serde::Serialize;

use super::empirical;
use crate::error::{ensure, Result};
use crate::oracles::{Dataset, ObjectiveConstants, PopulationObjective, SaddleObjective};
use crate::privacy::{plan_alg1, Mode, PrivacyParams, SsmdPlan};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::ssp::{solve_smd_vertex_with, SmdOptions};

/// Query-release problem over a finite domain: `queries` is `|Q| x |Z|`,
/// row-major, with values in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthDataProblem {
    pub domain: usize,
    pub n_queries: usize,
    pub queries: Vec<f64>,
    /// Also include the negation of every query, so that the inner max
    /// measures absolute rather than one-sided error.
    pub symmetric: bool,
}

impl SynthDataProblem {
    pub fn new(domain: usize, n_queries: usize, queries: Vec<f64>, symmetric: bool) -> Result<Self> {
        ensure!(domain >= 1 && n_queries >= 1, Shape, "need a nonempty domain and query set");
        ensure!(
            queries.len() == domain * n_queries,
            Shape,
            "query matrix has {} entries, expected {} x {}",
            queries.len(),
            n_queries,
            domain
        );
        ensure!(
            queries.iter().all(|q| q.is_finite() && q.abs() <= 1.0),
            InvalidParameter,
            "query values must lie in [-1, 1]"
        );
        Ok(Self { domain, n_queries, queries, symmetric })
    }

    pub fn query(&self, j: usize) -> &[f64] {
        &self.queries[j * self.domain..(j + 1) * self.domain]
    }

    /// `q_j(p) = <q_j, p>` for every query.
    pub fn answers(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n_queries).map(|j| self.query(j).iter().zip(p).map(|(q, v)| q * v).sum()).collect()
    }

    /// `max_j |q_j(p) - q_j(r)|`.
    pub fn max_error(&self, p: &[f64], r: &[f64]) -> f64 {
        self.answers(p)
            .into_iter()
            .zip(self.answers(r))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `f(x, y; z) = sum_j y_j s_j (q_j(z) - <q_j, x>)` over the (signed) query rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthObjective {
    problem: SynthDataProblem,
    population: Vec<f64>,
}

pub fn make_synth_data_objective(problem: SynthDataProblem) -> SynthObjective {
    let population = vec![1.0 / problem.domain as f64; problem.domain];
    SynthObjective { problem, population }
}

impl SynthObjective {
    /// Use `probs` as the population distribution for the population view.
    pub fn with_distribution(mut self, probs: &[f64]) -> Result<Self> {
        ensure!(probs.len() == self.problem.domain, Shape, "distribution has the wrong size");
        let total: f64 = probs.iter().sum();
        ensure!(
            probs.iter().all(|p| *p >= 0.0) && (total - 1.0).abs() < 1e-9,
            InvalidParameter,
            "not a probability vector"
        );
        self.population = probs.to_vec();
        Ok(self)
    }

    pub fn problem(&self) -> &SynthDataProblem {
        &self.problem
    }

    fn rows(&self) -> usize {
        self.problem.n_queries * if self.problem.symmetric { 2 } else { 1 }
    }

    fn row(&self, r: usize) -> (&[f64], f64) {
        let m = self.problem.n_queries;
        if r < m {
            (self.problem.query(r), 1.0)
        } else {
            (self.problem.query(r - m), -1.0)
        }
    }

    /// Gradients when the sample enters through the expected query answers `qz`.
    fn grads_with<S: Scalar>(&self, qz: &[f64], x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        gx.fill(S::zero());
        for r in 0..self.rows() {
            let (q, s) = self.row(r);
            let mut inner = S::zero();
            for (i, &qi) in q.iter().enumerate() {
                inner += S::of(qi) * x[i];
                gx[i] -= S::of(s * qi) * y[r];
            }
            gy[r] = S::of(s) * (S::of(qz[r % self.problem.n_queries]) - inner);
        }
    }

    fn value_with<S: Scalar>(&self, qz: &[f64], x: &[S], y: &[S]) -> S {
        (0..self.rows())
            .map(|r| {
                let (q, s) = self.row(r);
                let inner: S = q.iter().zip(x).map(|(&qi, &xi)| S::of(qi) * xi).sum();
                y[r] * S::of(s) * (S::of(qz[r % self.problem.n_queries]) - inner)
            })
            .sum()
    }

    fn point_answers(&self, z: usize) -> Vec<f64> {
        (0..self.problem.n_queries).map(|j| self.problem.query(j)[z]).collect()
    }

    fn batch_answers(&self, batch: &[usize]) -> Vec<f64> {
        self.problem.answers(&empirical(batch, self.problem.domain))
    }
}

impl<S: Scalar> SaddleObjective<S> for SynthObjective {
    fn dims(&self) -> (usize, usize) {
        (self.problem.domain, self.rows())
    }

    // |grad_x| <= max |q| = 1, |grad_y| <= 2, and each block moves by at most
    // max |q| times the l1 change of the other block.
    fn constants(&self) -> ObjectiveConstants {
        ObjectiveConstants { l0: 2.0, l1: 1.0, l2: 0.0, b: 2.0 }
    }

    fn value(&self, x: &[S], y: &[S], z: usize) -> S {
        self.value_with(&self.point_answers(z), x, y)
    }

    fn grad_x(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        let mut gy = vec![S::zero(); self.rows()];
        self.grads_with(&self.point_answers(z), x, y, out, &mut gy);
    }

    fn grad_y(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        let mut gx = vec![S::zero(); self.problem.domain];
        self.grads_with(&self.point_answers(z), x, y, &mut gx, out);
    }

    fn batch_grads(&self, x: &[S], y: &[S], batch: &[usize], gx: &mut [S], gy: &mut [S]) {
        self.grads_with(&self.batch_answers(batch), x, y, gx, gy);
    }

    fn batch_value(&self, x: &[S], y: &[S], batch: &[usize]) -> S {
        self.value_with(&self.batch_answers(batch), x, y)
    }
}

impl<S: Scalar> PopulationObjective<S> for SynthObjective {
    fn population_value(&self, x: &[S], y: &[S]) -> S {
        self.value_with(&self.problem.answers(&self.population), x, y)
    }

    fn population_grads(&self, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        self.grads_with(&self.problem.answers(&self.population), x, y, gx, gy);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthReport {
    /// Synthetic dataset of exactly `n` domain elements.
    pub samples: Vec<usize>,
    /// `max_q |q(reference) - q(synthetic)|`.
    pub max_query_error: f64,
    pub plan: SsmdPlan,
}

/// Private synthetic data: runs the vertex-sampling saddle solver on the
/// query-release game, keeps the `T` released x-vertices and resamples them
/// with replacement to `n` points. Error is measured against `reference`,
/// a distribution over the domain.
pub fn synth_data_generate(
    problem: &SynthDataProblem,
    data: &Dataset,
    reference: &[f64],
    privacy: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<SynthReport> {
    ensure!(reference.len() == problem.domain, Shape, "reference has the wrong size");
    ensure!(
        data.samples().iter().all(|&z| z < problem.domain),
        Dataset,
        "dataset contains ids outside the domain of size {}",
        problem.domain
    );
    let obj = make_synth_data_objective(problem.clone());
    let (dx, dy) = SaddleObjective::<f64>::dims(&obj);
    let ell = (dx as f64).ln() + (dy as f64).ln();
    let n = data.len();
    let constants = SaddleObjective::<f64>::constants(&obj);
    let plan = plan_alg1(n, privacy, &constants, ell, Mode::Quadratic)?;
    let mut released = Vec::with_capacity(plan.t);
    let mut work = data.clone();
    solve_smd_vertex_with::<f64, _>(&obj, &mut work, &plan, privacy, rng, SmdOptions::default(), |s| {
        released.push(s.x_released)
    })?;
    let samples: Vec<usize> = (0..n).map(|_| released[rng.index(released.len())]).collect();
    let max_query_error = problem.max_error(reference, &empirical(&samples, problem.domain));
    Ok(SynthReport { samples, max_query_error, plan })
}
