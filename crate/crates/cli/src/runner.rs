use std::path::Path;
use std::time::Instant;

use dpmirror::oracles::{ConvexObjective, PopulationConvex, SaddleObjective, SampleSource};
use dpmirror::privacy::{plan_alg1, plan_alg3, plan_alg5};
use dpmirror::problems::{
    empirical, exact_gap_bilinear, gap_general, make_max_loss_objective, make_synth_data_objective,
    synth_data_generate, Categorical, MatrixGame, MaxLossObjective, SeparableQuadratic, SynthDataProblem,
    SynthObjective,
};
use dpmirror::rng::role;
use dpmirror::ssp::{
    solve_boosted, solve_smd_bias_reduced, solve_smd_nonprivate, solve_smd_vertex, BoostOptions, SaddleSolution,
};
use dpmirror::sco::solve_dp_sco;
use dpmirror::{BrPlan, Dataset, PrivacyParams, RngStream, ScoPlan, SsmdPlan};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Algorithm, ExperimentConfig, Overrides, ProblemSpec};
use crate::fail::{CliError, Kind};
use crate::io::{self, RunRecord};

enum Problem {
    Game(MatrixGame),
    Synth { obj: SynthObjective, source: Source },
    MaxLoss { obj: MaxLossObjective<f64>, source: SeparableQuadratic },
    Convex(SeparableQuadratic),
}

enum Source {
    Draw(Categorical),
    Fixed(Vec<usize>),
}

fn rows_to_flat(rows: &[Vec<f64>], what: &str) -> Result<(usize, usize, Vec<f64>), CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::new(Kind::Config, format!("{what} must be a nonempty rectangular array")));
    }
    Ok((r, c, rows.concat()))
}

fn load_matrix(
    cfg: &ExperimentConfig,
    inline: &Option<Vec<Vec<f64>>>,
    file: &Option<std::path::PathBuf>,
    what: &str,
) -> Result<Option<(usize, usize, Vec<f64>)>, CliError> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(CliError::new(Kind::Config, format!("give {what} inline or as a file, not both"))),
        (Some(rows), None) => rows_to_flat(rows, what).map(Some),
        (None, Some(p)) => {
            let m = io::read_matrix(&cfg.resolve(p))?;
            Ok(Some((m.rows, m.cols, m.data)))
        }
        (None, None) => Ok(None),
    }
}

fn quadratics(dim: usize, count: usize, sigma: f64, seed: u64) -> Result<Vec<SeparableQuadratic>, CliError> {
    let mut rng = RngStream::new(seed, role::DATA);
    let first = SeparableQuadratic::random(dim, sigma, &mut rng)?;
    let mut out = vec![first];
    for _ in 1..count {
        out.push(SeparableQuadratic::random(dim, sigma, &mut rng)?);
    }
    Ok(out)
}

fn build(cfg: &ExperimentConfig) -> Result<Problem, CliError> {
    Ok(match &cfg.problem {
        ProblemSpec::MatrixGame { payoff, noise, payoff_file, noise_file } => {
            let (dx, dy, a) = load_matrix(cfg, payoff, payoff_file, "payoff")?
                .ok_or_else(|| CliError::new(Kind::Config, "matrix_game needs payoff or payoff_file"))?;
            let e = match load_matrix(cfg, noise, noise_file, "noise")? {
                Some((r, c, e)) if (r, c) == (dx, dy) => e,
                Some((r, c, _)) => {
                    return Err(CliError::new(Kind::Config, format!("noise is {r} x {c}, payoff is {dx} x {dy}")))
                }
                None => vec![0.0; dx * dy],
            };
            Problem::Game(MatrixGame::new(dx, dy, a, e)?)
        }
        ProblemSpec::RandomGame { dx, dy, noise, seed } => {
            Problem::Game(MatrixGame::random(*dx, *dy, *noise, &mut RngStream::new(*seed, role::DATA))?)
        }
        ProblemSpec::SeparableQuadratic { dim, sigma, seed } => {
            Problem::Convex(quadratics(*dim, 1, *sigma, *seed)?.remove(0))
        }
        ProblemSpec::MaxLoss { dim, components, sigma, seed } => {
            if *components == 0 {
                return Err(CliError::new(Kind::Config, "max_loss needs at least one component"));
            }
            let qs = quadratics(*dim, *components, *sigma, *seed)?;
            let source = qs[0].clone();
            let boxed = qs.into_iter().map(|q| Box::new(q) as Box<dyn PopulationConvex<f64>>).collect();
            Problem::MaxLoss { obj: make_max_loss_objective(boxed)?, source }
        }
        ProblemSpec::SynthData { domain, queries, symmetric, data_file, distribution } => {
            let (m, d, flat) = rows_to_flat(queries, "queries")?;
            if d != *domain {
                return Err(CliError::new(Kind::Config, format!("queries have {d} columns, domain is {domain}")));
            }
            let problem = SynthDataProblem::new(*domain, m, flat, *symmetric)?;
            let obj = make_synth_data_objective(problem);
            match (data_file, distribution) {
                (Some(_), Some(_)) => {
                    return Err(CliError::new(Kind::Config, "give data_file or distribution, not both"))
                }
                (Some(p), None) => {
                    let rows = io::read_categorical(&cfg.resolve(p))?;
                    if rows.is_empty() {
                        return Err(CliError::new(Kind::Dataset, "data_file is empty"));
                    }
                    if let Some(bad) = rows.iter().find(|&&z| z >= *domain) {
                        return Err(CliError::new(Kind::Dataset, format!("category {bad} is outside 0..{domain}")));
                    }
                    let obj = obj.with_distribution(&empirical(&rows, *domain))?;
                    Problem::Synth { obj, source: Source::Fixed(rows) }
                }
                (None, dist) => {
                    let cat = match dist {
                        Some(p) => Categorical::new(p)?,
                        None => Categorical::uniform(*domain),
                    };
                    if cat.len() != *domain {
                        return Err(CliError::new(Kind::Config, "distribution length differs from domain"));
                    }
                    let obj = obj.with_distribution(&cat.probabilities())?;
                    Problem::Synth { obj, source: Source::Draw(cat) }
                }
            }
        }
    })
}

impl Problem {
    fn saddle(&self) -> Option<&dyn SaddleView> {
        match self {
            Problem::Game(g) => Some(g),
            Problem::Synth { obj, .. } => Some(obj),
            Problem::MaxLoss { obj, .. } => Some(obj),
            Problem::Convex(_) => None,
        }
    }

    fn dataset(&self, n: usize, rng: &mut RngStream) -> Result<Dataset, CliError> {
        let draw = |s: &dyn SampleSource, rng: &mut RngStream| Dataset::draw(s, n, rng);
        Ok(match self {
            Problem::Game(g) => draw(g, rng),
            Problem::MaxLoss { source, .. } => draw(source, rng),
            Problem::Convex(q) => draw(q, rng),
            Problem::Synth { source: Source::Draw(c), .. } => draw(c, rng),
            Problem::Synth { source: Source::Fixed(rows), .. } => {
                if n > rows.len() {
                    return Err(CliError::new(
                        Kind::Dataset,
                        format!("n = {n} exceeds the {} rows in data_file", rows.len()),
                    ));
                }
                let mut v = rows.clone();
                v.shuffle(rng);
                v.truncate(n);
                Dataset::new(v)
            }
        })
    }
}

/// Saddle objectives the runner can solve and score.
trait SaddleView: dpmirror::PopulationObjective<f64> {
    fn bilinear(&self) -> Option<&MatrixGame> {
        None
    }
}

impl SaddleView for MatrixGame {
    fn bilinear(&self) -> Option<&MatrixGame> {
        Some(self)
    }
}
impl SaddleView for SynthObjective {}
impl SaddleView for MaxLossObjective<f64> {}

#[derive(Clone, Debug, Serialize)]
struct NonprivatePlan {
    t: usize,
    tau: f64,
}

#[derive(Clone, Debug)]
enum Plan {
    Vertex(SsmdPlan),
    BiasReduced(BrPlan),
    Sco(ScoPlan),
    Nonprivate(NonprivatePlan),
    Boosted(BoostOptions),
}

impl Plan {
    fn to_json(&self) -> String {
        let r = match self {
            Plan::Vertex(p) => serde_json::to_string(p),
            Plan::BiasReduced(p) => serde_json::to_string(p),
            Plan::Sco(p) => serde_json::to_string(p),
            Plan::Nonprivate(p) => serde_json::to_string(p),
            Plan::Boosted(p) => serde_json::to_string(p),
        };
        r.expect("plans serialize")
    }

    fn validate(&self, n: usize, p: &PrivacyParams, l0: f64) -> Result<(), CliError> {
        match self {
            Plan::Vertex(plan) => plan.validate(n, p, l0)?,
            Plan::BiasReduced(plan) => plan.validate(n, p, l0)?,
            Plan::Sco(plan) => plan.validate(n, p, l0)?,
            Plan::Nonprivate(plan) => {
                if plan.t == 0 || !(plan.tau > 0.0 && plan.tau.is_finite()) {
                    return Err(CliError::new(Kind::Config, "nonprivate_smd needs T >= 1 and tau > 0"));
                }
            }
            Plan::Boosted(_) => {}
        }
        Ok(())
    }
}

fn constants(problem: &Problem) -> dpmirror::ObjectiveConstants {
    match problem {
        Problem::Convex(q) => ConvexObjective::<f64>::constants(q),
        other => SaddleObjective::<f64>::constants(other.saddle().unwrap()),
    }
}

fn dims(problem: &Problem) -> (usize, usize) {
    match problem {
        Problem::Convex(q) => (ConvexObjective::<f64>::dim(q), 1),
        other => SaddleObjective::<f64>::dims(other.saddle().unwrap()),
    }
}

fn apply_overrides(plan: &mut Plan, o: &Overrides) {
    fn set<T: Copy>(slot: &mut T, v: Option<T>) {
        if let Some(v) = v {
            *slot = v;
        }
    }
    match plan {
        Plan::Vertex(p) => {
            set(&mut p.t, o.t);
            set(&mut p.tau, o.tau);
            set(&mut p.k, o.k);
            set(&mut p.batch, o.batch);
        }
        Plan::BiasReduced(p) => {
            set(&mut p.u, o.u);
            set(&mut p.m, o.m);
            set(&mut p.alpha, o.alpha);
            set(&mut p.tau, o.tau);
        }
        Plan::Sco(p) => {
            set(&mut p.t, o.t);
            set(&mut p.tau, o.tau);
            set(&mut p.k, o.k);
            set(&mut p.q, o.q);
            set(&mut p.batch, o.batch);
        }
        Plan::Nonprivate(p) => {
            set(&mut p.t, o.t);
            set(&mut p.tau, o.tau);
        }
        Plan::Boosted(_) => {}
    }
}

fn boost_options(cfg: &ExperimentConfig) -> Result<BoostOptions, CliError> {
    let b = cfg.boost.clone().unwrap_or(crate::config::BoostConfig { candidates: None, responses: None, beta: 0.5 });
    let mut o = BoostOptions::for_confidence(b.beta, cfg.mode)?;
    if let Some(i) = b.candidates {
        o.candidates = i;
    }
    if let Some(j) = b.responses {
        o.responses = j;
    }
    if o.candidates == 0 || o.responses == 0 {
        return Err(CliError::new(Kind::Config, "boost candidates and responses must be positive"));
    }
    Ok(o)
}

fn plan_for(cfg: &ExperimentConfig, problem: &Problem, n: usize, p: &PrivacyParams) -> Result<Plan, CliError> {
    let c = constants(problem);
    let (dx, dy) = dims(problem);
    let ell = (dx as f64).ln() + (dy as f64).ln();
    let mut plan = match cfg.algorithm {
        Algorithm::SmdVertex => Plan::Vertex(plan_alg1(n, p, &c, ell, cfg.mode)?),
        Algorithm::SmdBiasReduced => Plan::BiasReduced(plan_alg3(n, p, &c, ell)?),
        Algorithm::DpSco => Plan::Sco(plan_alg5(n, p, &c, (dx as f64).ln(), cfg.mode)?),
        Algorithm::NonprivateSmd => Plan::Nonprivate(NonprivatePlan { t: n, tau: (ell / n as f64).sqrt() / c.l0 }),
        Algorithm::Boosted => {
            let o = boost_options(cfg)?;
            // Dry-run the inner planners on the shard sizes so a budget
            // failure surfaces before any trial runs.
            let quarter = n / 4;
            plan_alg3(quarter / o.candidates, p, &c, ell)?;
            let shard = quarter / (o.candidates * o.responses);
            plan_alg5(shard, p, &c, (dx as f64).ln(), o.inner_mode)?;
            plan_alg5(shard, p, &c, (dy as f64).ln(), o.inner_mode)?;
            Plan::Boosted(o)
        }
    };
    if let Some(o) = &cfg.overrides {
        apply_overrides(&mut plan, o);
    }
    plan.validate(n, p, c.l0)?;
    Ok(plan)
}

struct Outcome {
    metric: &'static str,
    value: f64,
    inner_error_bound: f64,
    samples_used: usize,
    steps_run: usize,
    vertex_draws: u64,
}

fn score_saddle(obj: &dyn SaddleView, sol: &SaddleSolution<f64>, inner: usize) -> Result<Outcome, CliError> {
    let report = match obj.bilinear() {
        Some(g) => {
            let (dx, dy) = g.dims();
            exact_gap_bilinear(g.payoff(), dx, dy, sol.x.coords(), sol.y.coords())?
        }
        None => gap_general(obj, sol.x.coords(), sol.y.coords(), inner)?,
    };
    Ok(Outcome {
        metric: "gap",
        value: report.gap_estimate,
        inner_error_bound: report.inner_error_bound,
        samples_used: sol.samples_used,
        steps_run: sol.steps_run,
        vertex_draws: sol.vertex_draws,
    })
}

fn run_one(
    cfg: &ExperimentConfig,
    problem: &Problem,
    plan: &Plan,
    p: &PrivacyParams,
    mut data: Dataset,
    rng: &mut RngStream,
) -> Result<Outcome, CliError> {
    if let Problem::Convex(q) = problem {
        let Plan::Sco(plan) = plan else { unreachable!("config check pairs dp_sco with convex problems") };
        let sol = solve_dp_sco::<f64, _>(q, &mut data, plan, p, rng)?;
        let star = q.minimizer()?;
        let excess = PopulationConvex::population_value(q, sol.w_hat.coords())
            - PopulationConvex::<f64>::population_value(q, &star);
        return Ok(Outcome {
            metric: "excess_risk",
            value: excess,
            inner_error_bound: 0.0,
            samples_used: sol.samples_used,
            steps_run: sol.steps_run,
            vertex_draws: sol.vertex_draws,
        });
    }
    let obj = problem.saddle().expect("saddle problem");
    let sol = match plan {
        Plan::Vertex(plan) => solve_smd_vertex::<f64, _>(obj, &mut data, plan, p, rng)?,
        Plan::BiasReduced(plan) => solve_smd_bias_reduced::<f64, _>(obj, &mut data, plan, p, rng)?.0,
        Plan::Nonprivate(plan) => solve_smd_nonprivate::<f64, _>(obj, plan.t, plan.tau)?,
        Plan::Boosted(o) => solve_boosted::<f64, _>(obj, &data, o, p, rng)?,
        Plan::Sco(_) => unreachable!("config check pairs dp_sco with convex problems"),
    };
    score_saddle(obj, &sol, cfg.gap_inner_steps)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct RunMeta<'a> {
    schema_version: u32,
    config_sha256: String,
    code_version: &'a str,
    master_seed: u64,
    algorithm: &'a str,
    mode: &'a str,
    columns: &'a str,
    rows: usize,
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::new(Kind::Io, format!("thread pool: {e}")))
}

/// Executes every `(n, trial)` cell and appends the records to `out`.
pub fn run(config: &Path, out: &Path, jobs: Option<usize>) -> Result<usize, CliError> {
    let (cfg, raw) = ExperimentConfig::load(config)?;
    let privacy = PrivacyParams::new(cfg.epsilon, cfg.delta)?;
    let problem = build(&cfg)?;
    let l0 = constants(&problem).l0;
    let plans: Vec<Plan> =
        cfg.n_grid.iter().map(|&n| plan_for(&cfg, &problem, n, &privacy)).collect::<Result<_, _>>()?;

    let cells: Vec<(usize, usize)> =
        (0..cfg.n_grid.len()).flat_map(|g| (0..cfg.trials).map(move |t| (g, t))).collect();
    let pool = thread_pool(jobs)?;
    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(g, trial)| {
                let n = cfg.n_grid[g];
                let key = (g * cfg.trials + trial) as u64;
                let mut data_rng = RngStream::derive(cfg.master_seed, key, role::DATA);
                let mut rng = RngStream::derive(cfg.master_seed, key, role::SOLVER);
                let seed = rng.stream_id();
                let data = problem.dataset(n, &mut data_rng)?;
                let start = Instant::now();
                let o = run_one(&cfg, &problem, &plans[g], &privacy, data, &mut rng)?;
                let elapsed = start.elapsed().as_millis() as u64;
                if !(o.value.is_finite() && o.inner_error_bound.is_finite()) {
                    return Err(CliError::new(Kind::Oracle, format!("non-finite metric at n = {n}, trial {trial}")));
                }
                // Echoed plans must still pass the budget checks.
                plans[g].validate(n, &privacy, l0)?;
                Ok(RunRecord {
                    trial,
                    n,
                    algorithm: cfg.algorithm.as_str().into(),
                    mode: cfg.mode.as_str().into(),
                    metric: o.metric.into(),
                    metric_value: o.value,
                    inner_error_bound: o.inner_error_bound,
                    samples_used: o.samples_used,
                    steps_run: o.steps_run,
                    vertex_draws: o.vertex_draws,
                    wall_time_ms: if cfg.record_wall_time { elapsed } else { 0 },
                    seed,
                    plan_json: plans[g].to_json(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    io::append_records(out, &records)?;
    let meta = RunMeta {
        schema_version: cfg.schema_version,
        config_sha256: sha256_hex(&raw),
        code_version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.master_seed,
        algorithm: cfg.algorithm.as_str(),
        mode: cfg.mode.as_str(),
        columns: io::COLUMNS,
        rows: records.len(),
    };
    io::write_json(&io::meta_path(out), &meta)?;
    Ok(records.len())
}

#[derive(Serialize)]
struct SynthMeta<'a> {
    config_sha256: String,
    code_version: &'a str,
    master_seed: u64,
    n: usize,
    max_query_error: f64,
    plan: SsmdPlan,
}

/// Generates one private synthetic dataset and writes it as categorical CSV.
pub fn synth(config: &Path, out: &Path) -> Result<f64, CliError> {
    let (cfg, raw) = ExperimentConfig::load(config)?;
    if !matches!(cfg.problem, ProblemSpec::SynthData { .. }) {
        return Err(CliError::new(Kind::Config, "synth needs a synth_data problem"));
    }
    if cfg.n_grid.len() != 1 || cfg.trials != 1 {
        return Err(CliError::new(Kind::Config, "synth takes a single n and a single trial"));
    }
    let privacy = PrivacyParams::new(cfg.epsilon, cfg.delta)?;
    let problem = build(&cfg)?;
    let Problem::Synth { obj, .. } = &problem else { unreachable!() };
    let n = cfg.n_grid[0];
    let data = problem.dataset(n, &mut RngStream::derive(cfg.master_seed, 0, role::DATA))?;
    let reference = match &problem {
        Problem::Synth { source: Source::Draw(c), .. } => c.probabilities(),
        _ => empirical(data.samples(), obj.problem().domain),
    };
    let mut rng = RngStream::derive(cfg.master_seed, 0, role::SOLVER);
    let report = synth_data_generate(obj.problem(), &data, &reference, &privacy, &mut rng)?;
    io::write_categorical(out, &report.samples).map_err(|e| CliError::io("write synthetic data", e))?;
    let meta = SynthMeta {
        config_sha256: sha256_hex(&raw),
        code_version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.master_seed,
        n,
        max_query_error: report.max_query_error,
        plan: report.plan,
    };
    io::write_json(&io::meta_path(out), &meta)?;
    Ok(report.max_query_error)
}
