//! Monte Carlo checks of the sparsification bounds: a fixed sequence
//! `x^1..x^T` in `Delta_d`, independent vertex draws `a^t ~ P_(x^t)`, and the
//! averages `x_bar`, `a_bar`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::TestFunction;
use crate::error::{Error, Result};
use crate::rng::{role, RngStream};
use crate::simplex::VertexSampler;

const DIM: usize = 50;
const STEPS: usize = 64;
/// Distance bound `||a^t - x^t||_1 <= 2` on the simplex.
const DIAM: f64 = 2.0;
/// One-sided normal tail matching a 3-sigma two-sided family-wise level.
const FAMILY_TAIL: f64 = 0.00135;
const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaureySuite {
    /// `|E F(a_bar) - F(x_bar)| <= 2 L1 / T`.
    ValueBias,
    /// `||E grad F(a_bar) - grad F(x_bar)||_inf <= 2 L2 / T`.
    GradientBiasSmooth,
    /// `||E grad F(a_bar) - grad F(x_bar)||_inf <= 4 L1 / sqrt(T)`.
    GradientBiasLipschitz,
    /// `P[F(a_bar) - F(x_bar) >= L1 D^2 / (2T) + beta sqrt(2) L0 D / sqrt(T)] <= exp(-beta^2)`.
    ValueTail,
    /// `E max_j |F_j(a_bar) - F_j(x_bar)|^2 <= L1^2 D^4 / (2 T^2) + 2 L0^2 D^2 (4 + ln M) / T`.
    MaxSecondMoment,
    /// `E ||grad F(a_bar) - grad F(x_bar)||_inf^2 <= 8 L2^2 / T^2 + 8 L1^2 (4 + ln d) / T`.
    GradientMomentSmooth,
    /// `E ||grad F(a_bar) - grad F(x_bar)||_inf^2 <= 8 sqrt2 L1^2 / (T^1.5 sqrt(4 + ln d))
    /// + 8 sqrt2 (L0^2 + L1^2) sqrt(4 + ln d) / sqrt(T)`.
    GradientMomentLipschitz,
}

impl MaureySuite {
    pub const ALL: [MaureySuite; 7] = [
        Self::ValueBias,
        Self::GradientBiasSmooth,
        Self::GradientBiasLipschitz,
        Self::ValueTail,
        Self::MaxSecondMoment,
        Self::GradientMomentSmooth,
        Self::GradientMomentLipschitz,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ValueBias => "value_bias",
            Self::GradientBiasSmooth => "gradient_bias_smooth",
            Self::GradientBiasLipschitz => "gradient_bias_lipschitz",
            Self::ValueTail => "value_tail",
            Self::MaxSecondMoment => "max_second_moment",
            Self::GradientMomentSmooth => "gradient_moment_smooth",
            Self::GradientMomentLipschitz => "gradient_moment_lipschitz",
        }
    }
}

impl fmt::Display for MaureySuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaureySuite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Outcome of one suite. `measured <= bound + slack` is the pass condition
/// for each check listed in `checks`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaureyReport {
    pub suite: MaureySuite,
    pub reps: usize,
    pub dim: usize,
    pub draws: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        let passed = measured.is_finite() && measured <= bound + slack;
        Self { name: name.into(), measured, bound, slack, passed }
    }
}

/// Deterministic skewed sequence: squared exponentials, normalized.
fn fixed_sequence(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RngStream::new(seed, 0x5eed);
    (0..STEPS)
        .map(|_| {
            let v: Vec<f64> = (0..DIM).map(|_| rng.uniform_open().ln().powi(2)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|e| e / s).collect()
        })
        .collect()
}

/// Runs `stat` on `reps` independent draws of `a_bar` and returns the
/// per-coordinate mean and standard deviation of its output.
fn monte_carlo(
    samplers: &[VertexSampler],
    reps: usize,
    seed: u64,
    width: usize,
    stat: impl Fn(&[f64], &mut [f64]) + Sync,
) -> (Vec<f64>, Vec<f64>) {
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..reps.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; width];
            let mut sq = vec![0.0; width];
            let mut out = vec![0.0; width];
            let mut a_bar = vec![0.0; DIM];
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                let mut rng = RngStream::derive(seed, r as u64, role::EVAL);
                a_bar.fill(0.0);
                for s in samplers {
                    a_bar[s.sample(&mut rng)] += 1.0 / STEPS as f64;
                }
                stat(&a_bar, &mut out);
                for k in 0..width {
                    sum[k] += out[k];
                    sq[k] += out[k] * out[k];
                }
            }
            (sum, sq)
        })
        .collect();
    let n = reps as f64;
    let mut mean = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for (s, q) in &chunks {
        for k in 0..width {
            mean[k] += s[k];
            sq[k] += q[k];
        }
    }
    let sd = (0..width)
        .map(|k| {
            let m = mean[k] / n;
            ((sq[k] / n - m * m).max(0.0) * n / (n - 1.0).max(1.0)).sqrt()
        })
        .collect();
    mean.iter_mut().for_each(|m| *m /= n);
    (mean, sd)
}

fn z_value(tail: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - tail)
}

/// Runs one suite with `reps` Monte Carlo repetitions. Fewer than `10^4`
/// repetitions produce a warning, not a failure.
pub fn verify_maurey_suite(suite: MaureySuite, reps: usize, seed: u64) -> Result<MaureyReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need at least two repetitions".into()));
    }
    let xs = fixed_sequence(seed);
    let samplers: Vec<VertexSampler> = xs.iter().map(|x| VertexSampler::new(x)).collect();
    let x_bar: Vec<f64> = (0..DIM).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / STEPS as f64).collect();
    let t = STEPS as f64;
    let root_r = (reps as f64).sqrt();
    let ln_d = (DIM as f64).ln();
    let z_coord = z_value(FAMILY_TAIL / DIM as f64);

    let grad_diff = |f: TestFunction| {
        let mut gx = vec![0.0; DIM];
        f.grad(&x_bar, &mut gx);
        move |a: &[f64], out: &mut [f64]| {
            f.grad(a, out);
            out.iter_mut().zip(&gx).for_each(|(o, g)| *o -= g);
        }
    };
    let grad_sup_sq = |f: TestFunction| {
        let mut gx = vec![0.0; DIM];
        f.grad(&x_bar, &mut gx);
        move |a: &[f64], out: &mut [f64]| {
            let mut g = vec![0.0; DIM];
            f.grad(a, &mut g);
            let m = g.iter().zip(&gx).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            out[0] = m * m;
        }
    };
    // Bias checks: every coordinate against the bound with a Bonferroni slack.
    let bias_check = |name: &str, mean: &[f64], sd: &[f64], bound: f64| {
        let (mut worst, mut slack_at) = (f64::NEG_INFINITY, 0.0);
        let mut ok = true;
        for (m, s) in mean.iter().zip(sd) {
            let slack = z_coord * s / root_r;
            ok &= m.abs() <= bound + slack;
            if m.abs() - slack > worst - slack_at {
                worst = m.abs();
                slack_at = slack;
            }
        }
        let mut c = Check::new(name, worst, bound, slack_at);
        c.passed = ok;
        c
    };

    let checks = match suite {
        MaureySuite::ValueBias => {
            let f = TestFunction::Quadratic;
            let fx = f.value(&x_bar);
            let (m, s) = monte_carlo(&samplers, reps, seed, 1, |a, o| o[0] = f.value(a) - fx);
            let (_, l1, _) = f.constants();
            vec![Check::new("quadratic", m[0].abs(), 2.0 * l1 / t, 3.0 * s[0] / root_r)]
        }
        MaureySuite::GradientBiasSmooth => {
            let cubic = TestFunction::Cubic;
            let quad = TestFunction::Quadratic;
            let (mc, sc) = monte_carlo(&samplers, reps, seed, DIM, grad_diff(cubic));
            let (mq, sq) = monte_carlo(&samplers, reps, seed, DIM, grad_diff(quad));
            vec![
                bias_check("cubic", &mc, &sc, 2.0 * cubic.constants().2 / t),
                bias_check("quadratic", &mq, &sq, 2.0 * quad.constants().2 / t),
            ]
        }
        MaureySuite::GradientBiasLipschitz => {
            let f = TestFunction::LogSumExp { s: 4.0 };
            let (m, s) = monte_carlo(&samplers, reps, seed, DIM, grad_diff(f));
            vec![bias_check("log_sum_exp", &m, &s, 4.0 * f.constants().1 / t.sqrt())]
        }
        MaureySuite::ValueTail => {
            let f = TestFunction::Quadratic;
            let (l0, l1, _) = f.constants();
            let fx = f.value(&x_bar);
            let betas = [1.0, 2.0];
            let thresholds: Vec<f64> = betas
                .iter()
                .map(|b| l1 * DIAM * DIAM / (2.0 * t) + b * 2f64.sqrt() * l0 * DIAM / t.sqrt())
                .collect();
            let th = thresholds.clone();
            let (m, _) = monte_carlo(&samplers, reps, seed, 2, move |a, o| {
                let d = f.value(a) - fx;
                for (k, thr) in th.iter().enumerate() {
                    o[k] = if d >= *thr { 1.0 } else { 0.0 };
                }
            });
            betas
                .iter()
                .zip(&m)
                .map(|(b, freq)| {
                    let p: f64 = (-b * b).exp();
                    Check::new(format!("beta_{b}"), *freq, p, 3.0 * (p * (1.0 - p) / reps as f64).sqrt())
                })
                .collect()
        }
        MaureySuite::MaxSecondMoment => {
            // F_j(x) = <u_j, x>^2 / 2 with u_j in [-1, 1]^d: L0 = 1, L1 = 1.
            let m_funcs = 20;
            let mut rng = RngStream::new(seed, 0xf00d);
            let us: Vec<Vec<f64>> =
                (0..m_funcs).map(|_| (0..DIM).map(|_| 2.0 * rng.uniform() - 1.0).collect()).collect();
            let fj = |u: &[f64], x: &[f64]| -> f64 {
                let v: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
                0.5 * v * v
            };
            let at_x: Vec<f64> = us.iter().map(|u| fj(u, &x_bar)).collect();
            let (m, s) = monte_carlo(&samplers, reps, seed, 1, |a, o| {
                let worst = us.iter().zip(&at_x).fold(0.0f64, |w, (u, fx)| w.max((fj(u, a) - fx).abs()));
                o[0] = worst * worst;
            });
            let (l0, l1) = (1.0, 1.0);
            let lam2 = 1.0 / t;
            let bound = l1 * l1 * DIAM.powi(4) / 2.0 * lam2 * lam2
                + 2.0 * l0 * l0 * DIAM * DIAM * (4.0 + (m_funcs as f64).ln()) * lam2;
            vec![Check::new("quadratic_forms", m[0], bound, 3.0 * s[0] / root_r)]
        }
        MaureySuite::GradientMomentSmooth => {
            let f = TestFunction::Cubic;
            let (_, l1, l2) = f.constants();
            let (m, s) = monte_carlo(&samplers, reps, seed, 1, grad_sup_sq(f));
            let bound = 8.0 * l2 * l2 / (t * t) + 8.0 * l1 * l1 * (4.0 + ln_d) / t;
            vec![Check::new("cubic", m[0], bound, 3.0 * s[0] / root_r)]
        }
        MaureySuite::GradientMomentLipschitz => {
            let f = TestFunction::LogSumExp { s: 4.0 };
            let (l0, l1, _) = f.constants();
            let (m, s) = monte_carlo(&samplers, reps, seed, 1, grad_sup_sq(f));
            let c = (4.0 + ln_d).sqrt();
            let bound = 8.0 * 2f64.sqrt() * l1 * l1 / (t.powf(1.5) * c)
                + 8.0 * 2f64.sqrt() * (l0 * l0 + l1 * l1) * c / t.sqrt();
            vec![Check::new("log_sum_exp", m[0], bound, 3.0 * s[0] / root_r)]
        }
    };

    let warning = (reps < 10_000).then(|| format!("insufficient reps: {reps} < 10000"));
    Ok(MaureyReport {
        suite,
        reps,
        dim: DIM,
        draws: STEPS,
        passed: checks.iter().all(|c| c.passed),
        checks,
        warning,
    })
}

/// Convenience map from suite to report for a whole run.
pub fn verify_all(reps: usize, seed: u64) -> Result<BTreeMap<MaureySuite, MaureyReport>> {
    MaureySuite::ALL.into_iter().map(|s| Ok((s, verify_maurey_suite(s, reps, seed)?))).collect()
}
