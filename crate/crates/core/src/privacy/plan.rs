//! Parameter schedules. Rate constants are fixed to one and integer quantities
//! are rounded up unless noted.

use serde::{Deserialize, Serialize};

use super::{max_step_alg1, max_step_alg5, max_u_alg3, PrivacyParams};
use crate::error::{ensure, Error, Result};
use crate::oracles::ObjectiveConstants;

/// Which smoothness assumption the schedule is tuned for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FirstOrder,
    SecondOrder,
    Quadratic,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::FirstOrder => "first_order",
            Mode::SecondOrder => "second_order",
            Mode::Quadratic => "quadratic",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_order" => Ok(Mode::FirstOrder),
            "second_order" => Ok(Mode::SecondOrder),
            "quadratic" => Ok(Mode::Quadratic),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

// Slack for floating-point round-off when re-checking a bound that a planner
// set with equality.
const REL_TOL: f64 = 1e-12;

/// Schedule for the vertex-sampling saddle solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsmdPlan {
    pub t: usize,
    pub tau: f64,
    pub k: usize,
    pub batch: usize,
    pub mode: Mode,
}

impl SsmdPlan {
    pub fn validate(&self, n: usize, privacy: &PrivacyParams, l0: f64) -> Result<()> {
        ensure!(self.t >= 1 && self.k >= 1 && self.batch >= 1, Budget, "T, K and B must be positive");
        ensure!(self.tau > 0.0 && self.tau.is_finite(), Budget, "step size must be positive");
        ensure!(
            self.t.checked_mul(self.batch).is_some_and(|s| s <= n),
            Budget,
            "T * B = {} * {} exceeds n = {n}",
            self.t,
            self.batch
        );
        let cap = max_step_alg1(self.batch, privacy, l0, self.t, self.k)?;
        ensure!(
            self.tau <= cap * (1.0 + REL_TOL),
            Budget,
            "step size {} exceeds the private maximum {cap}",
            self.tau
        );
        Ok(())
    }
}

/// Schedule for the bias-reduced saddle solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrPlan {
    pub u: f64,
    pub m: u32,
    pub alpha: f64,
    pub tau: f64,
    /// `L0^2 + L2^2 + ell M L1^2`.
    pub c: f64,
}

impl BrPlan {
    pub fn validate(&self, n: usize, privacy: &PrivacyParams, l0: f64) -> Result<()> {
        ensure!(self.u >= 1.0 && self.u.is_finite(), Budget, "stopping parameter must be >= 1");
        ensure!(self.tau > 0.0 && self.alpha > 0.0, Budget, "tau and alpha must be positive");
        ensure!(
            2f64.powi(self.m as i32) <= self.u,
            Budget,
            "2^M = {} exceeds U = {}",
            2f64.powi(self.m as i32),
            self.u
        );
        let cap = max_u_alg3(privacy, self.tau, self.alpha, l0)?;
        ensure!(
            self.u <= cap * (1.0 + REL_TOL),
            Budget,
            "stopping parameter {} exceeds the private maximum {cap}",
            self.u
        );
        let nf = n as f64;
        let data_cap = (nf * self.alpha / 2.0).min(nf / 2.0);
        ensure!(
            self.u <= data_cap * (1.0 + REL_TOL),
            Budget,
            "stopping parameter {} exceeds the sample cap {data_cap}",
            self.u
        );
        Ok(())
    }
}

/// Schedule for the convex solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoPlan {
    pub t: usize,
    pub tau: f64,
    pub k: usize,
    pub q: usize,
    pub batch: usize,
    pub mode: Mode,
}

impl ScoPlan {
    pub fn validate(&self, n: usize, privacy: &PrivacyParams, l0: f64) -> Result<()> {
        ensure!(
            self.t >= 1 && self.k >= 1 && self.q >= 1 && self.batch >= 1,
            Budget,
            "T, K, q and B must be positive"
        );
        ensure!(self.tau > 0.0 && self.tau.is_finite(), Budget, "step size must be positive");
        ensure!(
            self.t.checked_mul(self.batch).is_some_and(|s| s <= n),
            Budget,
            "T * B = {} * {} exceeds n = {n}",
            self.t,
            self.batch
        );
        let cap = max_step_alg5(self.batch, privacy, l0, self.t, self.k, self.q)?;
        ensure!(
            self.tau <= cap * (1.0 + REL_TOL),
            Budget,
            "step size {} exceeds the private maximum {cap}",
            self.tau
        );
        let psi = 1.0 / (4.0 * l0 * self.q as f64);
        ensure!(
            self.tau <= psi * (1.0 + REL_TOL),
            Budget,
            "step size {} exceeds 1/(4 L0 q) = {psi}",
            self.tau
        );
        Ok(())
    }
}

fn check_common(n: usize, constants: &ObjectiveConstants, ell: f64) -> Result<()> {
    ensure!(n >= 1, Budget, "need at least one sample");
    constants.validate()?;
    ensure!(ell > 0.0 && ell.is_finite(), InvalidParameter, "log-dimension must be positive");
    Ok(())
}

fn ceil_usize(v: f64) -> usize {
    v.ceil().max(1.0) as usize
}

/// Schedule for the vertex-sampling saddle solver. `ell = ln d_x + ln d_y`.
pub fn plan_alg1(
    n: usize,
    privacy: &PrivacyParams,
    constants: &ObjectiveConstants,
    ell: f64,
    mode: Mode,
) -> Result<SsmdPlan> {
    check_common(n, constants, ell)?;
    let (nf, eps, ln) = (n as f64, privacy.epsilon(), privacy.ln_inv_delta());
    let raw_t = match mode {
        Mode::FirstOrder => (nf * eps).powf(2.0 / 3.0) / ln.powf(1.0 / 3.0),
        Mode::SecondOrder | Mode::Quadratic => {
            (nf * eps).powf(0.8) / (ell.powf(0.2) * ln.powf(0.4))
        }
    };
    let t = ceil_usize(raw_t).min(n);
    let tf = t as f64;
    let k = match mode {
        Mode::FirstOrder => ceil_usize(tf / ell),
        Mode::SecondOrder => ceil_usize((tf / ell).sqrt()),
        Mode::Quadratic => 1,
    };
    let batch = (n / t).max(1);
    let tau_opt = (ell / tf).sqrt() / constants.l0;
    let tau = tau_opt.min(max_step_alg1(batch, privacy, constants.l0, t, k)?);
    let plan = SsmdPlan { t, tau, k, batch, mode };
    plan.validate(n, privacy, constants.l0)?;
    Ok(plan)
}

/// Schedule for the bias-reduced saddle solver.
///
/// `M` and `U` depend on each other; `M` is iterated to a fixed point.
pub fn plan_alg3(
    n: usize,
    privacy: &PrivacyParams,
    constants: &ObjectiveConstants,
    ell: f64,
) -> Result<BrPlan> {
    check_common(n, constants, ell)?;
    ensure!(n >= 8, Budget, "the bias-reduced solver needs n >= 8, got {n}");
    let (nf, eps, ln) = (n as f64, privacy.epsilon(), privacy.ln_inv_delta());
    let ObjectiveConstants { l0, l1, l2, .. } = *constants;
    let c_of = |m: u32| l0 * l0 + l2 * l2 + ell * m as f64 * l1 * l1;
    let u_of = |c: f64| {
        let privacy_cap = nf * eps * c.sqrt() / ((4.0 * 48.0 * 81.0 * ell * ln).sqrt() * l0);
        privacy_cap.min(nf / 2.0)
    };
    let level = |u: f64| (0.5 * u.log2()).round().max(0.0) as u32;

    let mut m = level(nf / 2.0);
    let mut converged = false;
    for _ in 0..10 {
        let next = level(u_of(c_of(m)));
        if next == m {
            converged = true;
            break;
        }
        m = next;
    }
    ensure!(converged, Budget, "truncation level did not reach a fixed point");

    let c = c_of(m);
    let u_star = u_of(c);
    ensure!(u_star >= 4.0, Budget, "stopping parameter {u_star} < 4; n or epsilon too small");
    // Back off one part in 1e9 so the privacy and sample caps hold strictly.
    let u = u_star * (1.0 - 1e-9);
    let tau = (ell / (c * u)).sqrt();
    let alpha = (2.0 * eps * eps / (48.0 * 81.0 * ln * (tau * l0).powi(2) * nf)).cbrt();
    let plan = BrPlan { u, m, alpha, tau, c };
    plan.validate(n, privacy, l0)?;
    Ok(plan)
}

/// Schedule for the convex solver. `ell_x = ln d_x`.
pub fn plan_alg5(
    n: usize,
    privacy: &PrivacyParams,
    constants: &ObjectiveConstants,
    ell_x: f64,
    mode: Mode,
) -> Result<ScoPlan> {
    check_common(n, constants, ell_x)?;
    let (nf, eps, ln) = (n as f64, privacy.epsilon(), privacy.ln_inv_delta());
    let round1 = |v: f64| v.round().max(1.0) as usize;
    let (t, q, k) = match mode {
        Mode::SecondOrder => {
            let t = ceil_usize(nf * eps / (ell_x * ln.sqrt())).min(n);
            let q = round1((t as f64 / ell_x).sqrt()).min(t);
            (t, q, round1(t as f64 / q as f64))
        }
        Mode::FirstOrder => {
            let t = ceil_usize((nf * eps).powf(0.8) / (ell_x * ln).powf(0.4)).min(n);
            let q = round1((t as f64).sqrt() / ell_x).min(t);
            (t, q, round1(t as f64 / ell_x))
        }
        Mode::Quadratic => {
            return Err(Error::InvalidParameter(
                "the convex solver supports first_order and second_order modes".into(),
            ))
        }
    };
    let batch = (n / t).max(1);
    let l0 = constants.l0;
    let tau_opt = (ell_x / t as f64).sqrt() / l0;
    let tau = tau_opt
        .min(1.0 / (4.0 * l0 * q as f64))
        .min(max_step_alg5(batch, privacy, l0, t, k, q)?);
    let plan = ScoPlan { t, tau, k, q, batch, mode };
    plan.validate(n, privacy, l0)?;
    Ok(plan)
}
