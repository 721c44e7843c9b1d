//! Per-sample objective interfaces, batch gradients, the truncated geometric
//! law and the multilevel bias-reduced gradient estimator.

mod bias_reduced;
mod dataset;
mod trunc_geom;

pub use bias_reduced::bias_reduced_gradient;
pub use dataset::{Dataset, SampleSource};
pub use trunc_geom::TruncGeom;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Regularity constants with respect to `||.||_1` on inputs.
///
/// `l0` bounds `||grad||_inf`, `l1` is the smoothness of the gradient, `l2`
/// the smoothness of each partial derivative and `b` bounds `|f|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConstants {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub b: f64,
}

impl ObjectiveConstants {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.l0 > 0.0 && self.l0.is_finite(),
            InvalidParameter,
            "L0 must be positive and finite"
        );
        for (name, v) in [("L1", self.l1), ("L2", self.l2), ("B", self.b)] {
            ensure!(v >= 0.0 && v.is_finite(), InvalidParameter, "{name} must be finite and >= 0");
        }
        Ok(())
    }
}

/// `f(x, y; z)`, convex in `x` and concave in `y`, with samples addressed by id.
pub trait SaddleObjective<S: Scalar>: Send + Sync {
    /// `(d_x, d_y)`.
    fn dims(&self) -> (usize, usize);

    fn constants(&self) -> ObjectiveConstants;

    fn value(&self, x: &[S], y: &[S], z: usize) -> S;

    fn grad_x(&self, x: &[S], y: &[S], z: usize, out: &mut [S]);

    fn grad_y(&self, x: &[S], y: &[S], z: usize, out: &mut [S]);

    /// Batch means of `grad_x` and `grad_y` (no sign flip).
    fn batch_grads(&self, x: &[S], y: &[S], batch: &[usize], gx: &mut [S], gy: &mut [S]) {
        let (dx, dy) = self.dims();
        let mut tx = vec![S::zero(); dx];
        let mut ty = vec![S::zero(); dy];
        gx.fill(S::zero());
        gy.fill(S::zero());
        for &z in batch {
            self.grad_x(x, y, z, &mut tx);
            self.grad_y(x, y, z, &mut ty);
            for (g, t) in gx.iter_mut().zip(&tx) {
                *g += *t;
            }
            for (g, t) in gy.iter_mut().zip(&ty) {
                *g += *t;
            }
        }
        let inv = S::one() / S::from_usize_lossy(batch.len());
        gx.iter_mut().for_each(|g| *g *= inv);
        gy.iter_mut().for_each(|g| *g *= inv);
    }

    fn batch_value(&self, x: &[S], y: &[S], batch: &[usize]) -> S {
        let total: S = batch.iter().map(|&z| self.value(x, y, z)).sum();
        total / S::from_usize_lossy(batch.len())
    }
}

/// Access to the population objective `F(x, y) = E_z f(x, y; z)`.
pub trait PopulationObjective<S: Scalar>: SaddleObjective<S> {
    fn population_value(&self, x: &[S], y: &[S]) -> S;

    fn population_grads(&self, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]);
}

impl<S: Scalar, T: SaddleObjective<S> + ?Sized> SaddleObjective<S> for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn constants(&self) -> ObjectiveConstants {
        (**self).constants()
    }
    fn value(&self, x: &[S], y: &[S], z: usize) -> S {
        (**self).value(x, y, z)
    }
    fn grad_x(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        (**self).grad_x(x, y, z, out)
    }
    fn grad_y(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        (**self).grad_y(x, y, z, out)
    }
    fn batch_grads(&self, x: &[S], y: &[S], batch: &[usize], gx: &mut [S], gy: &mut [S]) {
        (**self).batch_grads(x, y, batch, gx, gy)
    }
    fn batch_value(&self, x: &[S], y: &[S], batch: &[usize]) -> S {
        (**self).batch_value(x, y, batch)
    }
}

impl<S: Scalar, T: PopulationObjective<S> + ?Sized> PopulationObjective<S> for &T {
    fn population_value(&self, x: &[S], y: &[S]) -> S {
        (**self).population_value(x, y)
    }
    fn population_grads(&self, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        (**self).population_grads(x, y, gx, gy)
    }
}

/// A convex loss `f(x; z)` over one simplex.
pub trait ConvexObjective<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn constants(&self) -> ObjectiveConstants;

    fn value(&self, x: &[S], z: usize) -> S;

    fn grad(&self, x: &[S], z: usize, out: &mut [S]);

    fn batch_grad(&self, x: &[S], batch: &[usize], out: &mut [S]) {
        let mut t = vec![S::zero(); self.dim()];
        out.fill(S::zero());
        for &z in batch {
            self.grad(x, z, &mut t);
            for (o, v) in out.iter_mut().zip(&t) {
                *o += *v;
            }
        }
        let inv = S::one() / S::from_usize_lossy(batch.len());
        out.iter_mut().for_each(|o| *o *= inv);
    }

    fn batch_value(&self, x: &[S], batch: &[usize]) -> S {
        let total: S = batch.iter().map(|&z| self.value(x, z)).sum();
        total / S::from_usize_lossy(batch.len())
    }
}

pub trait PopulationConvex<S: Scalar>: ConvexObjective<S> {
    fn population_value(&self, x: &[S]) -> S;

    fn population_grad(&self, x: &[S], out: &mut [S]);
}

/// The saddle operator `(grad_x F, -grad_y F)` or a stochastic estimate of it.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleGradient<S> {
    pub gx: Vec<S>,
    pub gy: Vec<S>,
}

impl<S: Scalar> SaddleGradient<S> {
    pub fn zeros(dx: usize, dy: usize) -> Self {
        Self { gx: vec![S::zero(); dx], gy: vec![S::zero(); dy] }
    }

    pub fn is_finite(&self) -> bool {
        self.gx.iter().chain(&self.gy).all(|v| v.is_finite())
    }

    /// `max(||gx||_inf, ||gy||_inf)`.
    pub fn norm_inf(&self) -> S {
        self.gx
            .iter()
            .chain(&self.gy)
            .fold(S::zero(), |m, v| m.max(v.abs()))
    }
}

/// Mean batch gradient with the saddle-operator sign: `gy = -mean grad_y`.
pub fn batch_gradient<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    x: &[S],
    y: &[S],
    batch: &[usize],
) -> Result<SaddleGradient<S>> {
    ensure!(!batch.is_empty(), InvalidParameter, "batch must be nonempty");
    let (dx, dy) = obj.dims();
    ensure!(
        x.len() == dx && y.len() == dy,
        Shape,
        "objective has dims ({dx}, {dy}), got ({}, {})",
        x.len(),
        y.len()
    );
    let mut g = SaddleGradient::zeros(dx, dy);
    obj.batch_grads(x, y, batch, &mut g.gx, &mut g.gy);
    g.gy.iter_mut().for_each(|v| *v = -*v);
    Ok(g)
}

fn random_direction<S: Scalar>(d: usize, rng: &mut RngStream) -> Vec<S> {
    (0..d).map(|_| S::of(2.0 * rng.uniform() - 1.0)).collect()
}

/// Largest relative mismatch between analytic directional derivatives and
/// central differences over `dirs` random directions.
///
/// The mismatch is `|fd - an| / max(1, |an|)`. Intended for `f64`.
pub fn saddle_fd_error<S: Scalar, O: SaddleObjective<S> + ?Sized>(
    obj: &O,
    x: &[S],
    y: &[S],
    z: usize,
    dirs: usize,
    rng: &mut RngStream,
) -> f64 {
    let (dx, dy) = obj.dims();
    let h = S::of(1e-5);
    let mut gx = vec![S::zero(); dx];
    let mut gy = vec![S::zero(); dy];
    obj.grad_x(x, y, z, &mut gx);
    obj.grad_y(x, y, z, &mut gy);
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let ux: Vec<S> = random_direction(dx, rng);
        let uy: Vec<S> = random_direction(dy, rng);
        let shift = |v: &[S], u: &[S], s: S| -> Vec<S> {
            v.iter().zip(u).map(|(&a, &b)| a + s * b).collect()
        };
        let fd_x = (obj.value(&shift(x, &ux, h), y, z) - obj.value(&shift(x, &ux, -h), y, z))
            / (h + h);
        let fd_y = (obj.value(x, &shift(y, &uy, h), z) - obj.value(x, &shift(y, &uy, -h), z))
            / (h + h);
        let an_x: S = gx.iter().zip(&ux).map(|(&g, &u)| g * u).sum();
        let an_y: S = gy.iter().zip(&uy).map(|(&g, &u)| g * u).sum();
        for (fd, an) in [(fd_x, an_x), (fd_y, an_y)] {
            let (fd, an) = (fd.as_f64(), an.as_f64());
            worst = worst.max((fd - an).abs() / an.abs().max(1.0));
        }
    }
    worst
}

/// Single-block analogue of [`saddle_fd_error`].
pub fn convex_fd_error<S: Scalar, O: ConvexObjective<S> + ?Sized>(
    obj: &O,
    x: &[S],
    z: usize,
    dirs: usize,
    rng: &mut RngStream,
) -> f64 {
    let d = obj.dim();
    let h = S::of(1e-5);
    let mut g = vec![S::zero(); d];
    obj.grad(x, z, &mut g);
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let u: Vec<S> = random_direction(d, rng);
        let plus: Vec<S> = x.iter().zip(&u).map(|(&a, &b)| a + h * b).collect();
        let minus: Vec<S> = x.iter().zip(&u).map(|(&a, &b)| a - h * b).collect();
        let fd = ((obj.value(&plus, z) - obj.value(&minus, z)) / (h + h)).as_f64();
        let an: f64 = g.iter().zip(&u).map(|(&a, &b)| (a * b).as_f64()).sum();
        worst = worst.max((fd - an).abs() / an.abs().max(1.0));
    }
    worst
}
