use crate::error::{ensure, Result};
use crate::oracles::{ObjectiveConstants, PopulationObjective, SaddleObjective, SampleSource};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Stochastic bilinear game `f(x, y; z) = x^T (A + s_z E) y` with
/// `s_z = -1` for `z = 0` and `+1` for `z = 1`, drawn uniformly, so the
/// population payoff is `A`. Matrices are `d_x x d_y`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    dx: usize,
    dy: usize,
    a: Vec<f64>,
    e: Vec<f64>,
}

fn sign(z: usize) -> f64 {
    if z == 0 {
        -1.0
    } else {
        1.0
    }
}

impl MatrixGame {
    pub fn new(dx: usize, dy: usize, a: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        ensure!(dx >= 1 && dy >= 1, Shape, "game needs positive dimensions");
        ensure!(
            a.len() == dx * dy && e.len() == dx * dy,
            Shape,
            "expected {} entries, got {} and {}",
            dx * dy,
            a.len(),
            e.len()
        );
        ensure!(
            a.iter().chain(&e).all(|v| v.is_finite()),
            InvalidParameter,
            "payoffs must be finite"
        );
        let game = Self { dx, dy, a, e };
        ensure!(game.max_abs() > 0.0, InvalidParameter, "payoffs are identically zero");
        Ok(game)
    }

    /// Noise-free game with payoff `a`.
    pub fn deterministic(dx: usize, dy: usize, a: Vec<f64>) -> Result<Self> {
        Self::new(dx, dy, a, vec![0.0; dx * dy])
    }

    pub fn matching_pennies() -> Self {
        Self::deterministic(2, 2, vec![1.0, -1.0, -1.0, 1.0]).expect("valid game")
    }

    /// Payoffs uniform in `[-1/2, 1/2]` and noise uniform in `[-noise/2, noise/2]`.
    pub fn random(dx: usize, dy: usize, noise: f64, rng: &mut RngStream) -> Result<Self> {
        ensure!((0.0..=1.0).contains(&noise), InvalidParameter, "noise must lie in [0, 1]");
        let a = (0..dx * dy).map(|_| rng.uniform() - 0.5).collect();
        let e = (0..dx * dy).map(|_| noise * (rng.uniform() - 0.5)).collect();
        Self::new(dx, dy, a, e)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dx, self.dy)
    }

    pub fn payoff(&self) -> &[f64] {
        &self.a
    }

    pub fn noise(&self) -> &[f64] {
        &self.e
    }

    fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.e)
            .map(|(a, e)| (a + e).abs().max((a - e).abs()))
            .fold(0.0, f64::max)
    }

    /// `gx = (A + s E) y`, `gy = (A + s E)^T x`.
    fn grads_at<S: Scalar>(&self, s: f64, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        let s = S::of(s);
        gx.fill(S::zero());
        gy.fill(S::zero());
        for i in 0..self.dx {
            let row = i * self.dy;
            let mut acc = S::zero();
            for j in 0..self.dy {
                let m = S::of(self.a[row + j]) + s * S::of(self.e[row + j]);
                acc += m * y[j];
                gy[j] += m * x[i];
            }
            gx[i] = acc;
        }
    }

    fn value_at<S: Scalar>(&self, s: f64, x: &[S], y: &[S]) -> S {
        let s = S::of(s);
        let mut v = S::zero();
        for i in 0..self.dx {
            let row = i * self.dy;
            let mut acc = S::zero();
            for j in 0..self.dy {
                acc += (S::of(self.a[row + j]) + s * S::of(self.e[row + j])) * y[j];
            }
            v += x[i] * acc;
        }
        v
    }
}

impl<S: Scalar> SaddleObjective<S> for MatrixGame {
    fn dims(&self) -> (usize, usize) {
        (self.dx, self.dy)
    }

    // The gradient in x depends on y through A, so the game is
    // L0-smooth rather than 0-smooth in the joint argument.
    fn constants(&self) -> ObjectiveConstants {
        let l0 = self.max_abs();
        ObjectiveConstants { l0, l1: l0, l2: 0.0, b: l0 }
    }

    fn value(&self, x: &[S], y: &[S], z: usize) -> S {
        self.value_at(sign(z), x, y)
    }

    fn grad_x(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        let mut gy = vec![S::zero(); self.dy];
        self.grads_at(sign(z), x, y, out, &mut gy);
    }

    fn grad_y(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        let mut gx = vec![S::zero(); self.dx];
        self.grads_at(sign(z), x, y, &mut gx, out);
    }

    fn batch_grads(&self, x: &[S], y: &[S], batch: &[usize], gx: &mut [S], gy: &mut [S]) {
        let s = batch.iter().map(|&z| sign(z)).sum::<f64>() / batch.len() as f64;
        self.grads_at(s, x, y, gx, gy);
    }

    fn batch_value(&self, x: &[S], y: &[S], batch: &[usize]) -> S {
        let s = batch.iter().map(|&z| sign(z)).sum::<f64>() / batch.len() as f64;
        self.value_at(s, x, y)
    }
}

impl<S: Scalar> PopulationObjective<S> for MatrixGame {
    fn population_value(&self, x: &[S], y: &[S]) -> S {
        self.value_at(0.0, x, y)
    }

    fn population_grads(&self, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        self.grads_at(0.0, x, y, gx, gy);
    }
}

impl SampleSource for MatrixGame {
    fn draw(&self, rng: &mut RngStream) -> usize {
        rng.index(2)
    }
}
