use crate::error::{ensure, Result};
use crate::oracles::{ConvexObjective, ObjectiveConstants, PopulationConvex, PopulationObjective, SaddleObjective, SampleSource};
use crate::rng::{mix64, RngStream};
use crate::scalar::Scalar;

/// `f(x; z) = sum_j c_j (x_j - a_j)^2 + sigma <u_z, x>` with sign vectors
/// `u_z in {-1, 1}^d` for `z in 0..2m` and `u_(z+m) = -u_z`, so the noise
/// averages to zero exactly under the uniform draw.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableQuadratic {
    c: Vec<f64>,
    a: Vec<f64>,
    sigma: f64,
    half: usize,
    salt: u64,
}

impl SeparableQuadratic {
    pub fn new(c: Vec<f64>, a: Vec<f64>, sigma: f64, half: usize, salt: u64) -> Result<Self> {
        ensure!(!c.is_empty() && c.len() == a.len(), Shape, "c and a must be nonempty and equal length");
        ensure!(c.iter().all(|v| v.is_finite() && *v >= 0.0), InvalidParameter, "curvatures must be >= 0");
        ensure!(
            a.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)),
            InvalidParameter,
            "centers must lie in [0, 1]"
        );
        ensure!(sigma >= 0.0 && sigma.is_finite(), InvalidParameter, "sigma must be >= 0");
        ensure!(half >= 1, InvalidParameter, "need at least one noise pair");
        Ok(Self { c, a, sigma, half, salt })
    }

    /// Random instance on `Delta_d`: `c_j in [0.5, 1.5]`, `a_j in [0, 2/d]`.
    pub fn random(d: usize, sigma: f64, rng: &mut RngStream) -> Result<Self> {
        let c = (0..d).map(|_| 0.5 + rng.uniform()).collect();
        let a = (0..d).map(|_| 2.0 * rng.uniform() / d as f64).collect();
        Self::new(c, a, sigma, 64, rand::RngCore::next_u64(rng))
    }

    fn noise(&self, z: usize, j: usize) -> f64 {
        let (base, flip) = if z >= self.half { (z - self.half, -1.0) } else { (z, 1.0) };
        let bit = mix64(self.salt ^ ((base as u64) << 20) ^ j as u64) & 1;
        flip * if bit == 1 { self.sigma } else { -self.sigma }
    }

    /// Number of distinct sample ids.
    pub fn support(&self) -> usize {
        2 * self.half
    }

    /// Exact minimizer of the population loss over the simplex. The KKT
    /// conditions give `x_j = max(0, a_j - lambda / (2 c_j))` with the
    /// multiplier fixed by `sum x_j = 1`; found by bisection.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        ensure!(self.c.iter().all(|&c| c > 0.0), InvalidParameter, "minimizer needs c_j > 0");
        let at = |lam: f64| -> f64 {
            self.c.iter().zip(&self.a).map(|(c, a)| (a - lam / (2.0 * c)).max(0.0)).sum()
        };
        let cmax = self.c.iter().copied().fold(0.0, f64::max);
        let (mut lo, mut hi) = (-2.0 * cmax * 2.0, 2.0 * cmax * 2.0);
        while at(lo) < 1.0 {
            lo *= 2.0;
        }
        while at(hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        let x: Vec<f64> = self.c.iter().zip(&self.a).map(|(c, a)| (a - lam / (2.0 * c)).max(0.0)).collect();
        let s: f64 = x.iter().sum();
        Ok(x.into_iter().map(|v| v / s).collect())
    }

    /// `max_v F(v) - min_v F(v)` over the simplex; the max sits at a vertex.
    pub fn range(&self) -> Result<f64> {
        let d = self.c.len();
        let at = |x: &[f64]| -> f64 { PopulationConvex::<f64>::population_value(self, x) };
        let best = at(&self.minimizer()?);
        let worst = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                at(&e)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(worst - best)
    }
}

impl<S: Scalar> ConvexObjective<S> for SeparableQuadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }

    // On the simplex |x_j - a_j| <= max(a_j, 1 - a_j) =: r_j <= 1.
    // Gradient 2 c_j (x_j - a_j) + sigma u_j; Hessian diag(2 c); partials affine.
    fn constants(&self) -> ObjectiveConstants {
        let r = |a: f64| a.max(1.0 - a);
        let l0 = self.c.iter().zip(&self.a).map(|(c, a)| 2.0 * c * r(*a)).fold(0.0, f64::max) + self.sigma;
        let l1 = 2.0 * self.c.iter().copied().fold(0.0, f64::max);
        let b = self.c.iter().zip(&self.a).map(|(c, a)| c * r(*a) * r(*a)).sum::<f64>() + self.sigma;
        ObjectiveConstants { l0, l1, l2: 0.0, b }
    }

    fn value(&self, x: &[S], z: usize) -> S {
        let mut v = PopulationConvex::population_value(self, x);
        for (j, &xj) in x.iter().enumerate() {
            v += S::of(self.noise(z, j)) * xj;
        }
        v
    }

    fn grad(&self, x: &[S], z: usize, out: &mut [S]) {
        PopulationConvex::population_grad(self, x, out);
        for (j, o) in out.iter_mut().enumerate() {
            *o += S::of(self.noise(z, j));
        }
    }
}

impl<S: Scalar> PopulationConvex<S> for SeparableQuadratic {
    fn population_value(&self, x: &[S]) -> S {
        x.iter()
            .zip(self.c.iter().zip(&self.a))
            .map(|(&xj, (&c, &a))| {
                let d = xj - S::of(a);
                S::of(c) * d * d
            })
            .sum()
    }

    fn population_grad(&self, x: &[S], out: &mut [S]) {
        for (o, (&xj, (&c, &a))) in out.iter_mut().zip(x.iter().zip(self.c.iter().zip(&self.a))) {
            *o = S::of(2.0 * c) * (xj - S::of(a));
        }
    }
}

impl SampleSource for SeparableQuadratic {
    fn draw(&self, rng: &mut RngStream) -> usize {
        rng.index(2 * self.half)
    }
}

/// `f(x, y; z) = sum_i y_i f_i(x; z)`: the worst component loss as a
/// saddle problem.
pub struct MaxLossObjective<S> {
    components: Vec<Box<dyn PopulationConvex<S>>>,
    constants: ObjectiveConstants,
}

/// Composite constants: Lipschitz `max(L0, B)`, smooth `max(L0, L1)`,
/// second-order smooth `max(L1, L2)`, bounded by `B`.
pub fn make_max_loss_objective<S: Scalar>(
    components: Vec<Box<dyn PopulationConvex<S>>>,
) -> Result<MaxLossObjective<S>> {
    ensure!(!components.is_empty(), InvalidParameter, "need at least one component");
    let d = components[0].dim();
    ensure!(components.iter().all(|c| c.dim() == d), Shape, "components disagree on dimension");
    let mut m = ObjectiveConstants { l0: 0.0, l1: 0.0, l2: 0.0, b: 0.0 };
    for c in &components {
        let k = c.constants();
        k.validate()?;
        m.l0 = m.l0.max(k.l0);
        m.l1 = m.l1.max(k.l1);
        m.l2 = m.l2.max(k.l2);
        m.b = m.b.max(k.b);
    }
    let constants = ObjectiveConstants {
        l0: m.l0.max(m.b),
        l1: m.l0.max(m.l1),
        l2: m.l1.max(m.l2),
        b: m.b,
    };
    Ok(MaxLossObjective { components, constants })
}

impl<S: Scalar> SaddleObjective<S> for MaxLossObjective<S> {
    fn dims(&self) -> (usize, usize) {
        (self.components[0].dim(), self.components.len())
    }

    fn constants(&self) -> ObjectiveConstants {
        self.constants
    }

    fn value(&self, x: &[S], y: &[S], z: usize) -> S {
        self.components.iter().zip(y).map(|(c, &yi)| yi * c.value(x, z)).sum()
    }

    fn grad_x(&self, x: &[S], y: &[S], z: usize, out: &mut [S]) {
        let mut t = vec![S::zero(); x.len()];
        out.fill(S::zero());
        for (c, &yi) in self.components.iter().zip(y) {
            c.grad(x, z, &mut t);
            out.iter_mut().zip(&t).for_each(|(o, v)| *o += yi * *v);
        }
    }

    fn grad_y(&self, x: &[S], _y: &[S], z: usize, out: &mut [S]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.value(x, z);
        }
    }
}

impl<S: Scalar> PopulationObjective<S> for MaxLossObjective<S> {
    fn population_value(&self, x: &[S], y: &[S]) -> S {
        self.components.iter().zip(y).map(|(c, &yi)| yi * c.population_value(x)).sum()
    }

    fn population_grads(&self, x: &[S], y: &[S], gx: &mut [S], gy: &mut [S]) {
        let mut t = vec![S::zero(); x.len()];
        gx.fill(S::zero());
        for ((c, &yi), g) in self.components.iter().zip(y).zip(gy.iter_mut()) {
            c.population_grad(x, &mut t);
            gx.iter_mut().zip(&t).for_each(|(o, v)| *o += yi * *v);
            *g = c.population_value(x);
        }
    }
}
