//! Probability-simplex arithmetic: validated points, vertex sampling,
//! sparsification by vertex averaging, and log-domain multiplicative weights.

use crate::error::{ensure, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// A point of the probability simplex `Δ_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<S> {
    coords: Vec<S>,
}

fn check_coords<S: Scalar>(coords: &[S]) -> Result<()> {
    ensure!(!coords.is_empty(), InvalidParameter, "simplex point must have dim >= 1");
    let mut sum = 0.0f64;
    for (j, &c) in coords.iter().enumerate() {
        let c = c.as_f64();
        ensure!(c.is_finite(), Numeric, "coordinate {j} is not finite");
        ensure!(c >= 0.0, InvalidParameter, "coordinate {j} is negative ({c})");
        sum += c;
    }
    ensure!(
        (sum - 1.0).abs() <= S::SIMPLEX_TOL,
        InvalidParameter,
        "coordinates sum to {sum}, not 1"
    );
    Ok(())
}

impl<S: Scalar> SimplexPoint<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        check_coords(&coords)?;
        Ok(Self { coords })
    }

    /// Skips validation; callers guarantee the invariants (checked in debug builds).
    pub(crate) fn from_vec_unchecked(coords: Vec<S>) -> Self {
        debug_assert!(check_coords(&coords).is_ok(), "invalid simplex point {coords:?}");
        Self { coords }
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let c = S::one() / S::from_usize_lossy(dim);
        Self { coords: vec![c; dim] }
    }

    pub fn vertex(dim: usize, index: usize) -> Self {
        assert!(index < dim, "vertex {index} out of range for dim {dim}");
        let mut coords = vec![S::zero(); dim];
        coords[index] = S::one();
        Self { coords }
    }

    /// Empirical distribution of vertex counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        ensure!(total > 0, InvalidParameter, "counts must not all be zero");
        let t = S::of(total as f64);
        Ok(Self::from_vec_unchecked(
            counts.iter().map(|&c| S::of(c as f64) / t).collect(),
        ))
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_vec(self) -> Vec<S> {
        self.coords
    }

    pub fn to_f64(&self) -> SimplexPoint<f64> {
        SimplexPoint { coords: self.coords.iter().map(|c| c.as_f64()).collect() }
    }

    pub fn l1_distance(&self, other: &Self) -> S {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a - b).abs())
            .sum()
    }

    pub fn sampler(&self) -> VertexSampler {
        VertexSampler::new(&self.coords)
    }

    /// Draws a vertex index `i` with probability `x_i`.
    pub fn sample_vertex(&self, rng: &mut RngStream) -> usize {
        self.sampler().sample(rng)
    }

    /// Average of `k` iid one-hot draws from `P_x`.
    pub fn sparsify(&self, k: usize, rng: &mut RngStream) -> Result<Self> {
        ensure!(k >= 1, InvalidParameter, "sparsify needs K >= 1");
        let counts = self.sampler().counts(k, rng);
        Self::from_counts(&counts)
    }
}

/// Inverse-CDF sampler over the vertices of a simplex point.
///
/// A single open-uniform draw `u` is scaled by the cumulative total and the
/// first index whose cumulative mass reaches `u` is returned, so ties at a
/// boundary go to the lower index and zero-mass vertices are never drawn.
#[derive(Clone, Debug)]
pub struct VertexSampler {
    cdf: Vec<f64>,
}

impl VertexSampler {
    pub fn new<S: Scalar>(coords: &[S]) -> Self {
        let mut acc = 0.0;
        let cdf = coords
            .iter()
            .map(|c| {
                acc += c.as_f64();
                acc
            })
            .collect();
        Self { cdf }
    }

    pub fn dim(&self) -> usize {
        self.cdf.len()
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.uniform_open() * total;
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }

    pub fn counts(&self, k: usize, rng: &mut RngStream) -> Vec<u64> {
        let mut counts = vec![0u64; self.cdf.len()];
        for _ in 0..k {
            counts[self.sample(rng)] += 1;
        }
        counts
    }
}

/// `w_t = ((t - 1) w_{t-1} + x_t) / t`.
pub fn running_average<S: Scalar>(
    prev: &SimplexPoint<S>,
    x_t: &SimplexPoint<S>,
    t: usize,
) -> Result<SimplexPoint<S>> {
    ensure!(t >= 1, InvalidParameter, "running average index t must be >= 1");
    ensure!(
        prev.dim() == x_t.dim(),
        Shape,
        "running average of dims {} and {}",
        prev.dim(),
        x_t.dim()
    );
    if t == 1 {
        return Ok(x_t.clone());
    }
    let tf = S::from_usize_lossy(t);
    let tm1 = S::from_usize_lossy(t - 1);
    let coords = prev
        .coords
        .iter()
        .zip(&x_t.coords)
        .map(|(&w, &x)| (tm1 * w + x) / tf)
        .collect();
    Ok(SimplexPoint::from_vec_unchecked(coords))
}

/// Unnormalized log-domain weights of a multiplicative-weights iterate.
///
/// Steps are accumulated additively and never renormalized, so the stored
/// vector is exactly the initial scores plus the cumulative signed gradient
/// sum. Normalization happens only in [`LogWeights::to_point`].
#[derive(Clone, Debug, PartialEq)]
pub struct LogWeights<S> {
    logw: Vec<S>,
}

impl<S: Scalar> LogWeights<S> {
    /// All-zero scores, i.e. the uniform point.
    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { logw: vec![S::zero(); dim] }
    }

    pub fn from_vec(logw: Vec<S>) -> Result<Self> {
        ensure!(!logw.is_empty(), InvalidParameter, "log-weights must have dim >= 1");
        ensure!(
            logw.iter().all(|v| v.is_finite()),
            Numeric,
            "log-weights must be finite"
        );
        Ok(Self { logw })
    }

    pub fn dim(&self) -> usize {
        self.logw.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.logw
    }

    /// Adds `step` to the scores. The caller supplies the signed, scaled step:
    /// `-tau * g` to descend, `+tau * g` to ascend.
    pub fn apply(&mut self, step: &[S]) -> Result<()> {
        ensure!(
            step.len() == self.logw.len(),
            Shape,
            "step has dim {}, weights have dim {}",
            step.len(),
            self.logw.len()
        );
        ensure!(step.iter().all(|v| v.is_finite()), Numeric, "non-finite MWU step");
        for (l, &s) in self.logw.iter_mut().zip(step) {
            *l += s;
        }
        ensure!(
            self.logw.iter().all(|v| v.is_finite()),
            Numeric,
            "log-weights overflowed"
        );
        Ok(())
    }

    /// Functional form of [`LogWeights::apply`].
    pub fn stepped(&self, step: &[S]) -> Result<Self> {
        let mut next = self.clone();
        next.apply(step)?;
        Ok(next)
    }

    /// `x_j <- x_j exp(-tau g_j)`.
    pub fn descend(&mut self, g: &[S], tau: S) -> Result<()> {
        self.scaled_step(g, -tau)
    }

    /// `y_i <- y_i exp(+tau g_i)`.
    pub fn ascend(&mut self, g: &[S], tau: S) -> Result<()> {
        self.scaled_step(g, tau)
    }

    fn scaled_step(&mut self, g: &[S], scale: S) -> Result<()> {
        ensure!(scale.is_finite() && scale != S::zero(), InvalidParameter, "step size must be positive");
        ensure!(
            g.len() == self.logw.len(),
            Shape,
            "gradient has dim {}, weights have dim {}",
            g.len(),
            self.logw.len()
        );
        ensure!(g.iter().all(|v| v.is_finite()), Numeric, "non-finite gradient");
        for (l, &gj) in self.logw.iter_mut().zip(g) {
            *l += scale * gj;
        }
        ensure!(
            self.logw.iter().all(|v| v.is_finite()),
            Numeric,
            "log-weights overflowed"
        );
        Ok(())
    }

    /// Max-shifted softmax of the scores.
    pub fn to_point(&self) -> SimplexPoint<S> {
        let m = self
            .logw
            .iter()
            .copied()
            .fold(S::neg_infinity(), S::max);
        let exps: Vec<S> = self.logw.iter().map(|&l| (l - m).exp()).collect();
        let total: S = exps.iter().copied().sum();
        SimplexPoint::from_vec_unchecked(exps.into_iter().map(|e| e / total).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn p(v: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(SimplexPoint::<f64>::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.5 + 1e-10]).is_ok());
    }

    #[test]
    fn degenerate_vertex_always_sampled() {
        let x = p(&[1.0, 0.0, 0.0]);
        let mut rng = RngStream::new(1, 1);
        for _ in 0..10_000 {
            assert_eq!(x.sample_vertex(&mut rng), 0);
        }
    }

    #[test]
    fn zero_mass_vertices_are_never_drawn() {
        let x = p(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let s = x.sampler();
        let mut rng = RngStream::new(4, 4);
        for _ in 0..50_000 {
            let i = s.sample(&mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn fair_coin_frequency_within_binomial_band() {
        let x = p(&[0.5, 0.5]);
        let s = x.sampler();
        let mut rng = RngStream::new(2, 0);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| s.sample(&mut rng) == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.002, "freq {freq}");
    }

    #[test]
    fn three_way_chi_square_below_999_quantile() {
        let probs = [0.2, 0.3, 0.5];
        let x = p(&probs);
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000usize;
        let counts = x.sampler().counts(n, &mut rng);
        let chi2: f64 = counts
            .iter()
            .zip(probs)
            .map(|(&c, q)| {
                let e = q * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new(2.0).unwrap().inverse_cdf(0.999);
        assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
    }

    #[test]
    fn sparsify_point_mass_is_fixed() {
        let x = p(&[1.0, 0.0]);
        let mut rng = RngStream::new(5, 0);
        for k in [1, 2, 7, 100] {
            assert_eq!(x.sparsify(k, &mut rng).unwrap(), x);
        }
    }

    #[test]
    fn sparsify_rejects_zero_k() {
        let x = p(&[0.5, 0.5]);
        let mut rng = RngStream::new(5, 0);
        assert!(matches!(x.sparsify(0, &mut rng), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sparsify_two_draws_matches_binomial_enumeration() {
        // Outcomes (1,0), (.5,.5), (0,1) have probabilities 1/4, 1/2, 1/4.
        let x = p(&[0.5, 0.5]);
        let mut rng = RngStream::new(6, 0);
        let reps = 100_000;
        let mut hist = [0usize; 3];
        for _ in 0..reps {
            let s = x.sparsify(2, &mut rng).unwrap();
            let idx = match s.coords()[0] {
                v if v == 1.0 => 0,
                v if v == 0.5 => 1,
                v if v == 0.0 => 2,
                v => panic!("unexpected coordinate {v}"),
            };
            hist[idx] += 1;
        }
        for (h, q) in hist.iter().zip([0.25, 0.5, 0.25]) {
            let sd = (q * (1.0 - q) / reps as f64).sqrt();
            let f = *h as f64 / reps as f64;
            assert!((f - q).abs() <= 3.0 * sd, "freq {f} vs {q}");
        }
    }

    #[test]
    fn sparsify_has_at_most_k_support_in_multiples_of_one_over_k() {
        let x = SimplexPoint::<f64>::uniform(40);
        let mut rng = RngStream::new(7, 0);
        let k = 6;
        let s = x.sparsify(k, &mut rng).unwrap();
        assert!(s.coords().iter().filter(|&&c| c > 0.0).count() <= k);
        for &c in s.coords() {
            let m = c * k as f64;
            assert!((m - m.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn sparsify_mean_is_unbiased() {
        let x = p(&[0.3, 0.7]);
        let mut rng = RngStream::new(8, 0);
        let reps = 100_000;
        let mut acc = [0.0; 2];
        for _ in 0..reps {
            let s = x.sparsify(5, &mut rng).unwrap();
            acc[0] += s.coords()[0];
            acc[1] += s.coords()[1];
        }
        for j in 0..2 {
            let m = acc[j] / reps as f64;
            assert!((m - x.coords()[j]).abs() <= 0.005, "coord {j}: {m}");
        }
    }

    #[test]
    fn mwu_zero_gradient_leaves_point_unchanged() {
        let mut w = LogWeights::<f64>::from_vec(vec![0.1, -0.3, 2.0]).unwrap();
        let before = w.to_point();
        w.descend(&[0.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(w.to_point(), before);
    }

    #[test]
    fn mwu_step_closed_form_softmax() {
        let w = LogWeights::<f64>::uniform(2);
        let next = w.stepped(&[-(2.0f64.ln()), 0.0]).unwrap();
        let x = next.to_point();
        assert!((x.coords()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((x.coords()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mwu_steps_add_in_log_domain() {
        let g1 = [0.3, -1.2, 0.7];
        let g2 = [-0.4, 0.25, 1.1];
        let mut a = LogWeights::<f64>::uniform(3);
        a.apply(&g1).unwrap();
        a.apply(&g2).unwrap();
        let sum: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| x + y).collect();
        let b = LogWeights::<f64>::uniform(3).stepped(&sum).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let (pa, pb) = (a.to_point(), b.to_point());
        for (x, y) in pa.coords().iter().zip(pb.coords()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn mwu_rejects_non_finite_and_bad_step() {
        let mut w = LogWeights::<f64>::uniform(2);
        assert!(matches!(w.apply(&[f64::NAN, 0.0]), Err(Error::Numeric(_))));
        assert!(matches!(w.descend(&[f64::INFINITY, 0.0], 0.1), Err(Error::Numeric(_))));
        assert!(w.descend(&[1.0, 0.0], 0.0).is_err());
        assert!(matches!(w.apply(&[1.0]), Err(Error::Shape(_))));
        assert!(LogWeights::<f64>::from_vec(vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn to_point_examples() {
        let u = LogWeights::<f64>::uniform(3).to_point();
        for &c in u.coords() {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
        let big = LogWeights::from_vec(vec![1000.0f64, 0.0]).unwrap().to_point();
        assert_eq!(big.coords()[0], 1.0);
        assert!(big.coords()[1] >= 0.0 && big.coords()[1] < 1e-300);
        let q = LogWeights::from_vec(vec![1.0f64.ln(), 3.0f64.ln()]).unwrap().to_point();
        assert!((q.coords()[0] - 0.25).abs() < 1e-15);
        assert!((q.coords()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn to_point_survives_wide_score_ranges() {
        let w = LogWeights::from_vec(vec![1e4f64, -1e4, 3.0, 1e4 - 1.0]).unwrap();
        let x = w.to_point();
        let s: f64 = x.coords().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(x.coords().iter().all(|c| c.is_finite() && *c >= 0.0));
    }

    #[test]
    fn running_average_examples() {
        let a = p(&[1.0, 0.0]);
        let b = p(&[0.0, 1.0]);
        assert_eq!(running_average(&a, &b, 1).unwrap(), b);
        assert_eq!(running_average(&a, &b, 2).unwrap(), p(&[0.5, 0.5]));
        assert!(matches!(running_average(&a, &b, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn f32_points_work() {
        let w = LogWeights::<f32>::from_vec(vec![0.0, 3.0f32.ln()]).unwrap();
        let x = w.to_point();
        assert!((x.coords()[1] - 0.75).abs() < 1e-6);
        let mut rng = RngStream::new(1, 2);
        let s = x.sparsify(10, &mut rng).unwrap();
        assert_eq!(s.dim(), 2);
    }
}
