use serde::Serialize;

/// Smooth test functions with known constants on the simplex, all with
/// respect to `l1` on inputs and `l_inf` on gradients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TestFunction {
    /// `sum x_j^2`. Gradient `2 x`: `L0 = 2`, `L1 = 2`. Partials are linear,
    /// so `L2 = 0`.
    Quadratic,
    /// `sum x_j^3`. Gradient `3 x_j^2 <= 3`, Hessian `diag(6 x_j)` with
    /// entries at most 6, and `grad(d_j F) = 6 x_j e_j` moves by at most
    /// `6 |x_j - x'_j|`: `L0 = 3`, `L1 = 6`, `L2 = 6`.
    Cubic,
    /// `(1/s) ln sum exp(s x_j)`. Gradient `p = softmax(s x)`, so `L0 = 1`.
    /// Hessian `s (diag p - p p^T)` has entries at most `s/4`: `L1 = s/4`.
    /// Third derivatives are `s^2 [p_i (d_ik - p_k)(d_ij - p_j) -
    /// p_i p_j (d_jk - p_k)]`, each term at most `1/4` in magnitude:
    /// `L2 = s^2 / 2`.
    LogSumExp { s: f64 },
}

impl TestFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Quadratic => x.iter().map(|v| v * v).sum(),
            Self::Cubic => x.iter().map(|v| v * v * v).sum(),
            Self::LogSumExp { s } => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let t: f64 = x.iter().map(|v| (s * (v - m)).exp()).sum();
                m + t.ln() / s
            }
        }
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Self::Quadratic => out.iter_mut().zip(x).for_each(|(o, v)| *o = 2.0 * v),
            Self::Cubic => out.iter_mut().zip(x).for_each(|(o, v)| *o = 3.0 * v * v),
            Self::LogSumExp { s } => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut t = 0.0;
                for (o, v) in out.iter_mut().zip(x) {
                    *o = (s * (v - m)).exp();
                    t += *o;
                }
                out.iter_mut().for_each(|o| *o /= t);
            }
        }
    }

    /// `(L0, L1, L2)`.
    pub fn constants(&self) -> (f64, f64, f64) {
        match *self {
            Self::Quadratic => (2.0, 2.0, 0.0),
            Self::Cubic => (3.0, 6.0, 6.0),
            Self::LogSumExp { s } => (1.0, s / 4.0, s * s / 2.0),
        }
    }
}
