use crate::error::{ensure, Result};
use crate::rng::RngStream;

/// Truncated geometric law on `{0, ..., M}` with `P[N = k] = p^k / C_M`.
///
/// `C_M = sum_{k=0}^{M} p^k`, so for `p = 1/2` it lies in `[1, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncGeom {
    p: f64,
    m: u32,
    c_m: f64,
    cdf: Vec<f64>,
}

impl TruncGeom {
    pub fn new(p: f64, m: u32) -> Result<Self> {
        ensure!(p > 0.0 && p < 1.0, InvalidParameter, "p must lie in (0,1), got {p}");
        ensure!(m <= 62, InvalidParameter, "truncation level {m} is too large");
        let weights: Vec<f64> = (0..=m).map(|k| p.powi(k as i32)).collect();
        let c_m: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / c_m;
                acc
            })
            .collect();
        Ok(Self { p, m, c_m, cdf })
    }

    pub fn half(m: u32) -> Self {
        Self::new(0.5, m).expect("valid parameters")
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    pub fn pmf(&self, k: u32) -> f64 {
        if k > self.m {
            0.0
        } else {
            self.p.powi(k as i32) / self.c_m
        }
    }

    /// `E[2^N]`; equals `(M + 1) / C_M` when `p = 1/2`.
    pub fn mean_pow2(&self) -> f64 {
        (0..=self.m).map(|k| self.pmf(k) * 2f64.powi(k as i32)).sum()
    }

    pub fn sample(&self, rng: &mut RngStream) -> u32 {
        let u = rng.uniform_open() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c < u).min(self.m as usize) as u32
    }
}
