use crate::error::{ensure, Result};
use crate::rng::RngStream;

/// Draws sample identifiers from a data distribution.
pub trait SampleSource: Send + Sync {
    fn draw(&self, rng: &mut RngStream) -> usize;

    fn draw_n(&self, n: usize, rng: &mut RngStream) -> Vec<usize> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// An ordered sample of identifiers with a consumed-prefix cursor.
///
/// Solvers take fresh batches off the front; samples are never handed out
/// twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<usize>,
    cursor: usize,
}

impl Dataset {
    pub fn new(samples: Vec<usize>) -> Self {
        Self { samples, cursor: 0 }
    }

    pub fn draw(source: &dyn SampleSource, n: usize, rng: &mut RngStream) -> Self {
        Self::new(source.draw_n(n, rng))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn consumed(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.samples.len() - self.cursor
    }

    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    /// Takes the next `k` unconsumed samples.
    pub fn take(&mut self, k: usize) -> Result<&[usize]> {
        ensure!(
            k <= self.remaining(),
            Dataset,
            "requested {k} fresh samples but only {} of {} remain",
            self.remaining(),
            self.samples.len()
        );
        let start = self.cursor;
        self.cursor += k;
        debug_assert!(self.cursor <= self.samples.len());
        Ok(&self.samples[start..self.cursor])
    }

    /// Splits the unconsumed samples into `parts` equal contiguous shards.
    /// The remainder is dropped.
    pub fn split_equal(&self, parts: usize) -> Result<Vec<Dataset>> {
        ensure!(parts >= 1, InvalidParameter, "cannot split into zero parts");
        let rest = &self.samples[self.cursor..];
        let size = rest.len() / parts;
        ensure!(
            size >= 1,
            Dataset,
            "{} samples cannot fill {parts} shards",
            rest.len()
        );
        Ok(rest
            .chunks_exact(size)
            .take(parts)
            .map(|c| Dataset::new(c.to_vec()))
            .collect())
    }

    /// Copy with sample `index` replaced, for neighbouring-dataset tests.
    pub fn with_replaced(&self, index: usize, sample: usize) -> Self {
        let mut samples = self.samples.clone();
        samples[index] = sample;
        Self { samples, cursor: self.cursor }
    }
}
