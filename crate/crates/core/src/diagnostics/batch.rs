//! Streaming batch-means estimator with a bounded number of batches.

use serde::{Deserialize, Serialize};

/// Batches are merged pairwise whenever this many have accumulated, so a long run
/// keeps between MAX_BATCHES/2 and MAX_BATCHES of them.
const MAX_BATCHES: usize = 64;
/// Below this many batches no standard error is reported.
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeans {
    batch_size: usize,
    partial_sum: f64,
    partial_count: usize,
    batches: Vec<f64>,
    total: f64,
    count: usize,
}

impl Default for BatchMeans {
    fn default() -> Self {
        Self::new()
    }
}

impl BatchMeans {
    pub fn new() -> Self {
        Self { batch_size: 1, partial_sum: 0.0, partial_count: 0, batches: Vec::new(), total: 0.0, count: 0 }
    }

    pub fn push(&mut self, x: f64) {
        self.total += x;
        self.count += 1;
        self.partial_sum += x;
        self.partial_count += 1;
        if self.partial_count == self.batch_size {
            self.batches.push(self.partial_sum / self.batch_size as f64);
            self.partial_sum = 0.0;
            self.partial_count = 0;
            if self.batches.len() >= MAX_BATCHES {
                self.coarsen();
            }
        }
    }

    /// Doubles the batch size by averaging adjacent batches. An odd trailing batch
    /// goes back into the partial accumulator.
    fn coarsen(&mut self) {
        if self.batches.len() % 2 == 1 {
            let last = self.batches.pop().expect("odd length");
            self.partial_sum += last * self.batch_size as f64;
            self.partial_count += self.batch_size;
        }
        self.batches = self.batches.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        self.batch_size *= 2;
        // the partial accumulator may now hold a full batch
        if self.partial_count >= self.batch_size {
            self.batches.push(self.partial_sum / self.partial_count as f64);
            self.partial_sum = 0.0;
            self.partial_count = 0;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.total / self.count as f64
        }
    }

    /// sd(batch means)/√(#batches); NaN with fewer than MIN_BATCHES batches.
    pub fn std_error(&self) -> f64 {
        let k = self.batches.len();
        if k < MIN_BATCHES {
            return f64::NAN;
        }
        let m = self.batches.iter().sum::<f64>() / k as f64;
        let var = self.batches.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    }

    /// Pools another independent run: totals are added and the batch lists are
    /// concatenated after bringing both to a common batch size.
    pub fn merge(&mut self, other: &BatchMeans) {
        let mut other = other.clone();
        while self.batch_size < other.batch_size {
            self.coarsen_in_place();
        }
        while other.batch_size < self.batch_size {
            other.coarsen_in_place();
        }
        self.total += other.total;
        self.count += other.count;
        self.batches.extend_from_slice(&other.batches);
    }

    /// Like `coarsen`, but never re-batches the partial accumulator, which belongs
    /// to a different run after a merge.
    fn coarsen_in_place(&mut self) {
        if self.batches.len() % 2 == 1 {
            self.batches.pop();
        }
        self.batches = self.batches.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        self.batch_size *= 2;
    }
}
