//! Monte Carlo accumulation with a fixed reduction order.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples per work unit. Fixed so the reduction tree does not depend on the
/// number of worker threads.
pub const CHUNK: usize = 1024;

/// Running count / mean / sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(self, other: Accumulator) -> Accumulator {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.count as f64 / count as f64);
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Accumulator { count, mean, m2 }
    }

    pub fn estimate(&self) -> Estimate {
        let std_error = if self.count > 1 {
            (self.m2.max(0.0) / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            std_error,
            count: self.count,
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub count: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
            count: 0,
        }
    }
}

/// Pairwise tree reduction; the tree shape depends only on `parts.len()`.
pub fn pairwise<T: Clone>(parts: &[T], merge: &impl Fn(T, T) -> T) -> Option<T> {
    match parts.len() {
        0 => None,
        1 => Some(parts[0].clone()),
        len => {
            let (left, right) = parts.split_at(len / 2);
            let l = pairwise(left, merge)?;
            let r = pairwise(right, merge)?;
            Some(merge(l, r))
        }
    }
}

/// Runs `work` over `0..count` in chunks of [`CHUNK`] on the current rayon
/// pool and reduces the per-chunk results pairwise in index order.
pub fn chunked<T, F>(count: usize, work: F, merge: impl Fn(T, T) -> T) -> Option<T>
where
    T: Clone + Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| work(c * CHUNK..((c + 1) * CHUNK).min(count)))
        .collect();
    pairwise(&parts, &merge)
}

/// Mean and standard error of `sample(i)` over `i in 0..count`.
pub fn mc_mean<F>(count: usize, sample: F) -> Estimate
where
    F: Fn(usize) -> f64 + Sync,
{
    chunked(
        count,
        |range| {
            let mut acc = Accumulator::default();
            for i in range {
                acc.push(sample(i));
            }
            acc
        },
        Accumulator::merge,
    )
    .unwrap_or_default()
    .estimate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_give_exact_mean_and_zero_error() {
        let e = mc_mean(10_000, |_| 1.0);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.count, 10_000);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut one = Accumulator::default();
        xs.iter().for_each(|&x| one.push(x));
        let merged = mc_mean(xs.len(), |i| xs[i]);
        assert!((one.mean - merged.value).abs() < 1e-12);
        assert!((one.estimate().std_error - merged.std_error).abs() < 1e-12);
    }

    #[test]
    fn result_is_independent_of_pool_size() {
        let f = |i: usize| ((i as f64) * 0.618).sin();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_mean(100_003, f));
        let b = four.install(|| mc_mean(100_003, f));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
