//! Batch-means estimates.

use crate::linalg::{CMatrix, C64};

/// A Monte-Carlo mean with its batch-means standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate<T, E = f64> {
    pub mean: T,
    pub std_error: E,
    pub count: usize,
}

/// Matrix mean with a per-entry (row-major) standard error.
pub type MatrixEstimate = MomentEstimate<CMatrix, Vec<f64>>;
pub type ComplexEstimate = MomentEstimate<C64>;
pub type RealEstimate = MomentEstimate<f64>;

impl RealEstimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std_error: 0.0, count: 1 }
    }
}

impl ComplexEstimate {
    pub fn exact(value: C64) -> Self {
        Self { mean: value, std_error: 0.0, count: 1 }
    }

    pub fn norm(&self) -> f64 {
        self.mean.norm()
    }
}

impl MatrixEstimate {
    pub fn max_std_error(&self) -> f64 {
        self.std_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Running per-batch sums of a fixed-length real feature vector.
#[derive(Debug, Clone)]
pub(crate) struct Batch {
    pub count: usize,
    pub sums: Vec<f64>,
}

impl Batch {
    pub fn new(features: usize) -> Self {
        Self { count: 0, sums: vec![0.0; features] }
    }

    pub fn push(&mut self, features: &[f64]) {
        debug_assert_eq!(features.len(), self.sums.len());
        self.count += 1;
        for (s, f) in self.sums.iter_mut().zip(features) {
            *s += f;
        }
    }
}

/// Overall mean and batch-means standard error of each feature.
///
/// With `B` batches of means `x_b`, the error is
/// `sqrt(sum (x_b - mean)^2 / (B (B - 1)))`; it is zero for a single batch.
pub(crate) fn batch_statistics(batches: &[Batch]) -> (Vec<f64>, Vec<f64>, usize) {
    let batches: Vec<&Batch> = batches.iter().filter(|b| b.count > 0).collect();
    let features = batches.first().map_or(0, |b| b.sums.len());
    let total: usize = batches.iter().map(|b| b.count).sum();
    let mut mean = vec![0.0; features];
    for b in &batches {
        for (m, s) in mean.iter_mut().zip(&b.sums) {
            *m += s;
        }
    }
    for m in &mut mean {
        *m /= total.max(1) as f64;
    }
    let nb = batches.len();
    let mut se = vec![0.0; features];
    if nb >= 2 {
        for b in &batches {
            for ((e, s), m) in se.iter_mut().zip(&b.sums).zip(&mean) {
                let d = s / b.count as f64 - m;
                *e += d * d;
            }
        }
        for e in &mut se {
            *e = (*e / (nb * (nb - 1)) as f64).sqrt();
        }
    }
    (mean, se, total)
}

/// Splits `total` items into `batches` contiguous ranges of near-equal size.
pub(crate) fn batch_ranges(total: usize, batches: usize) -> Vec<std::ops::Range<usize>> {
    let nb = batches.clamp(1, total.max(1));
    (0..nb)
        .map(|b| (b * total / nb)..((b + 1) * total / nb))
        .collect()
}

pub(crate) fn push_complex(out: &mut Vec<f64>, v: C64) {
    out.push(v.re);
    out.push(v.im);
}

pub(crate) fn complex_at(mean: &[f64], se: &[f64], idx: usize, count: usize) -> ComplexEstimate {
    ComplexEstimate {
        mean: C64::new(mean[idx], mean[idx + 1]),
        std_error: se[idx].hypot(se[idx + 1]),
        count,
    }
}

pub(crate) fn matrix_at(mean: &[f64], se: &[f64], start: usize, dim: usize, count: usize) -> MatrixEstimate {
    let mut errors = Vec::with_capacity(dim * dim);
    let m = CMatrix::from_fn(dim, |j, k| {
        let idx = start + 2 * (j * dim + k);
        errors.push(se[idx].hypot(se[idx + 1]));
        C64::new(mean[idx], mean[idx + 1])
    });
    MatrixEstimate { mean: m, std_error: errors, count }
}
