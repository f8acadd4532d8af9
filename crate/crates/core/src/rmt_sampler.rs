//! Haar-random `SO(2N)` matrices and Monte-Carlo estimates of `det(U − I)`.
//!
//! A Gaussian matrix is orthonormalized by QR with the diagonal of `R` made
//! positive, which yields a Haar-distributed element of `O(2N)`. Elements of
//! the `det = −1` coset are moved onto `SO(2N)` by flipping the last column.
//!
//! Every sample `i` draws from its own ChaCha stream `(seed, i)`, so results
//! depend only on the seed and the sample index, never on scheduling.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("N must be at least 1")]
    InvalidDimension,
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("histogram edges must be strictly increasing and at least two")]
    BadEdges,
    #[error("no samples")]
    Empty,
}

pub type Result<T> = std::result::Result<T, SamplerError>;

/// One Monte-Carlo draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalSample {
    pub n: u32,
    pub seed: u64,
    pub index: u64,
    pub value: f64,
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-random element of `SO(2n)` for stream `(seed, index)`.
pub fn sample_so2n_indexed(n: u32, seed: u64, index: u64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(SamplerError::InvalidDimension);
    }
    let dim = 2 * n as usize;
    let mut rng = stream(seed, index);
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.clone().lu().determinant() < 0.0 {
        q.column_mut(dim - 1).neg_mut();
    }
    Ok(q)
}

/// Haar-random element of `SO(2n)`; same seed, same matrix.
pub fn sample_so2n(n: u32, seed: u64) -> Result<DMatrix<f64>> {
    sample_so2n_indexed(n, seed, 0)
}

/// `det(U − I)` by LU factorization.
pub fn char_poly_at_one(u: &DMatrix<f64>) -> f64 {
    let shifted = u - DMatrix::identity(u.nrows(), u.ncols());
    shifted.lu().determinant()
}

/// `det(U − I)` for samples `0..count` of the given seed, in index order.
pub fn sample_values(n: u32, count: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SamplerError::InvalidDimension);
    }
    (0..count as u64).into_par_iter().map(|i| sample_so2n_indexed(n, seed, i).map(|u| char_poly_at_one(&u))).collect()
}

/// Sample mean of `value^k` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub standard_error: f64,
    /// `value^k` has infinite variance for `k ≤ −1/4`.
    pub heavy_tail: bool,
}

pub const MIN_MOMENT_SAMPLES: usize = 100;

pub fn empirical_moment(n: u32, k: f64, count: usize, seed: u64) -> Result<MomentEstimate> {
    if count < MIN_MOMENT_SAMPLES {
        return Err(SamplerError::TooFewSamples { min: MIN_MOMENT_SAMPLES, got: count });
    }
    let values = sample_values(n, count, seed)?;
    Ok(moment_of_values(&values, k))
}

/// Mean and standard error of `v^k` over `values` (negative round-off is clamped to 0).
pub fn moment_of_values(values: &[f64], k: f64) -> MomentEstimate {
    let len = values.len() as f64;
    let powered: Vec<f64> = values.iter().map(|&v| if k == 0.0 { 1.0 } else { v.max(0.0).powf(k) }).collect();
    let mean = powered.iter().sum::<f64>() / len;
    let var = powered.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>() / (len - 1.0).max(1.0);
    MomentEstimate { mean, standard_error: (var / len).sqrt(), heavy_tail: k <= -0.25 }
}

/// Histogram over fixed bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// All samples, including those outside the edges.
    pub total: u64,
}

impl Histogram {
    pub fn new(values: &[f64], edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SamplerError::BadEdges);
        }
        if values.is_empty() {
            return Err(SamplerError::Empty);
        }
        let mut counts = vec![0u64; edges.len() - 1];
        for &v in values {
            // bins are [lo, hi)
            let idx = edges.partition_point(|&e| e <= v);
            if idx >= 1 && idx < edges.len() {
                counts[idx - 1] += 1;
            }
        }
        Ok(Self { edges: edges.to_vec(), counts, total: values.len() as u64 })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Count per unit length divided by the sample size.
    pub fn densities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / (self.total as f64 * (self.edges[i + 1] - self.edges[i])))
            .collect()
    }

    /// Largest bin deviation in units of the multinomial standard deviation,
    /// over bins whose expected count is at least `min_expected`.
    /// `probs[i]` is the model probability of bin `i`.
    pub fn max_sigma_deviation(&self, probs: &[f64], min_expected: f64) -> f64 {
        let n = self.total as f64;
        self.counts
            .iter()
            .zip(probs)
            .filter(|(_, &p)| n * p >= min_expected)
            .map(|(&c, &p)| (c as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Normalized histogram of `count` samples of `det(U − I)` on `edges`.
pub fn empirical_density(n: u32, count: usize, edges: &[f64], seed: u64) -> Result<Histogram> {
    if count == 0 {
        return Err(SamplerError::Empty);
    }
    Histogram::new(&sample_values(n, count, seed)?, edges)
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &v)| {
        let f = cdf(v);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 1% critical value of the KS statistic for effective size `n`.
pub fn ks_critical_1pct(n: f64) -> f64 {
    1.628 / n.sqrt()
}
