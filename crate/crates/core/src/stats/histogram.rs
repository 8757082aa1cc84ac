use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Upper edge of the histogram domain, as a sample quantile.
pub const HISTOGRAM_QUANTILE: f64 = 0.99;

/// Uniform bins over `[0, cut]`, where `cut` is the 0.99 sample quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Histogram<T> {
    pub upper: T,
    pub width: T,
    pub counts: Vec<u64>,
    /// Samples outside `[0, upper]`.
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HistogramBin<T> {
    pub bin_center_s: T,
    pub count: u64,
    pub error: T,
}

impl<T: Scalar> Histogram<T> {
    pub fn center(&self, k: usize) -> T {
        self.width * (T::from_usize_lossy(k) + T::lit(0.5))
    }

    /// Counting error `sqrt(count)`, floored at one count so empty bins keep
    /// a finite weight.
    pub fn error(&self, k: usize) -> T {
        T::from_u64(self.counts[k]).unwrap().sqrt().max(T::one())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bins(&self) -> Vec<HistogramBin<T>> {
        (0..self.counts.len()).map(|k| HistogramBin { bin_center_s: self.center(k), count: self.counts[k], error: self.error(k) }).collect()
    }
}

/// Histogram of non-negative samples with `n_bins` uniform bins up to the
/// 0.99 quantile (nearest-rank). The quantile sample itself lands in the
/// last bin.
pub fn histogram_counting_errors<T: Scalar>(samples: &[T], n_bins: usize) -> Result<Histogram<T>> {
    if n_bins < 2 {
        return Err(Error::param("n_bins", "need at least two bins"));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    let rank = ((HISTOGRAM_QUANTILE * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    let upper = sorted[rank - 1];
    if !(upper > T::zero()) {
        return Err(Error::InsufficientData("0.99 quantile is not positive".into()));
    }
    let width = upper / T::from_usize_lossy(n_bins);
    let mut counts = vec![0u64; n_bins];
    let mut excluded = 0;
    for &x in samples {
        if x < T::zero() || x > upper {
            excluded += 1;
            continue;
        }
        let k = (x / width).floor().to_usize().unwrap_or(n_bins - 1).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { upper, width, counts, excluded })
}
