use serde::{Deserialize, Serialize};

use super::{mean, sample_sd};
use crate::device::{MagState, TelegraphTrace};
use crate::{Error, Result, Scalar};

pub const MIN_EVENTS_PER_BIN: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DriftReport<T> {
    pub bin_means: Vec<T>,
    pub bin_standard_errors: Vec<T>,
    pub events_per_bin: usize,
    pub mean_of_standard_errors: T,
    /// Standard deviation of the bin means.
    pub spread_of_means: T,
    /// `spread_of_means / mean_of_standard_errors`; near one for a
    /// stationary process.
    pub ratio: T,
}

/// Splits a dwell stream into `n_bins` successive equal-count windows and
/// compares the scatter of their means to their standard errors. A trailing
/// remainder shorter than one bin is dropped.
pub fn drift_analysis<T: Scalar>(dwells: &[T], n_bins: usize) -> Result<DriftReport<T>> {
    if n_bins < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 bins, got {n_bins}")));
    }
    let per_bin = dwells.len() / n_bins;
    if per_bin < MIN_EVENTS_PER_BIN {
        return Err(Error::InsufficientData(format!(
            "{} events over {n_bins} bins leaves {per_bin} per bin, need {MIN_EVENTS_PER_BIN}",
            dwells.len()
        )));
    }
    let root_n = T::from_usize_lossy(per_bin).sqrt();
    let (bin_means, bin_standard_errors): (Vec<T>, Vec<T>) =
        dwells.chunks_exact(per_bin).take(n_bins).map(|bin| (mean(bin), sample_sd(bin) / root_n)).unzip();
    let mean_of_standard_errors = mean(&bin_standard_errors);
    let spread_of_means = sample_sd(&bin_means);
    Ok(DriftReport {
        ratio: spread_of_means / mean_of_standard_errors,
        bin_means,
        bin_standard_errors,
        events_per_bin: per_bin,
        mean_of_standard_errors,
        spread_of_means,
    })
}

/// [`drift_analysis`] over the completed AP dwells of a trace, in time
/// order.
pub fn drift_analysis_trace<T: Scalar>(trace: &TelegraphTrace<T>, n_bins: usize) -> Result<DriftReport<T>> {
    drift_analysis(&trace.dwells_in(MagState::AP, true), n_bins)
}
