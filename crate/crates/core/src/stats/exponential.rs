use super::histogram::{histogram_counting_errors, Histogram};
use super::lsq::{levenberg_marquardt, LmOptions};
use super::{mean, param, FitReport};
use crate::{Error, Result, Scalar};

pub const MIN_SAMPLES: usize = 10;
pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

/// Exponential fit of positive delay samples with the default bin count.
pub fn fit_exponential<T: Scalar>(samples: &[T]) -> Result<FitReport<T>> {
    fit_exponential_with_bins(samples, DEFAULT_HISTOGRAM_BINS)
}

/// Maximum-likelihood rate `1 / mean` (standard error `rate / sqrt(N)`),
/// plus a straight-line fit on the log-scale histogram: bin counts are fit
/// to `A exp(-r t)` with counting errors, and its reduced chi^2 is reported.
///
/// Report parameters: `rate`, `mean`, `histogram_rate`, `histogram_amplitude`.
pub fn fit_exponential_with_bins<T: Scalar>(samples: &[T], n_bins: usize) -> Result<FitReport<T>> {
    validate_samples(samples)?;
    let n = T::from_usize_lossy(samples.len());
    let m = mean(samples);
    let rate = m.recip();
    let mut parameters = vec![param("rate", rate, rate / n.sqrt()), param("mean", m, m / n.sqrt())];

    let hist = histogram_counting_errors(samples, n_bins)?;
    let line = fit_histogram_line(&hist);
    let reduced = line.as_ref().map(|(a, r, a_se, r_se, chi2)| {
        parameters.push(param("histogram_rate", *r, *r_se));
        parameters.push(param("histogram_amplitude", *a, *a_se));
        *chi2 / T::from_usize_lossy(n_bins - 2)
    });
    Ok(FitReport { parameters, reduced_chi_squared: reduced, n_points: n_bins, n_dof: n_bins - 2, n_samples: samples.len() })
}

pub(crate) fn validate_samples<T: Scalar>(samples: &[T]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!("need at least {MIN_SAMPLES} samples, got {}", samples.len())));
    }
    if let Some((index, v)) = samples.iter().enumerate().find(|(_, v)| !(**v > T::zero()) || !v.is_finite()) {
        return Err(Error::NonPositiveSample { index, value: v.as_f64() });
    }
    Ok(())
}

/// Returns `(amplitude, rate, amplitude_se, rate_se, chi2)`, or `None` if
/// fewer than two bins are populated.
fn fit_histogram_line<T: Scalar>(hist: &Histogram<T>) -> Option<(T, T, T, T, T)> {
    let k = hist.counts.len();
    let centers: Vec<T> = (0..k).map(|i| hist.center(i)).collect();
    let counts: Vec<T> = hist.counts.iter().map(|&c| T::from_u64(c).unwrap()).collect();
    let sigmas: Vec<T> = (0..k).map(|i| hist.error(i)).collect();

    // weighted log-linear start on the populated bins
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let mut populated = 0;
    for i in 0..k {
        if counts[i] > T::zero() {
            let (x, y, w) = (centers[i], counts[i].ln(), counts[i]);
            sw = sw + w;
            sx = sx + w * x;
            sy = sy + w * y;
            sxx = sxx + w * x * x;
            sxy = sxy + w * x * y;
            populated += 1;
        }
    }
    if populated < 2 {
        return None;
    }
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;

    // log-amplitude keeps the amplitude positive; the rate is scaled by the
    // bin width so both parameters are order one
    let width = hist.width;
    let fit = levenberg_marquardt(k, vec![intercept, -slope * width], LmOptions::default(), |p, r, jac| {
        for i in 0..k {
            let u = centers[i] / width;
            let model = (p[0] - p[1] * u).exp();
            if !model.is_finite() {
                return false;
            }
            r[i] = (counts[i] - model) / sigmas[i];
            jac[i][0] = -model / sigmas[i];
            jac[i][1] = u * model / sigmas[i];
        }
        true
    })
    .ok()?;
    let amplitude = fit.params[0].exp();
    let rate = fit.params[1] / width;
    let amplitude_se = amplitude * fit.covariance[0][0].sqrt();
    let rate_se = fit.covariance[1][1].sqrt() / width;
    Some((amplitude, rate, amplitude_se, rate_se, fit.chi_squared))
}
