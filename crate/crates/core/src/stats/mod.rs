//! Analysis pipeline: exponential and CDF fits, histograms with counting
//! errors, Kolmogorov-Smirnov and chi-squared tests, the dwell-time versus
//! current fit, and drift detection.

mod cdf;
mod chisq;
mod drift;
mod exponential;
mod histogram;
mod ks;
mod lsq;
mod tau_fit;

use serde::{Deserialize, Serialize};

use crate::Scalar;

pub use cdf::{empirical_cdf, fit_cdf, EmpiricalCdf};
pub use chisq::{chi_squared_gof, chi_squared_homogeneity, ChiSquaredTest};
pub use drift::{drift_analysis, drift_analysis_trace, DriftReport, MIN_EVENTS_PER_BIN};
pub use exponential::{fit_exponential, fit_exponential_with_bins, DEFAULT_HISTOGRAM_BINS, MIN_SAMPLES};
pub use histogram::{histogram_counting_errors, Histogram, HistogramBin, HISTOGRAM_QUANTILE};
pub use ks::{kolmogorov_survival, ks_statistic, ks_test, KsTest};
pub use lsq::{levenberg_marquardt, LeastSquares, LmOptions};
pub use tau_fit::{fit_tau_vs_current, TauFit, TauFitOptions, TauPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Parameter<T> {
    pub name: String,
    pub value: T,
    /// One standard deviation.
    pub uncertainty: T,
}

/// Fitted parameters with their uncertainties and the goodness of fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitReport<T> {
    pub parameters: Vec<Parameter<T>>,
    /// `chi^2 / n_dof`; absent when the fit has no usable weighted residuals.
    pub reduced_chi_squared: Option<T>,
    pub n_points: usize,
    pub n_dof: usize,
    pub n_samples: usize,
}

impl<T: Scalar> FitReport<T> {
    pub fn get(&self, name: &str) -> Option<&Parameter<T>> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of parameter `name`; panics if the report does not carry it.
    pub fn value(&self, name: &str) -> T {
        self.get(name).unwrap_or_else(|| panic!("fit report has no parameter `{name}`")).value
    }

    pub fn uncertainty(&self, name: &str) -> T {
        self.get(name).unwrap_or_else(|| panic!("fit report has no parameter `{name}`")).uncertainty
    }
}

pub(crate) fn param<T: Scalar>(name: &str, value: T, uncertainty: T) -> Parameter<T> {
    Parameter { name: name.to_string(), value, uncertainty }
}

pub(crate) fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / T::from_usize_lossy(xs.len())
}

/// Sample standard deviation with the `n - 1` denominator.
pub(crate) fn sample_sd<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m));
    (ss / T::from_usize_lossy(xs.len() - 1)).sqrt()
}
