use serde::{Deserialize, Serialize};

use super::lsq::{levenberg_marquardt, LmOptions};
use super::{param, FitReport};
use crate::device::{DeviceParams, SwitchingLaw};
use crate::{Error, Result, Scalar};

/// Mean dwell time measured at one current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TauPoint<T> {
    pub current: T,
    pub mean: T,
    pub stderr: T,
}

/// Held-fixed constants of the dwell-time fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TauFitOptions<T> {
    /// Reference attempt time. With `alpha = 1` the law is a pure exponential
    /// in current, so `tau0`, `delta` and `i_c` cannot all be identified and
    /// `tau0` is pinned.
    pub tau0: T,
    pub alpha: T,
}

impl<T: Scalar> Default for TauFitOptions<T> {
    fn default() -> Self {
        let d = DeviceParams::<T>::default();
        Self { tau0: d.tau0, alpha: d.alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TauFit<T> {
    pub law: SwitchingLaw<T>,
    /// Parameters `tau0` (fixed, zero uncertainty), `delta`, `i_c`.
    pub report: FitReport<T>,
}

/// Weighted least-squares fit of `tau(I) = tau0 exp[delta (1 + I/i_c)^alpha]`
/// to measured means. Residuals are taken in log space,
/// `(ln mean - ln tau(I)) / (stderr / mean)`.
pub fn fit_tau_vs_current<T: Scalar>(points: &[TauPoint<T>], options: TauFitOptions<T>) -> Result<TauFit<T>> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("need at least 4 currents, got {}", points.len())));
    }
    for p in points {
        if !(p.mean > T::zero() && p.stderr > T::zero()) || !p.mean.is_finite() || !p.stderr.is_finite() {
            return Err(Error::InsufficientData(format!("point at {} uA needs a positive mean and stderr", p.current)));
        }
    }
    let ln_tau0 = options.tau0.ln();
    let y: Vec<T> = points.iter().map(|p| p.mean.ln() - ln_tau0).collect();
    let sigma: Vec<T> = points.iter().map(|p| p.stderr / p.mean).collect();
    let x: Vec<T> = points.iter().map(|p| p.current).collect();

    // weighted line y = a + b I gives delta = a, i_c = a / b for alpha = 1
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for k in 0..points.len() {
        let w = (sigma[k] * sigma[k]).recip();
        sw = sw + w;
        sx = sx + w * x[k];
        sy = sy + w * y[k];
        sxx = sxx + w * x[k] * x[k];
        sxy = sxy + w * x[k] * y[k];
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > T::epsilon() * sw * sxx) {
        return Err(Error::InsufficientData("currents must not all coincide".into()));
    }
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    if b == T::zero() {
        return Err(Error::FitFailed { iterations: 0, chi_squared: f64::NAN, reason: "no current dependence in the data".into() });
    }

    let alpha = options.alpha;
    let n = points.len();
    let fit = levenberg_marquardt(n, vec![a, a / b], LmOptions::default(), |p, r, jac| {
        let (delta, i_c) = (p[0], p[1]);
        if i_c == T::zero() {
            return false;
        }
        for k in 0..n {
            let base = T::one() + x[k] / i_c;
            if alpha != T::one() && base <= T::zero() {
                return false;
            }
            let pow = base.powf(alpha);
            r[k] = (y[k] - delta * pow) / sigma[k];
            jac[k][0] = -pow / sigma[k];
            // d/di_c of delta base^alpha = -delta alpha base^(alpha-1) x / i_c^2
            jac[k][1] = delta * alpha * base.powf(alpha - T::one()) * x[k] / (i_c * i_c) / sigma[k];
        }
        true
    })?;
    let law = SwitchingLaw { tau0: options.tau0, delta: fit.params[0], i_c: fit.params[1], alpha };
    let n_dof = n - 2;
    let report = FitReport {
        parameters: vec![
            param("tau0", options.tau0, T::zero()),
            param("delta", fit.params[0], fit.covariance[0][0].sqrt()),
            param("i_c", fit.params[1], fit.covariance[1][1].sqrt()),
        ],
        reduced_chi_squared: Some(fit.chi_squared / T::from_usize_lossy(n_dof)),
        n_points: n,
        n_dof,
        n_samples: n,
    };
    Ok(TauFit { law, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal, trial_stream};

    fn synthetic(law: &SwitchingLaw<f64>, currents: &[f64], noise: f64, seed: u64) -> Vec<TauPoint<f64>> {
        let mut rng = trial_stream(seed, 0, 0);
        currents
            .iter()
            .map(|&i| {
                let tau = law.mean_dwell(i).unwrap();
                let z: f64 = standard_normal(&mut rng);
                TauPoint { current: i, mean: tau * (1.0 + noise * z), stderr: tau * noise }
            })
            .collect()
    }

    fn rms_log_error(fit: &SwitchingLaw<f64>, truth: &SwitchingLaw<f64>, currents: &[f64]) -> f64 {
        let s: f64 = currents.iter().map(|&i| (fit.mean_dwell(i).unwrap().ln() - truth.mean_dwell(i).unwrap().ln()).powi(2)).sum();
        (s / currents.len() as f64).sqrt()
    }

    #[test]
    fn recovers_the_curve() {
        let truth = DeviceParams::<f64>::default().p_law();
        let currents: Vec<f64> = (0..8).map(|k| 650.0 + 100.0 * k as f64).collect();
        for seed in 0..10 {
            let pts = synthetic(&truth, &currents, 0.01, seed);
            let fit = fit_tau_vs_current(&pts, TauFitOptions::default()).unwrap();
            let rms = rms_log_error(&fit.law, &truth, &currents);
            assert!(rms < 0.03, "seed {seed}: {rms}");
            assert_eq!(fit.report.n_dof, 6);
        }
    }

    #[test]
    fn wrong_tau0_still_fits_the_curve() {
        let truth = SwitchingLaw { tau0: 3e-10, delta: 21.0, i_c: -2500.0, alpha: 1.0 };
        let currents: Vec<f64> = (0..6).map(|k| 800.0 + 50.0 * k as f64).collect();
        let pts = synthetic(&truth, &currents, 0.01, 3);
        let fit = fit_tau_vs_current(&pts, TauFitOptions::default()).unwrap();
        assert!(rms_log_error(&fit.law, &truth, &currents) < 0.03);
        assert!(fit.report.reduced_chi_squared.unwrap() < 4.0);
    }

    #[test]
    fn non_unit_alpha_recovers_the_curve() {
        let truth = SwitchingLaw { tau0: 1e-9, delta: 20.0, i_c: -3000.0, alpha: 1.5 };
        let currents: Vec<f64> = (0..8).map(|k| 650.0 + 100.0 * k as f64).collect();
        let pts = synthetic(&truth, &currents, 0.01, 4);
        let fit = fit_tau_vs_current(&pts, TauFitOptions { tau0: 1e-9, alpha: 1.5 }).unwrap();
        assert!(rms_log_error(&fit.law, &truth, &currents) < 0.03);
        assert!((fit.law.delta - 20.0).abs() < 5.0 * fit.report.uncertainty("delta"));
    }

    #[test]
    fn underdetermined_input_is_an_error() {
        let truth = DeviceParams::<f64>::default().p_law();
        let pts = synthetic(&truth, &[900.0, 1000.0], 0.01, 0);
        assert!(fit_tau_vs_current(&pts, TauFitOptions::default()).is_err());
        let same = synthetic(&truth, &[900.0; 5], 0.01, 0);
        assert!(fit_tau_vs_current(&same, TauFitOptions::default()).is_err());
    }

    #[test]
    fn excess_scatter_inflates_chi_squared() {
        let truth = DeviceParams::<f64>::default().p_law();
        let currents: Vec<f64> = (0..8).map(|k| 650.0 + 100.0 * k as f64).collect();
        // 10 % true scatter with 1 % claimed errors
        let mut pts = synthetic(&truth, &currents, 0.10, 5);
        for p in &mut pts {
            p.stderr = p.mean * 0.01;
        }
        let fit = fit_tau_vs_current(&pts, TauFitOptions::default()).unwrap();
        assert!(fit.report.reduced_chi_squared.unwrap() > 10.0);
    }
}
