use serde::{Deserialize, Serialize};

use super::exponential::validate_samples;
use super::lsq::{levenberg_marquardt, LmOptions};
use super::{mean, param, FitReport};
use crate::{Result, Scalar};

/// Right-continuous step CDF of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmpiricalCdf<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= t`.
    pub fn eval(&self, t: T) -> T {
        let k = self.sorted.partition_point(|&x| x <= t);
        T::from_usize_lossy(k) / T::from_usize_lossy(self.sorted.len())
    }

    /// `(sample, F)` at each jump.
    pub fn points(&self) -> Vec<(T, T)> {
        let n = T::from_usize_lossy(self.sorted.len());
        self.sorted.iter().enumerate().map(|(i, &x)| (x, T::from_usize_lossy(i + 1) / n)).collect()
    }
}

pub fn empirical_cdf<T: Scalar>(samples: &[T]) -> EmpiricalCdf<T> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    EmpiricalCdf { sorted }
}

/// Least-squares fit of `F(t) = 1 - exp(-rate t)` to the empirical CDF at
/// the plotting positions `(i + 1/2) / n`.
///
/// The residuals of an empirical CDF are correlated (a Brownian bridge), so
/// the rate uncertainty is the linearized estimator variance under that
/// covariance rather than the naive least-squares one. The reduced chi^2
/// uses binomial point errors `sqrt(F (1 - F) / n)` and is descriptive only.
pub fn fit_cdf<T: Scalar>(samples: &[T]) -> Result<FitReport<T>> {
    validate_samples(samples)?;
    let cdf = empirical_cdf(samples);
    let n = cdf.len();
    let nf = T::from_usize_lossy(n);
    let positions: Vec<T> = (0..n).map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) / nf).collect();
    let scale = mean(samples).recip();
    let xs: Vec<T> = cdf.sorted.iter().map(|&t| t * scale).collect();

    let fit = levenberg_marquardt(n, vec![T::one()], LmOptions::default(), |p, r, jac| {
        if !(p[0] > T::zero()) {
            return false;
        }
        for i in 0..n {
            let e = (-p[0] * xs[i]).exp();
            r[i] = positions[i] - (T::one() - e);
            jac[i][0] = -xs[i] * e;
        }
        true
    })?;
    let k = fit.params[0];
    let rate = k * scale;

    // d rate_hat = sum_i g_i e_i / sum_i g_i^2 with g the model gradient;
    // Cov(e_i, e_j) = (F_min(i,j) - F_i F_j) / n
    let g: Vec<T> = xs.iter().map(|&x| x * (-k * x).exp()).collect();
    let f: Vec<T> = xs.iter().map(|&x| T::one() - (-k * x).exp()).collect();
    let gg = g.iter().fold(T::zero(), |a, &v| a + v * v);
    let gf = g.iter().zip(&f).fold(T::zero(), |a, (&gi, &fi)| a + gi * fi);
    let mut tail = T::zero();
    let mut cross = T::zero();
    for i in (0..n).rev() {
        cross = cross + g[i] * f[i] * (g[i] + T::lit(2.0) * tail);
        tail = tail + g[i];
    }
    let var_k = ((cross - gf * gf) / nf).max(T::zero()) / (gg * gg);
    let rate_se = var_k.sqrt() * scale;

    let mut chi2 = T::zero();
    let mut used = 0usize;
    for i in 0..n {
        let var = f[i] * (T::one() - f[i]) / nf;
        if var > T::zero() {
            let d = positions[i] - f[i];
            chi2 = chi2 + d * d / var;
            used += 1;
        }
    }
    let reduced = (used > 1).then(|| chi2 / T::from_usize_lossy(used - 1));
    Ok(FitReport { parameters: vec![param("rate", rate, rate_se)], reduced_chi_squared: reduced, n_points: n, n_dof: n - 1, n_samples: n })
}
