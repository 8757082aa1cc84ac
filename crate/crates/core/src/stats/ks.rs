use serde::{Deserialize, Serialize};

use super::cdf::empirical_cdf;
use super::exponential::validate_samples;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Largest gap between the empirical CDF and `cdf`, checked on both sides
/// of every jump.
pub fn ks_statistic<T: Scalar>(samples: &[T], cdf: impl Fn(f64) -> f64) -> f64 {
    let e = empirical_cdf(samples);
    let n = e.len() as f64;
    e.sorted().iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x.as_f64());
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form converges fast for small x
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS test against `F(t) = 1 - exp(-rate t)` with the asymptotic
/// p-value and Stephens' finite-n correction.
pub fn ks_test<T: Scalar>(samples: &[T], rate: T) -> Result<KsTest> {
    validate_samples(samples)?;
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(Error::param("rate", "must be finite and > 0"));
    }
    let lambda = rate.as_f64();
    let statistic = ks_statistic(samples, |t| -(-lambda * t).exp_m1());
    let sn = (samples.len() as f64).sqrt();
    let p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * statistic);
    Ok(KsTest { statistic, p_value, n: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::sample_dwell;
    use crate::rng::trial_stream;
    use proptest::prelude::*;

    fn exp_samples(lambda: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = trial_stream(seed, 0, 0);
        (0..n).map(|_| sample_dwell(lambda, &mut rng)).collect()
    }

    #[test]
    fn survival_function_values() {
        // standard table: P(K > 1.36) = 0.0494, P(K > 1.63) = 0.0098
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_survival(1.63) - 0.0098).abs() < 2e-4);
        assert!((kolmogorov_survival(0.5) - 0.9639).abs() < 5e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        // the two series agree where they meet
        let c = std::f64::consts::PI.powi(2) / 8.0;
        let small: f64 = 1.0 - (2.0 * std::f64::consts::PI).sqrt() * (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>();
        assert!((small - kolmogorov_survival(1.0)).abs() < 1e-12);
    }

    #[test]
    fn calibrated_under_the_null() {
        let lambda = 1000.0;
        let passes = (0..100).filter(|&seed| ks_test(&exp_samples(lambda, 10_000, seed), lambda).unwrap().p_value > 0.01).count();
        assert!(passes >= 95, "{passes}/100");
    }

    #[test]
    fn detects_a_wrong_rate() {
        let r = ks_test(&exp_samples(2000.0, 10_000, 7), 1000.0).unwrap();
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn deterministic_statistic() {
        let s = vec![0.5; 20];
        let f = -(-0.5f64).exp_m1();
        let r = ks_test(&s, 1.0).unwrap();
        assert_eq!(r.statistic, f.max(1.0 - f));
        assert_eq!(ks_test(&s, 1.0).unwrap(), r);
    }

    #[test]
    fn rejects_bad_rate() {
        assert!(ks_test(&[1.0; 20], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariant(seed in 0u64..1000, k in 1e-3f64..1e3) {
            let s = exp_samples(10.0, 200, seed);
            let scaled: Vec<f64> = s.iter().map(|x| x * k).collect();
            let a = ks_test(&s, 10.0).unwrap();
            let b = ks_test(&scaled, 10.0 / k).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() < 1e-9);
        }
    }
}
