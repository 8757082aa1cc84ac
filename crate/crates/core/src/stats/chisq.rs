use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn survival(statistic: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).expect("dof > 0").sf(statistic)
}

/// Pearson goodness of fit of `observed` counts to `expected_p`.
pub fn chi_squared_gof(observed: &[u64], expected_p: &[f64]) -> Result<ChiSquaredTest> {
    if observed.len() != expected_p.len() || observed.len() < 2 {
        return Err(Error::InsufficientData("need matching count and probability vectors of length >= 2".into()));
    }
    if expected_p.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::param("expected_p", "probabilities must be > 0"));
    }
    let total_p: f64 = expected_p.iter().sum();
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let statistic = observed
        .iter()
        .zip(expected_p)
        .map(|(&o, &p)| {
            let e = n as f64 * p / total_p;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = observed.len() - 1;
    Ok(ChiSquaredTest { statistic, dof, p_value: survival(statistic, dof) })
}

/// Two-sample homogeneity test on a 2 x k contingency table. Categories
/// empty in both samples are dropped.
pub fn chi_squared_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquaredTest> {
    if a.len() != b.len() {
        return Err(Error::InsufficientData("samples must share categories".into()));
    }
    let cols: Vec<(u64, u64)> = a.iter().zip(b).map(|(&x, &y)| (x, y)).filter(|&(x, y)| x + y > 0).collect();
    let (na, nb) = (cols.iter().map(|c| c.0).sum::<u64>() as f64, cols.iter().map(|c| c.1).sum::<u64>() as f64);
    if cols.len() < 2 || na == 0.0 || nb == 0.0 {
        return Err(Error::InsufficientData("need two non-empty samples over >= 2 categories".into()));
    }
    let n = na + nb;
    let statistic = cols
        .iter()
        .map(|&(x, y)| {
            let col = (x + y) as f64;
            let (ea, eb) = (na * col / n, nb * col / n);
            (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb
        })
        .sum();
    let dof = cols.len() - 1;
    Ok(ChiSquaredTest { statistic, dof, p_value: survival(statistic, dof) })
}
