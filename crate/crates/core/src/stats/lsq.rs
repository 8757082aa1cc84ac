use crate::{Error, Result, Scalar};

/// Stopping rules for [`levenberg_marquardt`].
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once a successful step lowers chi^2 by less than this
    /// fraction.
    pub tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub params: Vec<T>,
    /// Inverse of the Gauss-Newton normal matrix at the optimum.
    pub covariance: Vec<Vec<T>>,
    pub chi_squared: T,
    pub iterations: usize,
}

/// Weighted nonlinear least squares by Levenberg-Marquardt with Marquardt's
/// diagonal scaling.
///
/// `model(params, residuals, jacobian)` fills the weighted residuals
/// `(y_k - f_k) / sigma_k` and their derivatives with respect to each
/// parameter, and returns `false` if `params` is outside the model's domain.
pub fn levenberg_marquardt<T, F>(n_points: usize, initial: Vec<T>, options: LmOptions, mut model: F) -> Result<LeastSquares<T>>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T], &mut [Vec<T>]) -> bool,
{
    let n_params = initial.len();
    if n_points < n_params {
        return Err(Error::InsufficientData(format!("{n_points} points for {n_params} parameters")));
    }
    let mut x = initial;
    let mut r = vec![T::zero(); n_points];
    let mut jac = vec![vec![T::zero(); n_params]; n_points];
    let mut r_try = r.clone();
    let mut jac_try = jac.clone();
    if !model(&x, &mut r, &mut jac) {
        return Err(Error::FitFailed { iterations: 0, chi_squared: f64::NAN, reason: "initial guess outside model domain".into() });
    }
    let mut chi2 = sum_squares(&r);
    let mut lambda = T::lit(1e-3);
    let tol = T::lit(options.tolerance);

    for iteration in 1..=options.max_iterations {
        let (a, g) = normal_equations(&r, &jac);
        let mut improved = false;
        while lambda < T::lit(1e16) {
            let mut damped = a.clone();
            for (k, row) in damped.iter_mut().enumerate() {
                let d = a[k][k].max(T::epsilon());
                row[k] = row[k] + lambda * d;
            }
            let neg_g: Vec<T> = g.iter().map(|&v| -v).collect();
            let Some(step) = solve(damped, neg_g) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let trial: Vec<T> = x.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            if model(&trial, &mut r_try, &mut jac_try) {
                let chi2_try = sum_squares(&r_try);
                if chi2_try.is_finite() && chi2_try <= chi2 {
                    let decrease = chi2 - chi2_try;
                    x = trial;
                    std::mem::swap(&mut r, &mut r_try);
                    std::mem::swap(&mut jac, &mut jac_try);
                    chi2 = chi2_try;
                    lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                    improved = true;
                    if decrease <= tol * chi2.max(T::min_positive_value()) {
                        return finish(x, &r, &jac, chi2, iteration);
                    }
                    break;
                }
            }
            lambda = lambda * T::lit(10.0);
        }
        if !improved {
            // no downhill step at any damping: already at the minimum to
            // working precision
            return finish(x, &r, &jac, chi2, iteration);
        }
    }
    Err(Error::FitFailed { iterations: options.max_iterations, chi_squared: chi2.as_f64(), reason: "iteration limit reached".into() })
}

fn finish<T: Scalar>(params: Vec<T>, r: &[T], jac: &[Vec<T>], chi2: T, iterations: usize) -> Result<LeastSquares<T>> {
    let (a, _) = normal_equations(r, jac);
    let covariance = invert(a).ok_or_else(|| Error::FitFailed {
        iterations,
        chi_squared: chi2.as_f64(),
        reason: "singular normal matrix (parameters not identifiable)".into(),
    })?;
    Ok(LeastSquares { params, covariance, chi_squared: chi2, iterations })
}

fn sum_squares<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

fn normal_equations<T: Scalar>(r: &[T], jac: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<T>) {
    let p = jac.first().map_or(0, Vec::len);
    let mut a = vec![vec![T::zero(); p]; p];
    let mut g = vec![T::zero(); p];
    for (row, &res) in jac.iter().zip(r) {
        for i in 0..p {
            g[i] = g[i] + row[i] * res;
            for j in 0..p {
                a[i][j] = a[i][j] + row[i] * row[j];
            }
        }
    }
    (a, g)
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1) * 16);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[pivot][col].abs() > tiny) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s = ((row + 1)..n).fold(b[row], |acc, k| acc - a[row][k] * x[k]);
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn invert<T: Scalar>(a: Vec<Vec<T>>) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![T::zero(); n];
        e[k] = T::one();
        columns.push(solve(a.clone(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| columns[j][i]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_matches_closed_form() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 2.9, 5.2, 7.1, 8.8];
        let fit = levenberg_marquardt(5, vec![0.0, 0.0], LmOptions::default(), |p, r, j| {
            for k in 0..5 {
                r[k] = ys[k] - (p[0] + p[1] * xs[k]);
                j[k][0] = -1.0;
                j[k][1] = -xs[k];
            }
            true
        })
        .unwrap();
        // ordinary least squares: slope = Sxy / Sxx
        let mx = 2.0;
        let my = ys.iter().sum::<f64>() / 5.0;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / 10.0;
        assert!((fit.params[1] - slope).abs() < 1e-9);
        assert!((fit.params[0] - (my - slope * mx)).abs() < 1e-9);
        // var(slope) = 1 / Sxx with unit weights
        assert!((fit.covariance[1][1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exponential_decay_recovers_rate() {
        let xs: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * (-1.7 * x).exp()).collect();
        let fit = levenberg_marquardt(30, vec![1.0, 0.5], LmOptions::default(), |p, r, j| {
            for k in 0..30 {
                let f = p[0] * (-p[1] * xs[k]).exp();
                r[k] = ys[k] - f;
                j[k][0] = -(-p[1] * xs[k]).exp();
                j[k][1] = p[0] * xs[k] * (-p[1] * xs[k]).exp();
            }
            true
        })
        .unwrap();
        assert!((fit.params[0] - 5.0).abs() < 1e-8 && (fit.params[1] - 1.7).abs() < 1e-8);
    }

    #[test]
    fn degenerate_parameters_are_reported() {
        // y = (a + b) x: only the sum is identifiable
        let err = levenberg_marquardt(4, vec![1.0, 1.0], LmOptions::default(), |p, r, j| {
            for k in 0..4 {
                let x = k as f64;
                r[k] = 3.0 * x - (p[0] + p[1]) * x;
                j[k][0] = -x;
                j[k][1] = -x;
            }
            true
        })
        .unwrap_err();
        assert!(matches!(err, Error::FitFailed { .. }));
    }
}
