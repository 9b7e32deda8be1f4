//! Least squares, L1-penalized logistic regression and polynomial fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::AnalyticsError;

/// Columns with this name are never penalized.
pub const INTERCEPT: &str = "intercept";

/// Relative residual below which a column counts as a combination of
/// the ones before it.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub p: usize,
    /// Residual sum of squares for linear fits.
    pub rss: Option<f64>,
    pub r_squared: Option<f64>,
    /// Unpenalized log-likelihood for logistic fits.
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// NaN where a p-value is not defined, e.g. a coefficient the L1
    /// penalty dropped.
    pub p_values: Vec<f64>,
    pub marginal_effects: Vec<f64>,
    pub lambda: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

fn check_names(x: &DMatrix<f64>, names: &[String]) -> Result<(), AnalyticsError> {
    if names.len() != x.ncols() {
        return Err(AnalyticsError::NameMismatch(names.len(), x.ncols()));
    }
    Ok(())
}

/// Names of columns that lie in the span of earlier columns.
pub fn dependent_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut kept: Vec<usize> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let resid = if kept.is_empty() {
            norm
        } else {
            let basis = x.select_columns(kept.iter());
            let qr = basis.qr();
            let q = qr.q();
            (&col - &q * (q.transpose() * &col)).norm()
        };
        if norm == 0.0 || resid <= RANK_TOL * norm.max(1.0) {
            dependent.push(names[j].clone());
        } else {
            kept.push(j);
        }
    }
    dependent
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { f64::NAN } else { 0.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

fn two_sided_z(z: f64) -> f64 {
    let dist = Normal::standard();
    2.0 * (1.0 - dist.cdf(z.abs()))
}

/// Ordinary least squares through a QR decomposition.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<RegressionResult, AnalyticsError> {
    check_names(x, names)?;
    let (n, p) = x.shape();
    if n < p || p == 0 {
        return Err(AnalyticsError::TooFewRows { rows: n, cols: p });
    }
    let dep = dependent_columns(x, names);
    if !dep.is_empty() {
        return Err(AnalyticsError::RankDeficient(dep));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty).ok_or_else(|| AnalyticsError::RankDeficient(names.to_vec()))?;
    let resid = y - x * &beta;
    let rss = resid.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else if rss == 0.0 { 1.0 } else { 0.0 };
    let df = (n - p) as f64;
    let (se, pv) = if df > 0.0 {
        let sigma2 = rss / df;
        let rinv = r.solve_upper_triangular(&DMatrix::identity(p, p)).expect("full rank R");
        let cov_diag: Vec<f64> = (0..p).map(|i| sigma2 * rinv.row(i).norm_squared()).collect();
        let se: Vec<f64> = cov_diag.iter().map(|v| v.sqrt()).collect();
        let pv = beta
            .iter()
            .zip(&se)
            .map(|(b, s)| if *s == 0.0 { if *b == 0.0 { 1.0 } else { 0.0 } } else { two_sided_t(b / s, df) })
            .collect();
        (se, pv)
    } else {
        (vec![f64::NAN; p], vec![f64::NAN; p])
    };
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    Ok(RegressionResult {
        names: names.to_vec(),
        marginal_effects: coefficients.clone(),
        coefficients,
        std_errors: se,
        p_values: pv,
        lambda: None,
        diagnostics: Diagnostics { n, p, rss: Some(rss), r_squared: Some(r_squared), log_likelihood: None, iterations: 1 },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticOptions {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once no coefficient moves by more than this in an iteration.
    pub tol: f64,
}

impl LogisticOptions {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, max_iter: 200_000, tol: 1e-8 }
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^t) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(e, yi)| yi * e - softplus(*e)).sum()
}

fn objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64, penalized: &[bool]) -> f64 {
    let n = x.nrows() as f64;
    let l1: f64 = beta.iter().zip(penalized).filter(|(_, p)| **p).map(|(b, _)| b.abs()).sum();
    -log_likelihood(x, y, beta) / n + lambda * l1
}

/// Logistic regression minimizing mean negative log-likelihood plus
/// `lambda` times the L1 norm of the non-intercept coefficients, solved by
/// accelerated proximal gradient with restarts. p-values come from an
/// unpenalized refit on the selected columns.
pub fn fit_logistic_l1(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    opts: LogisticOptions,
) -> Result<RegressionResult, AnalyticsError> {
    check_names(x, names)?;
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(AnalyticsError::TooFewRows { rows: n, cols: p });
    }
    if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(AnalyticsError::NonBinary(*bad));
    }
    if !opts.lambda.is_finite() || opts.lambda < 0.0 {
        return Err(AnalyticsError::BadLambda(opts.lambda));
    }
    let penalized: Vec<bool> = names.iter().map(|n| n != INTERCEPT).collect();
    let gram = x.transpose() * x;
    let lmax = gram.symmetric_eigenvalues().max();
    let step = 4.0 * n as f64 / lmax.max(f64::MIN_POSITIVE);
    let grad = |b: &DVector<f64>| {
        let eta = x * b;
        let resid = DVector::from_iterator(n, eta.iter().zip(y.iter()).map(|(e, yi)| sigmoid(*e) - yi));
        x.transpose() * resid / n as f64
    };
    let prox = |v: DVector<f64>| {
        DVector::from_iterator(
            p,
            v.iter().zip(&penalized).map(|(b, pen)| {
                if *pen {
                    b.signum() * (b.abs() - step * opts.lambda).max(0.0)
                } else {
                    *b
                }
            }),
        )
    };
    let mut beta = DVector::zeros(p);
    let mut z = beta.clone();
    let mut t = 1.0f64;
    let mut obj = objective(x, y, &beta, opts.lambda, &penalized);
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iter {
            return Err(AnalyticsError::NotConverged(iterations));
        }
        iterations += 1;
        let next = prox(&z - grad(&z) * step);
        let next_obj = objective(x, y, &next, opts.lambda, &penalized);
        if next_obj > obj && t > 1.0 {
            // momentum overshot: restart from the last iterate
            z = beta.clone();
            t = 1.0;
            continue;
        }
        let change = (&next - &beta).amax();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &beta) * ((t - 1.0) / t_next);
        t = t_next;
        beta = next;
        obj = next_obj;
        if !beta.iter().all(|b| b.is_finite()) {
            return Err(AnalyticsError::NotConverged(iterations));
        }
        if change < opts.tol {
            break;
        }
    }

    let probs: Vec<f64> = (x * &beta).iter().map(|e| sigmoid(*e)).collect();
    let slope = probs.iter().map(|p| p * (1.0 - p)).sum::<f64>() / n as f64;
    let marginal_effects = beta.iter().map(|b| b * slope).collect();

    let support: Vec<usize> = (0..p).filter(|&j| !penalized[j] || beta[j] != 0.0).collect();
    let mut se = vec![f64::NAN; p];
    let mut pv = vec![f64::NAN; p];
    if let Some(refit) = newton_logistic(&x.select_columns(support.iter()), y) {
        for (k, &j) in support.iter().enumerate() {
            se[j] = refit.1[k];
            pv[j] = two_sided_z(refit.0[k] / refit.1[k]);
        }
    }
    Ok(RegressionResult {
        names: names.to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors: se,
        p_values: pv,
        marginal_effects,
        lambda: Some(opts.lambda),
        diagnostics: Diagnostics {
            n,
            p,
            rss: None,
            r_squared: None,
            log_likelihood: Some(log_likelihood(x, y, &beta)),
            iterations,
        },
    })
}

/// Unpenalized maximum likelihood by Newton's method; `None` when the
/// information matrix is singular or the fit runs away (separation).
fn newton_logistic(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    let (n, p) = x.shape();
    if p == 0 || n <= p {
        return None;
    }
    let mut beta = DVector::zeros(p);
    for _ in 0..100 {
        let probs = (x * &beta).map(sigmoid);
        let w = probs.map(|p| p * (1.0 - p));
        let mut xw = x.clone();
        for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        let info = x.transpose() * xw;
        let chol = info.clone().cholesky()?;
        let delta = chol.solve(&(x.transpose() * (y - &probs)));
        beta += &delta;
        if !beta.iter().all(|b| b.is_finite() && b.abs() < 1e6) {
            return None;
        }
        if delta.amax() < 1e-12 {
            let probs = (x * &beta).map(sigmoid);
            let mut xw = x.clone();
            for (mut row, pi) in xw.row_iter_mut().zip(probs.iter()) {
                row *= pi * (1.0 - pi);
            }
            let cov = (x.transpose() * xw).try_inverse()?;
            let se = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
            return Some((beta.iter().copied().collect(), se));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub fit: RegressionResult,
    /// Whether the squared term is significant at 5%, for degree ≥ 2.
    pub quadratic_significant: Option<bool>,
}

pub fn poly_names(degree: usize) -> Vec<String> {
    (0..=degree)
        .map(|k| match k {
            0 => INTERCEPT.to_string(),
            1 => "x".to_string(),
            k => format!("x^{k}"),
        })
        .collect()
}

/// Least-squares polynomial of the given degree; coefficients are in
/// increasing power order.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit, AnalyticsError> {
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if degree == 0 || distinct.len() <= degree || x.len() != y.len() {
        return Err(AnalyticsError::Underdetermined { degree, distinct: distinct.len() });
    }
    let m = DMatrix::from_fn(x.len(), degree + 1, |i, k| x[i].powi(k as i32));
    let fit = fit_ols(&m, &DVector::from_column_slice(y), &poly_names(degree))?;
    let quadratic_significant = (degree >= 2).then(|| fit.p_values[2] < 0.05);
    Ok(PolyFit { fit, quadratic_significant })
}
