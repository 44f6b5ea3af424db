//! Summary statistics for replica ensembles.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance and its standard error from the fourth central moment.
pub fn variance_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0).max(1.0);
    (var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Sample covariance matrix of the rows (unbiased).
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    covariance_of(rows, rows.len(), |i| i)
}

fn covariance_of(rows: &[Vec<f64>], n: usize, pick: impl Fn(usize) -> usize) -> Vec<Vec<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; k];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(&rows[pick(i)]) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..n {
        let r = &rows[pick(i)];
        for a in 0..k {
            let da = r[a] - mean[a];
            for b in a..k {
                cov[a][b] += da * (r[b] - mean[b]);
            }
        }
    }
    let denom = (n as f64 - 1.0).max(1.0);
    for a in 0..k {
        for b in a..k {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }
    cov
}

/// Bootstrap standard errors of the covariance entries over replicas.
pub fn bootstrap_cov_stderr(rows: &[Vec<f64>], resamples: usize, seed: RngSeed) -> Vec<Vec<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    let mut sum = vec![vec![0.0; k]; k];
    let mut sum_sq = vec![vec![0.0; k]; k];
    let mut rng = seed.rng();
    let mut idx = vec![0usize; n];
    for _ in 0..resamples {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
        let c = covariance_of(rows, n, |i| idx[i]);
        for a in 0..k {
            for b in 0..k {
                sum[a][b] += c[a][b];
                sum_sq[a][b] += c[a][b] * c[a][b];
            }
        }
    }
    let r = resamples as f64;
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let m = sum[a][b] / r;
                    ((sum_sq[a][b] / r - m * m).max(0.0) * r / (r - 1.0).max(1.0)).sqrt()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: usize,
    pub reference_variance: f64,
    pub ks_distance: f64,
    /// Asymptotic 1% critical value `1.628 / sqrt(n)`.
    pub ks_critical_1pct: f64,
    /// Kolmogorov tail probability of the observed distance.
    pub ks_p_value: f64,
    pub skewness: f64,
    pub skewness_stderr: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_stderr: f64,
    /// Zero reference variance with samples that are not all zero.
    pub degenerate_reference: bool,
    pub ks_pass: bool,
}

fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = 2.0 * if k % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against `N(0, reference_variance)`,
/// with sample skewness and excess kurtosis.
pub fn normality_test(samples: &[f64], reference_variance: f64) -> Result<NormalityReport> {
    let n = samples.len();
    if n < 500 {
        return Err(Error::invalid(format!("normality test needs at least 500 samples, got {n}")));
    }
    if !(reference_variance >= 0.0) || !reference_variance.is_finite() {
        return Err(Error::invalid(format!("reference variance must be nonnegative, got {reference_variance}")));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / nf;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };

    let mut degenerate_reference = false;
    let ks_distance = if reference_variance == 0.0 {
        if samples.iter().all(|&x| x == 0.0) {
            0.0
        } else {
            degenerate_reference = true;
            1.0
        }
    } else {
        let normal = Normal::new(0.0, reference_variance.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
            let f = normal.cdf(x);
            acc.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf)
        })
    };
    let sqrt_n = nf.sqrt();
    let ks_critical_1pct = 1.628 / sqrt_n;
    Ok(NormalityReport {
        n,
        reference_variance,
        ks_distance,
        ks_critical_1pct,
        ks_p_value: kolmogorov_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * ks_distance),
        skewness,
        skewness_stderr: (6.0 / nf).sqrt(),
        excess_kurtosis,
        kurtosis_stderr: (24.0 / nf).sqrt(),
        degenerate_reference,
        ks_pass: !degenerate_reference && ks_distance < ks_critical_1pct,
    })
}

/// Least-squares slope of `ys` on `xs`, with its standard error propagated
/// from independent per-point standard errors `sds`.
pub fn fitted_slope(xs: &[f64], ys: &[f64], sds: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let slope = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum::<f64>() / sxx;
    let var: f64 = xs.iter().zip(sds).map(|(x, s)| ((x - xbar) / sxx).powi(2) * s * s).sum();
    (slope, var.sqrt())
}
