//! Gaussian limit processes of the scaled occupation time.
//!
//! `zeta` (d = 3), `vartheta` (d = 2) and Brownian motion (d >= 4) are
//! mean-zero processes given by closed-form covariances. Paths on a finite
//! grid are sampled through a Cholesky factor of the covariance matrix.

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_replicas;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitTag {
    ZetaD3,
    VarthetaD2,
    Brownian,
}

impl LimitTag {
    pub fn for_dimension(d: usize) -> Result<LimitTag> {
        match d {
            2 => Ok(LimitTag::VarthetaD2),
            3 => Ok(LimitTag::ZetaD3),
            d if d >= 4 => Ok(LimitTag::Brownian),
            _ => Err(Error::invalid(format!("no limit process for d = {d}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitKind {
    pub tag: LimitTag,
    pub scale_c: f64,
}

fn check_times(s: f64, t: f64) -> Result<(f64, f64)> {
    if !(s >= 0.0) || !(t >= 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::invalid(format!("covariance times must be finite and nonnegative, got ({s}, {t})")));
    }
    Ok(if s <= t { (s, t) } else { (t, s) })
}

/// `s^{3/2} + t^{3/2} - (t-s)^{3/2}/2 - (t+s)^{3/2}/2` for `s <= t`.
pub fn cov_zeta(s: f64, t: f64) -> Result<f64> {
    let (s, t) = check_times(s, t)?;
    Ok(s.powf(1.5) + t.powf(1.5) - 0.5 * (t - s).powf(1.5) - 0.5 * (t + s).powf(1.5))
}

/// `u^2 log u`, continuously extended by 0 at `u = 0`.
fn u2_log_u(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u * u.ln()
    }
}

pub fn cov_vartheta(s: f64, t: f64) -> Result<f64> {
    let (s, t) = check_times(s, t)?;
    Ok(u2_log_u(t + s) / 4.0 + u2_log_u(t - s) / 4.0 - u2_log_u(s) / 2.0 - u2_log_u(t) / 2.0)
}

pub fn cov_brownian(s: f64, t: f64) -> Result<f64> {
    let (s, _) = check_times(s, t)?;
    Ok(s)
}

impl LimitKind {
    /// `scale_c^2 cov(s, t)`.
    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        let base = match self.tag {
            LimitTag::ZetaD3 => cov_zeta(s, t)?,
            LimitTag::VarthetaD2 => cov_vartheta(s, t)?,
            LimitTag::Brownian => cov_brownian(s, t)?,
        };
        Ok(self.scale_c * self.scale_c * base)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    pub grid: Vec<f64>,
    pub entries: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid must not be empty"));
    }
    if !(grid[0] >= 0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::invalid(format!("grid must be strictly increasing and nonnegative: {grid:?}")));
    }
    Ok(())
}

pub fn limit_cov_matrix(kind: LimitKind, grid: &[f64]) -> Result<CovMatrix> {
    if !(kind.scale_c >= 0.0) {
        return Err(Error::invalid(format!("scale_c must be nonnegative, got {}", kind.scale_c)));
    }
    check_grid(grid)?;
    let n = grid.len();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let c = kind.cov(grid[i], grid[j])?;
            entries[(i, j)] = c;
            entries[(j, i)] = c;
        }
    }
    let min_eigenvalue = entries.clone().symmetric_eigenvalues().min();
    let trace = entries.trace();
    if min_eigenvalue < -1e-9 * trace.max(f64::MIN_POSITIVE) {
        return Err(Error::Inconsistency(format!(
            "covariance matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}, trace {trace:e}"
        )));
    }
    Ok(CovMatrix { grid: grid.to_vec(), entries, min_eigenvalue })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPaths {
    pub grid: Vec<f64>,
    /// One row per sample.
    pub paths: Vec<Vec<f64>>,
    /// Diagonal jitter added before factorization (0 if none was needed).
    pub jitter: f64,
}

/// Draws `reps` mean-zero Gaussian paths with the limit covariance on `grid`.
///
/// Grid points of zero variance are pinned at 0. If the Cholesky
/// factorization fails, a diagonal jitter of `1e-10 trace` is added once and
/// reported in the result.
pub fn sample_gaussian_path(kind: LimitKind, grid: &[f64], reps: usize, seed: u64) -> Result<GaussianPaths> {
    let cov = limit_cov_matrix(kind, grid)?;
    let live: Vec<usize> = (0..grid.len()).filter(|&i| cov.entries[(i, i)] > 0.0).collect();
    let k = live.len();
    let sub = DMatrix::from_fn(k, k, |i, j| cov.entries[(live[i], live[j])]);
    let mut jitter = 0.0;
    let factor = match sub.clone().cholesky() {
        Some(c) => c.l(),
        None => {
            jitter = 1e-10 * sub.trace();
            let jittered = &sub + DMatrix::identity(k, k) * jitter;
            jittered
                .cholesky()
                .ok_or_else(|| Error::Inconsistency("Cholesky factorization failed after jitter".into()))?
                .l()
        }
    };
    let n = grid.len();
    let paths = map_replicas(reps, seed, "limit-sample", |_, rng| {
        let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &factor * z;
        let mut row = vec![0.0; n];
        for (slot, &i) in live.iter().enumerate() {
            row[i] = x[slot];
        }
        row
    });
    Ok(GaussianPaths { grid: grid.to_vec(), paths, jitter })
}
