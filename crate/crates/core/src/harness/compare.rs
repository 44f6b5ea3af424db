use serde::{Deserialize, Serialize};

use super::experiment::RunResult;
use crate::error::{Error, Result};
use crate::kernel::{c_const, QuadratureSpec};
use crate::limit::{LimitKind, LimitTag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovEntry {
    pub i: usize,
    pub j: usize,
    pub empirical: f64,
    pub reference: f64,
    pub stderr: f64,
    /// `(empirical - reference) / stderr`; 0 when both sides agree exactly.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovComparison {
    pub kind: LimitKind,
    pub entries: Vec<CovEntry>,
    pub max_abs_z: f64,
    pub max_diag_rel_err: f64,
}

impl CovComparison {
    pub fn diagonal(&self) -> impl Iterator<Item = &CovEntry> {
        self.entries.iter().filter(|e| e.i == e.j)
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = &CovEntry> {
        self.entries.iter().filter(|e| e.i < e.j)
    }
}

/// The limit process and its scale for dimension `d` and density `p`.
pub fn limit_kind_for(d: usize, p: f64, spec: &QuadratureSpec) -> Result<LimitKind> {
    Ok(LimitKind { tag: LimitTag::for_dimension(d)?, scale_c: c_const(d, p, spec)? })
}

/// Compares the empirical covariance of `result` against `scale_c^2 cov_kind`
/// entry by entry (upper triangle), using the bootstrap standard errors.
pub fn compare_covariance(result: &RunResult, kind: LimitKind) -> Result<CovComparison> {
    let k = result.grid.len();
    if k < 3 {
        return Err(Error::invalid(format!("covariance comparison needs at least 3 grid points, got {k}")));
    }
    let mut entries = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            let empirical = result.cov[i][j];
            let reference = kind.cov(result.grid[i], result.grid[j])?;
            let stderr = result.cov_stderr[i][j];
            let diff = empirical - reference;
            let z = if diff == 0.0 { 0.0 } else { diff / stderr };
            entries.push(CovEntry { i, j, empirical, reference, stderr, z });
        }
    }
    let max_abs_z = entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max);
    let max_diag_rel_err = entries
        .iter()
        .filter(|e| e.i == e.j)
        .map(|e| {
            let diff = (e.empirical - e.reference).abs();
            if diff == 0.0 { 0.0 } else { diff / e.reference.abs() }
        })
        .fold(0.0, f64::max);
    Ok(CovComparison { kind, entries, max_abs_z, max_diag_rel_err })
}
