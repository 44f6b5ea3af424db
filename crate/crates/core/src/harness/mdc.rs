//! Martingale plus potential decomposition of the occupation time in d = 3.
//!
//! On the torus, `xi_{tN} - p tN = M + V_0` with
//! `V_0 = sum_x (eta_0(x) - p) v^L(tN, x)` and `M` a mean-zero martingale
//! increment. Each replica draws `eta_0` on the whole torus, reads the
//! occupation time off the backward genealogy using the same `eta_0`, and
//! splits it.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::advisor::finite_size_advisor;
use super::stats::{mean_and_stderr, variance_and_stderr};
use crate::dual::DualPathSampler;
use crate::error::{Error, Result};
use crate::kernel::{c_const, v_torus_table, QuadratureSpec};
use crate::lattice::Geometry;
use crate::limit::cov_zeta;
use crate::parallel::try_map_replicas;

const D: usize = 3;
/// Sites with `v^L(tN, x) < TRUNCATION v^L(tN, O)` are left out of `V_0`.
pub const TRUNCATION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdcConfig {
    pub p: f64,
    pub t: f64,
    pub n: f64,
    pub reps: usize,
    pub master_seed: u64,
    /// Torus side; 0 asks the finite-size advisor with `safety_k`.
    pub side: usize,
    pub safety_k: f64,
}

impl MdcConfig {
    pub fn new(p: f64, t: f64, n: f64, reps: usize, master_seed: u64) -> Self {
        MdcConfig { p, t, n, reps, master_seed, side: 0, safety_k: 6.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdcReport {
    pub n: f64,
    pub t: f64,
    pub side: usize,
    pub reps: usize,
    pub kept_sites: usize,
    pub mean_m: f64,
    pub mean_m_stderr: f64,
    pub var_v0: f64,
    pub var_v0_stderr: f64,
    /// `p(1-p) sum_x v^L(tN, x)^2` over the kept sites.
    pub var_v0_exact: f64,
    pub var_m: f64,
    pub var_m_stderr: f64,
    /// `N^{3/2}`, the normalization of the scaled columns.
    pub scale: f64,
    /// `C_3^2 cov_zeta(t, t)`, the limit of `Var(M) / N^{3/2}`.
    pub limit_var_scaled: f64,
    pub jumps: u64,
}

impl MdcReport {
    pub fn var_v0_scaled(&self) -> f64 {
        self.var_v0 / self.scale
    }

    pub fn var_m_scaled(&self) -> f64 {
        self.var_m / self.scale
    }

    /// `|mean M| <= 4 stderr`.
    pub fn martingale_mean_ok(&self) -> bool {
        self.mean_m.abs() <= 4.0 * self.mean_m_stderr
    }
}

pub fn martingale_decomposition_check(cfg: &MdcConfig, spec: &QuadratureSpec) -> Result<MdcReport> {
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {}", cfg.p)));
    }
    if !(cfg.t > 0.0) || !(cfg.n >= 4.0) || !(cfg.t * cfg.n).is_finite() {
        return Err(Error::invalid(format!("need t > 0 and N >= 4, got t = {}, N = {}", cfg.t, cfg.n)));
    }
    if cfg.reps < 2 {
        return Err(Error::invalid("martingale check needs at least two replicas"));
    }
    let horizon = cfg.t * cfg.n;
    let side = if cfg.side == 0 { finite_size_advisor(D, cfg.n, cfg.t, cfg.safety_k, None)?.side } else { cfg.side };
    let scale = cfg.n.powf(1.5);
    let limit_var_scaled = c_const(D, cfg.p, spec)?.powi(2) * cov_zeta(cfg.t, cfg.t)?;
    let pq = cfg.p * (1.0 - cfg.p);

    let mut weights = v_torus_table(D, side, horizon, spec)?;
    let cutoff = TRUNCATION * weights[0];
    let mut kept_sites = 0;
    for w in weights.iter_mut() {
        if *w < cutoff {
            *w = 0.0;
        } else {
            kept_sites += 1;
        }
    }
    let total: f64 = weights.iter().sum();
    let var_v0_exact = pq * weights.iter().map(|w| w * w).sum::<f64>();

    let degenerate = cfg.p == 0.0 || cfg.p == 1.0;
    let threshold = (cfg.p * 2f64.powi(64)).min(u64::MAX as f64) as u64;
    let words = weights.len().div_ceil(64);
    let rows = try_map_replicas(cfg.reps, cfg.master_seed, "mdc", |_, rng| {
        let mut sampler = DualPathSampler::new(D, Geometry::Torus { side })?;
        let g = sampler.run(horizon, rng)?;
        if degenerate {
            return Ok((0.0, 0.0, g.jumps));
        }
        let mut eta0 = vec![0u64; words];
        let mut ones = 0.0;
        for (idx, &w) in weights.iter().enumerate() {
            if rng.next_u64() < threshold {
                eta0[idx / 64] |= 1 << (idx % 64);
                ones += w;
            }
        }
        let v0 = ones - cfg.p * total;
        let spins = g
            .finals
            .iter()
            .map(|&(root, key)| {
                let idx = sampler.codec().torus_index(key);
                (root, eta0[idx / 64] >> (idx % 64) & 1 == 1)
            })
            .collect();
        let xi = g.occupation(&[horizon], &spins)[0];
        Ok((v0, xi - cfg.p * horizon - v0, g.jumps))
    })?;
    let v0: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let m: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mean_m, mean_m_stderr) = mean_and_stderr(&m);
    let (var_v0, var_v0_stderr) = variance_and_stderr(&v0);
    let (var_m, var_m_stderr) = variance_and_stderr(&m);
    Ok(MdcReport {
        n: cfg.n,
        t: cfg.t,
        side,
        reps: cfg.reps,
        kept_sites,
        mean_m,
        mean_m_stderr,
        var_v0,
        var_v0_stderr,
        var_v0_exact,
        var_m,
        var_m_stderr,
        scale,
        limit_var_scaled,
        jumps: rows.iter().map(|r| r.2).sum(),
    })
}
