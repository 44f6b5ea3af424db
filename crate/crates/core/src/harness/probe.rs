//! Numerical evidence for the conjectured d = 2 limit. Every output is
//! labelled `CONJECTURE`; nothing here checks a theorem.

use serde::{Deserialize, Serialize};

use super::compare::{compare_covariance, CovComparison};
use super::experiment::{run_clt_experiment, Engine, ExperimentConfig, RunResult};
use crate::dual::meeting_curve_offset;
use crate::error::{Error, Result};
use crate::kernel::{c_const, QuadratureSpec};
use crate::lattice::Geometry;
use crate::limit::{cov_vartheta, LimitKind, LimitTag};
use crate::rng::RngSeed;

pub const PROBE_LABEL: &str = "CONJECTURE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub p: f64,
    pub n: f64,
    pub grid: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub engine: Engine,
    pub safety_k: f64,
    pub budget: f64,
    /// Times at which `(log t) P(tau_xy > t)` is estimated for neighbors `x ~ y`.
    pub tail_times: Vec<f64>,
    pub tail_reps: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig::new(0.5, 1000.0, 2000, 0)
    }
}

impl ProbeConfig {
    pub fn new(p: f64, n: f64, reps: usize, master_seed: u64) -> Self {
        ProbeConfig {
            p,
            n,
            grid: vec![0.25, 0.5, 1.0],
            reps,
            master_seed,
            engine: Engine::Auto,
            safety_k: 6.0,
            budget: super::experiment::DEFAULT_BUDGET,
            tail_times: vec![1e2, 1e3, 1e4],
            tail_reps: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    /// `(log t) P(tau_xy > t)`.
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub label: String,
    pub run: RunResult,
    pub comparison: Option<CovComparison>,
    /// Empirical `Var(Lambda_t)` over `C_2^2 t^2 log 2` at each positive grid time.
    pub diag_ratios: Vec<(f64, f64)>,
    pub tail: Vec<TailPoint>,
}

pub fn conjecture_probe_d2(cfg: &ProbeConfig, spec: &QuadratureSpec) -> Result<ProbeReport> {
    if cfg.tail_reps == 0 {
        return Err(Error::invalid("tail_reps must be positive"));
    }
    let mut exp = ExperimentConfig::new(2, cfg.p, vec![cfg.n], cfg.grid.clone(), cfg.reps, cfg.master_seed);
    exp.engine = cfg.engine;
    exp.safety_k = cfg.safety_k;
    exp.budget = cfg.budget;
    let run = run_clt_experiment(&exp)?.remove(0);
    let kind = LimitKind { tag: LimitTag::VarthetaD2, scale_c: c_const(2, cfg.p, spec)? };
    let comparison = if run.grid.len() >= 3 { Some(compare_covariance(&run, kind)?) } else { None };
    let diag_ratios = run
        .grid
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(i, &t)| -> Result<(f64, f64)> {
            let reference = kind.scale_c.powi(2) * cov_vartheta(t, t)?;
            let ratio = if reference == 0.0 { if run.cov[i][i] == 0.0 { 1.0 } else { f64::INFINITY } } else { run.cov[i][i] / reference };
            Ok((t, ratio))
        })
        .collect::<Result<Vec<_>>>()?;

    let tail = if cfg.tail_times.is_empty() {
        Vec::new()
    } else {
        let seed = RngSeed::for_replica(cfg.master_seed, "probe-tail", 0).stream_id;
        meeting_curve_offset(&[0, 0], &[1, 0], 0.0, &cfg.tail_times, cfg.tail_reps, seed, Geometry::Infinite)?
            .into_iter()
            .map(|m| TailPoint { t: m.horizon, value: m.horizon.ln() * (1.0 - m.prob), stderr: m.horizon.ln() * m.stderr })
            .collect()
    };
    Ok(ProbeReport { label: PROBE_LABEL.to_string(), run, comparison, diag_ratios, tail })
}
