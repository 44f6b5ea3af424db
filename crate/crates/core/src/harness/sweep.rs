use serde::{Deserialize, Serialize};

use super::experiment::{check_budget, default_budget, default_safety_k, plan, simulate_centered, Engine, DEFAULT_BUDGET};
use super::stats::{fitted_slope, variance_and_stderr};
use crate::dual::occupation_cov_dual;
use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// How `Var(xi_N - pN)` is estimated at each `N`.
///
/// `Simulation` takes the sample variance of simulated occupation times.
/// `DualIdentity` averages `pq |{(a, b) in [0,N]^2 : walk visits O in
/// [|a-b|, a+b]}|` over single rate-`2d` walks, whose mean is exactly the
/// variance; it costs `O(N)` per replica.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    #[default]
    Simulation,
    DualIdentity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d: usize,
    pub p: f64,
    pub n_list: Vec<f64>,
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub estimator: VarianceEstimator,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_safety_k")]
    pub safety_k: f64,
    #[serde(default = "default_budget")]
    pub budget: f64,
}

impl SweepConfig {
    pub fn new(d: usize, p: f64, n_list: Vec<f64>, reps: usize, master_seed: u64) -> Self {
        SweepConfig {
            d,
            p,
            n_list,
            reps,
            master_seed,
            estimator: VarianceEstimator::Simulation,
            engine: Engine::Auto,
            safety_k: 6.0,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: f64,
    pub side: usize,
    pub variance: f64,
    pub stderr: f64,
    pub events: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub d: usize,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `log Var` against `log N`; absent when degenerate.
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    /// `Var / (N log N)` at each `N` (d = 4 only).
    pub n_log_n_ratios: Option<Vec<f64>>,
    /// `max / min - 1` of those ratios.
    pub n_log_n_variation: Option<f64>,
    /// `p` is 0 or 1, so every variance vanishes.
    pub degenerate: bool,
}

pub fn variance_scaling_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.d < 2 {
        return Err(Error::invalid(format!("d must be at least 2, got {}", cfg.d)));
    }
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {}", cfg.p)));
    }
    let lo = cfg.n_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cfg.n_list.iter().copied().fold(0.0, f64::max);
    if cfg.n_list.len() < 4 || !(hi >= 8.0 * lo) || !(lo >= 4.0) {
        return Err(Error::invalid(format!(
            "sweep needs at least 4 values of N >= 4 spanning a factor of 8, got {:?}",
            cfg.n_list
        )));
    }
    if cfg.reps < 100 {
        return Err(Error::invalid(format!("reps must be at least 100, got {}", cfg.reps)));
    }
    let plans = cfg
        .n_list
        .iter()
        .map(|&n| plan(cfg.d, n, 1.0, 0, cfg.engine, cfg.reps, cfg.safety_k))
        .collect::<Result<Vec<_>>>()?;
    let degenerate = cfg.p == 0.0 || cfg.p == 1.0;
    if degenerate {
        let points = cfg
            .n_list
            .iter()
            .zip(&plans)
            .map(|(&n, pl)| SweepPoint { n, side: pl.side, variance: 0.0, stderr: 0.0, events: 0 })
            .collect();
        return Ok(SweepReport {
            d: cfg.d,
            points,
            slope: None,
            slope_stderr: None,
            n_log_n_ratios: None,
            n_log_n_variation: None,
            degenerate,
        });
    }
    if cfg.estimator == VarianceEstimator::Simulation {
        check_budget(plans.iter().map(|p| p.estimate).sum(), cfg.budget)?;
    }

    let mut points = Vec::with_capacity(plans.len());
    for (i, (&n, pl)) in cfg.n_list.iter().zip(&plans).enumerate() {
        let point = match cfg.estimator {
            VarianceEstimator::Simulation => {
                let tag = format!("sweep:{}:{i}", pl.engine.name());
                let (raw, events) = simulate_centered(cfg.d, cfg.p, &[n], n, *pl, cfg.reps, cfg.master_seed, &tag)?;
                let xs: Vec<f64> = raw.iter().map(|r| r[0]).collect();
                let (variance, stderr) = variance_and_stderr(&xs);
                SweepPoint { n, side: pl.side, variance, stderr, events }
            }
            VarianceEstimator::DualIdentity => {
                let seed = crate::rng::RngSeed::for_replica(cfg.master_seed, "sweep-identity", i as u64).stream_id;
                let est = occupation_cov_dual(n, n, cfg.p, cfg.d, cfg.reps, seed, Geometry::Torus { side: pl.side })?;
                SweepPoint { n, side: pl.side, variance: est.value, stderr: est.stderr, events: 0 }
            }
        };
        points.push(point);
    }

    let xs: Vec<f64> = points.iter().map(|p| p.n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.variance.ln()).collect();
    let sds: Vec<f64> = points.iter().map(|p| p.stderr / p.variance).collect();
    let (slope, slope_stderr) = fitted_slope(&xs, &ys, &sds);
    let (n_log_n_ratios, n_log_n_variation) = if cfg.d == 4 {
        let r: Vec<f64> = points.iter().map(|p| p.variance / (p.n * p.n.ln())).collect();
        let max = r.iter().copied().fold(0.0, f64::max);
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        (Some(r), Some(max / min - 1.0))
    } else {
        (None, None)
    };
    Ok(SweepReport {
        d: cfg.d,
        points,
        slope: Some(slope),
        slope_stderr: Some(slope_stderr),
        n_log_n_ratios,
        n_log_n_variation,
        degenerate,
    })
}
