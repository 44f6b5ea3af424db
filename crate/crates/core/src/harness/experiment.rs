use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::advisor::{finite_size_advisor, forward_event_estimate};
use super::stats::{bootstrap_cov_stderr, covariance_matrix, mean_and_stderr};
use crate::dual::DualPathSampler;
use crate::error::{Error, Result};
use crate::kernel::h_scale;
use crate::lattice::{Geometry, TorusLattice};
use crate::parallel::try_map_replicas;
use crate::rng::RngSeed;
use crate::voter::{advance_to, init_product, OccupationRecorder};

/// How occupation paths are generated.
///
/// `Forward` runs the graphical construction on the whole torus. `Dual`
/// reads the path off the backward genealogy of the origin, which has the
/// same law and a cost independent of the torus side. `Auto` picks the one
/// with the smaller expected event count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Forward,
    Dual,
    #[default]
    Auto,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Forward => "forward",
            Engine::Dual => "dual",
            Engine::Auto => "auto",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Engine::Forward),
            "dual" => Ok(Engine::Dual),
            "auto" => Ok(Engine::Auto),
            _ => Err(Error::invalid(format!("unknown engine {s:?}; expected forward, dual or auto"))),
        }
    }
}

pub const DEFAULT_BUDGET: f64 = 1e12;

pub(crate) fn default_horizon() -> f64 {
    1.0
}
pub(crate) fn default_safety_k() -> f64 {
    6.0
}
pub(crate) fn default_budget() -> f64 {
    DEFAULT_BUDGET
}
pub(crate) fn default_bootstrap() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub p: f64,
    /// Path horizon `T` in macroscopic time.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub n_list: Vec<f64>,
    /// Macroscopic times in `[0, T]`.
    pub grid: Vec<f64>,
    /// Torus side; 0 asks the finite-size advisor.
    #[serde(default)]
    pub side: usize,
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_safety_k")]
    pub safety_k: f64,
    /// Refuse runs whose expected event count exceeds this.
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl ExperimentConfig {
    pub fn new(d: usize, p: f64, n_list: Vec<f64>, grid: Vec<f64>, reps: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            d,
            p,
            horizon: grid.last().copied().unwrap_or(1.0),
            n_list,
            grid,
            side: 0,
            reps,
            master_seed,
            engine: Engine::Auto,
            safety_k: default_safety_k(),
            budget: DEFAULT_BUDGET,
            bootstrap: default_bootstrap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::invalid(format!("d must be at least 2, got {}", self.d)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.grid.is_empty()
            || !(self.grid[0] >= 0.0)
            || self.grid.windows(2).any(|w| !(w[1] > w[0]))
            || self.grid[self.grid.len() - 1] > self.horizon
        {
            return Err(Error::invalid(format!(
                "grid must be strictly increasing within [0, {}], got {:?}",
                self.horizon, self.grid
            )));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| !(n >= 4.0) || !n.is_finite()) {
            return Err(Error::invalid(format!("every N must be at least 4, got {:?}", self.n_list)));
        }
        if self.reps < 100 {
            return Err(Error::invalid(format!("reps must be at least 100, got {}", self.reps)));
        }
        if self.side != 0 && self.side < 3 {
            return Err(Error::invalid(format!("torus side must be 0 (auto) or at least 3, got {}", self.side)));
        }
        if !(self.budget > 0.0) {
            return Err(Error::invalid(format!("budget must be positive, got {}", self.budget)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub n: f64,
    pub side: usize,
    /// Resolved engine (never `auto`).
    pub engine: Engine,
    pub scale_h: f64,
    pub grid: Vec<f64>,
    /// Scaled centered paths `(xi_{tN} - p t N) / h_d(N)`, one row per replica.
    pub paths: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    /// Bootstrap standard errors of `cov`.
    pub cov_stderr: Vec<Vec<f64>>,
    /// Forward events or dual walker jumps.
    pub events: u64,
    pub event_estimate: f64,
    /// Every grid mean lies within 4 standard errors of 0.
    pub centered_ok: bool,
}

/// A resolved plan for one value of `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Plan {
    pub side: usize,
    pub engine: Engine,
    pub estimate: f64,
}

pub(crate) fn plan(d: usize, n: f64, horizon: f64, side: usize, engine: Engine, reps: usize, safety_k: f64) -> Result<Plan> {
    let side = if side == 0 { finite_size_advisor(d, n, horizon, safety_k, None)?.side } else { side };
    let forward = forward_event_estimate(d, side, n * horizon, reps);
    let dual = reps as f64 * DualPathSampler::expected_jumps_bound(d, n * horizon);
    let engine = match engine {
        Engine::Auto if forward <= dual => Engine::Forward,
        Engine::Auto => Engine::Dual,
        e => e,
    };
    let estimate = if engine == Engine::Forward { forward } else { dual };
    Ok(Plan { side, engine, estimate })
}

/// Centered occupation `xi_t - p t` at absolute times `grid` for each replica.
pub(crate) fn simulate_centered(
    d: usize,
    p: f64,
    grid: &[f64],
    horizon: f64,
    plan: Plan,
    reps: usize,
    seed: u64,
    tag: &str,
) -> Result<(Vec<Vec<f64>>, u64)> {
    let rows = match plan.engine {
        Engine::Forward => {
            let lattice = Arc::new(TorusLattice::new(d, plan.side)?);
            let skip = usize::from(grid[0] != 0.0);
            try_map_replicas(reps, seed, tag, |_, rng| {
                let mut field = init_product(Arc::clone(&lattice), p, rng)?;
                let mut rec = [OccupationRecorder::new(&field, lattice.origin(), grid, p)?];
                let stats = advance_to(&mut field, horizon, &mut rec, rng)?;
                let [rec] = rec;
                Ok((rec.into_path().centered()[skip..].to_vec(), stats.events))
            })?
        }
        _ => try_map_replicas(reps, seed, tag, |_, rng| {
            let mut sampler = DualPathSampler::new(d, Geometry::Torus { side: plan.side })?;
            let g = sampler.run(horizon, rng)?;
            let spins = g.product_spins(p, rng);
            let occ = g.occupation(grid, &spins);
            Ok((occ.iter().zip(grid).map(|(x, t)| x - p * t).collect(), g.jumps))
        })?,
    };
    let events = rows.iter().map(|r| r.1).sum();
    Ok((rows.into_iter().map(|r| r.0).collect(), events))
}

pub(crate) fn check_budget(total: f64, budget: f64) -> Result<()> {
    if total > budget {
        return Err(Error::Budget { estimate: total, budget });
    }
    Ok(())
}

/// Runs `reps` replicas per `N` and summarizes the scaled occupation paths.
///
/// Refuses up front if the summed event estimate exceeds the budget.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let plans = cfg
        .n_list
        .iter()
        .map(|&n| plan(cfg.d, n, cfg.horizon, cfg.side, cfg.engine, cfg.reps, cfg.safety_k))
        .collect::<Result<Vec<_>>>()?;
    check_budget(plans.iter().map(|p| p.estimate).sum(), cfg.budget)?;

    let mut out = Vec::with_capacity(plans.len());
    for (i, (&n, plan)) in cfg.n_list.iter().zip(plans).enumerate() {
        let abs_grid: Vec<f64> = cfg.grid.iter().map(|t| t * n).collect();
        let tag = format!("clt:{}:{i}", plan.engine.name());
        let (raw, events) = simulate_centered(cfg.d, cfg.p, &abs_grid, cfg.horizon * n, plan, cfg.reps, cfg.master_seed, &tag)?;
        if plan.engine == Engine::Forward {
            let dev = (events as f64 - plan.estimate).abs();
            if dev > 4.0 * plan.estimate.sqrt() + 1.0 {
                return Err(Error::Inconsistency(format!(
                    "forward event count {events} is {dev:.0} away from its Poisson mean {:.0}",
                    plan.estimate
                )));
            }
        }
        let h = h_scale(cfg.d, n)?;
        let paths: Vec<Vec<f64>> = raw.into_iter().map(|r| r.into_iter().map(|x| x / h).collect()).collect();
        let k = cfg.grid.len();
        let (mean, mean_stderr): (Vec<f64>, Vec<f64>) = (0..k)
            .map(|j| mean_and_stderr(&paths.iter().map(|r| r[j]).collect::<Vec<_>>()))
            .unzip();
        let centered_ok = mean.iter().zip(&mean_stderr).all(|(m, s)| m.abs() <= 4.0 * s);
        let cov = covariance_matrix(&paths);
        let cov_stderr = bootstrap_cov_stderr(&paths, cfg.bootstrap, RngSeed::for_replica(cfg.master_seed, "bootstrap", i as u64));
        out.push(RunResult {
            n,
            side: plan.side,
            engine: plan.engine,
            scale_h: h,
            grid: cfg.grid.clone(),
            paths,
            mean,
            mean_stderr,
            cov,
            cov_stderr,
            events,
            event_estimate: plan.estimate,
            centered_ok,
        });
    }
    Ok(out)
}
