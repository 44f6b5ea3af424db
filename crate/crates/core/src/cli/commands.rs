//! Subcommand configurations and their result tables.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::output::{Cell, Table};
use crate::dual::meeting_curve_offset;
use crate::error::{Error, Result};
use crate::harness::{
    compare_covariance, conjecture_probe_d2, limit_kind_for, martingale_decomposition_check, run_clt_experiment,
    variance_scaling_sweep, Engine, ExperimentConfig, MdcConfig, ProbeConfig, SweepConfig, PROBE_LABEL,
};
use crate::harness::stats::mean_and_stderr;
use crate::kernel::{
    integrate, log_breaks, p_kernel, p_torus_kernel, phi_resolvent_est, v_potential_est, Constants, QuadratureSpec,
};
use crate::lattice::{Geometry, TorusLattice};
use crate::limit::{limit_cov_matrix, sample_gaussian_path, LimitKind, LimitTag};
use crate::parallel::try_map_replicas;
use crate::voter::{advance_to, init_product, OccupationRecorder};

/// Tables produced by a subcommand, with the total event count and an
/// optional JSON summary for stdout.
pub struct Outcome {
    pub tables: Vec<Table>,
    pub events: u64,
    pub stdout: Option<serde_json::Value>,
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn point_or_origin(x: &[i64], d: usize) -> Result<Vec<i64>> {
    match x.len() {
        0 => Ok(vec![0; d]),
        n if n == d => Ok(x.to_vec()),
        n => Err(Error::invalid(format!("site has {n} coordinates but d = {d}"))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsArgs {
    pub d: usize,
    pub p: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for ConstantsArgs {
    fn default() -> Self {
        ConstantsArgs { d: 3, p: 0.5, quadrature: QuadratureSpec::default() }
    }
}

pub fn constants(a: &ConstantsArgs) -> Result<Outcome> {
    check_p(a.p)?;
    let c = Constants::compute(a.d, a.p, &a.quadrature)?;
    let g0 = crate::kernel::green0_est(a.d, &a.quadrature)?;
    let g1 = if a.d >= 5 { Some(crate::kernel::green1_est(a.d, &a.quadrature)?) } else { None };
    let mut t = Table::new("constants", &["d", "p", "gamma_d", "green0", "green0_err", "green1", "green1_err", "c_d"]);
    t.push(vec![
        a.d.into(),
        a.p.into(),
        c.gamma_d.into(),
        c.green0.into(),
        g0.est_error.into(),
        g1.map_or(f64::NAN, |e| e.value).into(),
        g1.map_or(f64::NAN, |e| e.est_error).into(),
        c.c_d.into(),
    ]);
    let json = serde_json::json!({
        "d": a.d,
        "p": a.p,
        "gamma_d": c.gamma_d,
        "green0": c.green0,
        "green1": c.green1,
        "c_d": c.c_d,
        "est_error": { "green0": g0.est_error, "green1": g1.map(|e| e.est_error) },
    });
    Ok(Outcome { tables: vec![t], events: 0, stdout: Some(json) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelArgs {
    pub d: usize,
    /// Target site; empty means the origin.
    pub x: Vec<i64>,
    pub times: Vec<f64>,
    /// Torus side; 0 means `Z^d`.
    pub side: usize,
    /// Resolvent parameters `N` for `phi_N(x)`.
    pub n_list: Vec<f64>,
    pub quadrature: QuadratureSpec,
}

impl Default for KernelArgs {
    fn default() -> Self {
        KernelArgs {
            d: 3,
            x: Vec::new(),
            times: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            side: 0,
            n_list: Vec::new(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

pub fn kernel(a: &KernelArgs) -> Result<Outcome> {
    let x = point_or_origin(&a.x, a.d)?;
    let spec = &a.quadrature;
    let mut t = Table::new("kernel", &["t", "p_t", "v_t", "v_err"]);
    for &time in &a.times {
        let (p, v) = if a.side == 0 {
            (p_kernel(&x, time, spec)?, v_potential_est(time, &x, spec)?)
        } else {
            let p = p_torus_kernel(&x, time, a.side, spec)?;
            let v = integrate(
                |s| p_torus_kernel(&x, s, a.side, spec).unwrap_or(f64::NAN),
                &log_breaks(time),
                spec.abs_tol,
                spec.rel_tol,
            );
            (p, v)
        };
        t.push(vec![time.into(), p.into(), v.value.into(), v.est_error.into()]);
    }
    let mut r = Table::new("resolvent", &["n", "phi", "phi_err"]);
    for &n in &a.n_list {
        let e = phi_resolvent_est(n, &x, spec)?;
        r.push(vec![n.into(), e.value.into(), e.est_error.into()]);
    }
    Ok(Outcome { tables: vec![t, r], events: 0, stdout: None })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateArgs {
    pub d: usize,
    pub side: usize,
    pub p: f64,
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub budget: f64,
}

impl Default for SimulateArgs {
    fn default() -> Self {
        SimulateArgs {
            d: 2,
            side: 21,
            p: 0.5,
            horizon: 10.0,
            grid: vec![1.0, 2.0, 5.0, 10.0],
            reps: 100,
            master_seed: 0,
            budget: crate::harness::DEFAULT_BUDGET,
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    check_p(a.p)?;
    let lattice = Arc::new(TorusLattice::new(a.d, a.side)?);
    let estimate = crate::harness::forward_event_estimate(a.d, a.side, a.horizon, a.reps);
    if estimate > a.budget {
        return Err(Error::Budget { estimate, budget: a.budget });
    }
    if a.grid.iter().any(|&t| t > a.horizon) {
        return Err(Error::invalid(format!("grid {:?} extends past the horizon {}", a.grid, a.horizon)));
    }
    let rows = try_map_replicas(a.reps, a.master_seed, "simulate", |_, rng| {
        let mut field = init_product(Arc::clone(&lattice), a.p, rng)?;
        let mut rec = [OccupationRecorder::new(&field, lattice.origin(), &a.grid, a.p)?];
        let stats = advance_to(&mut field, a.horizon, &mut rec, rng)?;
        let [rec] = rec;
        Ok((rec.into_path(), stats.events, field.count_ones()))
    })?;
    let mut paths = Table::new("paths", &["replica", "t", "occupation", "centered"]);
    for (i, (path, _, _)) in rows.iter().enumerate() {
        for ((t, v), c) in path.grid.iter().zip(&path.values).zip(path.centered()) {
            paths.push(vec![i.into(), (*t).into(), (*v).into(), c.into()]);
        }
    }
    let mut summary = Table::new("summary", &["t", "mean_centered", "stderr"]);
    if let Some((first, _, _)) = rows.first() {
        for (k, &t) in first.grid.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|r| r.0.centered()[k]).collect();
            let (m, s) = mean_and_stderr(&xs);
            summary.push(vec![t.into(), m.into(), s.into()]);
        }
    }
    let events = rows.iter().map(|r| r.1).sum();
    Ok(Outcome { tables: vec![paths, summary], events, stdout: None })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualArgs {
    pub d: usize,
    /// Torus side; 0 means `Z^d`.
    pub side: usize,
    /// Empty `x` is the origin, empty `y` its first neighbor.
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub offset: f64,
    pub horizons: Vec<f64>,
    pub reps: usize,
    pub p: f64,
    pub master_seed: u64,
}

impl Default for DualArgs {
    fn default() -> Self {
        DualArgs {
            d: 3,
            side: 0,
            x: Vec::new(),
            y: Vec::new(),
            offset: 0.0,
            horizons: vec![1.0, 10.0, 100.0, 1000.0],
            reps: 10_000,
            p: 0.5,
            master_seed: 0,
        }
    }
}

pub fn dual(a: &DualArgs) -> Result<Outcome> {
    check_p(a.p)?;
    let x = point_or_origin(&a.x, a.d)?;
    let y = if a.y.is_empty() {
        let mut e1 = vec![0; a.d];
        e1[0] = 1;
        e1
    } else {
        point_or_origin(&a.y, a.d)?
    };
    let geometry = if a.side == 0 { Geometry::Infinite } else { Geometry::Torus { side: a.side } };
    let curve = meeting_curve_offset(&x, &y, a.offset, &a.horizons, a.reps, a.master_seed, geometry)?;
    let mut t = Table::new("meeting", &["horizon", "offset", "meeting_prob", "stderr", "two_point"]);
    let pq2 = 2.0 * a.p * (1.0 - a.p);
    for m in &curve {
        t.push(vec![m.horizon.into(), m.offset.into(), m.prob.into(), m.stderr.into(), (pq2 * (1.0 - m.prob)).into()]);
    }
    Ok(Outcome { tables: vec![t], events: 0, stdout: None })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitArgs {
    /// 2 gives `vartheta`, 3 gives `zeta`, 4 and above Brownian motion.
    pub d: usize,
    pub p: f64,
    /// Scale of the process; defaults to `C_d(p)`.
    pub scale_c: Option<f64>,
    pub grid: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub quadrature: QuadratureSpec,
}

impl Default for LimitArgs {
    fn default() -> Self {
        LimitArgs {
            d: 3,
            p: 0.5,
            scale_c: None,
            grid: vec![0.25, 0.5, 1.0, 2.0],
            reps: 1000,
            master_seed: 0,
            quadrature: QuadratureSpec::default(),
        }
    }
}

pub fn limit(a: &LimitArgs) -> Result<Outcome> {
    check_p(a.p)?;
    let tag = LimitTag::for_dimension(a.d)?;
    let scale_c = match a.scale_c {
        Some(c) => c,
        None => crate::kernel::c_const(a.d, a.p, &a.quadrature)?,
    };
    let kind = LimitKind { tag, scale_c };
    let m = limit_cov_matrix(kind, &a.grid)?;
    let mut cov = Table::new("covariance", &["i", "j", "s", "t", "cov"]);
    for i in 0..a.grid.len() {
        for j in 0..a.grid.len() {
            cov.push(vec![i.into(), j.into(), a.grid[i].into(), a.grid[j].into(), m.entries[(i, j)].into()]);
        }
    }
    let sample = sample_gaussian_path(kind, &a.grid, a.reps, a.master_seed)?;
    let header: Vec<String> = a.grid.iter().map(|t| t.to_string()).collect();
    let mut samples = Table { name: "samples".into(), header, rows: Vec::new() };
    for row in sample.paths {
        samples.push(row.into_iter().map(Cell::F).collect());
    }
    let json = serde_json::json!({ "kind": tag, "scale_c": scale_c, "min_eigenvalue": m.min_eigenvalue, "jitter": sample.jitter });
    Ok(Outcome { tables: vec![cov, samples], events: 0, stdout: Some(json) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CltArgs {
    pub d: usize,
    pub p: f64,
    pub horizon: f64,
    pub n_list: Vec<f64>,
    pub grid: Vec<f64>,
    pub side: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub engine: Engine,
    pub safety_k: f64,
    pub budget: f64,
    pub bootstrap: usize,
    /// Also write every scaled path to `samples.csv`.
    pub write_samples: bool,
}

impl Default for CltArgs {
    fn default() -> Self {
        let e = ExperimentConfig::new(3, 0.5, vec![100.0, 200.0], vec![0.25, 0.5, 1.0], 1000, 0);
        CltArgs {
            d: e.d,
            p: e.p,
            horizon: e.horizon,
            n_list: e.n_list,
            grid: e.grid,
            side: e.side,
            reps: e.reps,
            master_seed: e.master_seed,
            engine: e.engine,
            safety_k: e.safety_k,
            budget: e.budget,
            bootstrap: e.bootstrap,
            write_samples: false,
        }
    }
}

impl CltArgs {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            d: self.d,
            p: self.p,
            horizon: self.horizon,
            n_list: self.n_list.clone(),
            grid: self.grid.clone(),
            side: self.side,
            reps: self.reps,
            master_seed: self.master_seed,
            engine: self.engine,
            safety_k: self.safety_k,
            budget: self.budget,
            bootstrap: self.bootstrap,
        }
    }
}

pub fn clt(a: &CltArgs) -> Result<Outcome> {
    let spec = QuadratureSpec::default();
    let runs = run_clt_experiment(&a.experiment())?;
    let kind = limit_kind_for(a.d, a.p, &spec)?;
    let mut results = Table::new(
        "results",
        &["n", "side", "engine", "t_i", "t_j", "mean_i", "mean_stderr_i", "cov", "cov_stderr", "limit_cov"],
    );
    let mut samples = Table::new("samples", &["n", "replica", "t", "scaled"]);
    let mut events = 0;
    for r in &runs {
        events += r.events;
        for i in 0..r.grid.len() {
            for j in 0..r.grid.len() {
                results.push(vec![
                    r.n.into(),
                    r.side.into(),
                    r.engine.name().into(),
                    r.grid[i].into(),
                    r.grid[j].into(),
                    r.mean[i].into(),
                    r.mean_stderr[i].into(),
                    r.cov[i][j].into(),
                    r.cov_stderr[i][j].into(),
                    kind.cov(r.grid[i], r.grid[j])?.into(),
                ]);
            }
        }
        if a.write_samples {
            for (k, path) in r.paths.iter().enumerate() {
                for (t, v) in r.grid.iter().zip(path) {
                    samples.push(vec![r.n.into(), k.into(), (*t).into(), (*v).into()]);
                }
            }
        }
    }
    let mut tables = vec![results];
    if a.write_samples {
        tables.push(samples);
    }
    let summary: Vec<_> = runs
        .iter()
        .map(|r| {
            let cmp = (r.grid.len() >= 3).then(|| compare_covariance(r, kind)).transpose()?;
            Ok(serde_json::json!({
                "n": r.n,
                "side": r.side,
                "engine": r.engine,
                "centered_ok": r.centered_ok,
                "max_abs_z": cmp.as_ref().map(|c| c.max_abs_z),
                "max_diag_rel_err": cmp.as_ref().map(|c| c.max_diag_rel_err),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(Outcome { tables, events, stdout: Some(serde_json::Value::Array(summary)) })
}

pub fn sweep(a: &SweepConfig) -> Result<Outcome> {
    let r = variance_scaling_sweep(a)?;
    let mut t = Table::new("sweep", &["n", "side", "variance", "stderr", "events", "var_over_n_log_n"]);
    for (k, p) in r.points.iter().enumerate() {
        let ratio = r.n_log_n_ratios.as_ref().map_or(f64::NAN, |v| v[k]);
        t.push(vec![p.n.into(), p.side.into(), p.variance.into(), p.stderr.into(), p.events.into(), ratio.into()]);
    }
    let mut fit = Table::new("fit", &["d", "slope", "slope_stderr", "n_log_n_variation", "degenerate"]);
    fit.push(vec![
        r.d.into(),
        r.slope.unwrap_or(f64::NAN).into(),
        r.slope_stderr.unwrap_or(f64::NAN).into(),
        r.n_log_n_variation.unwrap_or(f64::NAN).into(),
        r.degenerate.into(),
    ]);
    let events = r.points.iter().map(|p| p.events).sum();
    Ok(Outcome { tables: vec![t, fit], events, stdout: None })
}

pub fn probe2d(a: &ProbeConfig) -> Result<Outcome> {
    let r = conjecture_probe_d2(a, &QuadratureSpec::default())?;
    let mut t = Table::new("probe", &["label", "quantity", "t", "value", "stderr"]);
    for &(time, ratio) in &r.diag_ratios {
        t.push(vec![PROBE_LABEL.into(), "diag_cov_ratio".into(), time.into(), ratio.into(), f64::NAN.into()]);
    }
    for p in &r.tail {
        t.push(vec![PROBE_LABEL.into(), "log_t_tail".into(), p.t.into(), p.value.into(), p.stderr.into()]);
    }
    let mut c = Table::new("probe_cov", &["label", "t_i", "t_j", "empirical", "reference", "stderr", "z"]);
    if let Some(cmp) = &r.comparison {
        for e in &cmp.entries {
            c.push(vec![
                PROBE_LABEL.into(),
                r.run.grid[e.i].into(),
                r.run.grid[e.j].into(),
                e.empirical.into(),
                e.reference.into(),
                e.stderr.into(),
                e.z.into(),
            ]);
        }
    }
    Ok(Outcome { tables: vec![t, c], events: r.run.events, stdout: None })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdcArgs {
    pub p: f64,
    pub t: f64,
    pub n_list: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub side: usize,
    pub safety_k: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for MdcArgs {
    fn default() -> Self {
        MdcArgs {
            p: 0.5,
            t: 1.0,
            n_list: vec![250.0, 500.0, 1000.0],
            reps: 1000,
            master_seed: 0,
            side: 0,
            safety_k: 6.0,
            quadrature: QuadratureSpec::default(),
        }
    }
}

pub fn mdc(a: &MdcArgs) -> Result<Outcome> {
    let mut t = Table::new(
        "mdc",
        &[
            "n",
            "side",
            "mean_m",
            "mean_m_stderr",
            "var_v0_scaled",
            "var_v0_exact_scaled",
            "var_m_scaled",
            "limit_var_scaled",
        ],
    );
    let mut events = 0;
    for (i, &n) in a.n_list.iter().enumerate() {
        let cfg = MdcConfig {
            p: a.p,
            t: a.t,
            n,
            reps: a.reps,
            master_seed: crate::rng::RngSeed::for_replica(a.master_seed, "mdc-n", i as u64).stream_id,
            side: a.side,
            safety_k: a.safety_k,
        };
        let r = martingale_decomposition_check(&cfg, &a.quadrature)?;
        events += r.jumps;
        t.push(vec![
            n.into(),
            r.side.into(),
            r.mean_m.into(),
            r.mean_m_stderr.into(),
            r.var_v0_scaled().into(),
            (r.var_v0_exact / r.scale).into(),
            r.var_m_scaled().into(),
            r.limit_var_scaled.into(),
        ]);
    }
    Ok(Outcome { tables: vec![t], events, stdout: None })
}
