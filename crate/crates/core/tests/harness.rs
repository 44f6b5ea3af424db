use voterpath::dual::occupation_cov_dual;
use voterpath::harness::{
    compare_covariance, conjecture_probe_d2, finite_size_advisor, forward_event_estimate, martingale_decomposition_check,
    normality_test, run_clt_experiment, variance_scaling_sweep, Engine, ExperimentConfig, ForwardCap, MdcConfig,
    ProbeConfig, SweepConfig, VarianceEstimator, PROBE_LABEL,
};
use voterpath::kernel::{h_scale, QuadratureSpec};
use voterpath::lattice::Geometry;
use voterpath::limit::{sample_gaussian_path, LimitKind, LimitTag};
use voterpath::parallel::with_threads;
use voterpath::Error;

#[test]
fn advisor_arithmetic() {
    assert_eq!(finite_size_advisor(3, 450.0, 1.0, 6.0, None).unwrap().side, 181);
    assert_eq!(finite_size_advisor(3, 225.0, 2.0, 6.0, None).unwrap().side, 181);
    // k = 1: sqrt(2 * 50) = 10 -> 11, sqrt(2 * 40.5) = 9 -> 9.
    assert_eq!(finite_size_advisor(3, 50.0, 1.0, 1.0, None).unwrap().side, 11);
    assert_eq!(finite_size_advisor(3, 40.5, 1.0, 1.0, None).unwrap().side, 9);
    let bounds: Vec<f64> =
        [1.0, 2.0, 3.0, 6.0].iter().map(|&k| finite_size_advisor(3, 100.0, 1.0, k, None).unwrap().wrap_bound).collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]), "{bounds:?}");
    let cap = ForwardCap { reps: 100, budget: 1e9 };
    let capped = finite_size_advisor(3, 450.0, 1.0, 6.0, Some(cap)).unwrap();
    assert!(capped.capped && capped.side % 2 == 1);
    assert!(forward_event_estimate(3, capped.side, 450.0, 100) <= 1e9);
}

#[test]
fn full_density_gives_zero_paths() {
    let mut cfg = ExperimentConfig::new(3, 1.0, vec![50.0], vec![0.25, 0.5, 1.0], 200, 4);
    cfg.bootstrap = 50;
    for engine in [Engine::Dual, Engine::Forward] {
        cfg.engine = engine;
        cfg.side = if engine == Engine::Forward { 9 } else { 0 };
        let r = run_clt_experiment(&cfg).unwrap().remove(0);
        assert!(r.paths.iter().flatten().all(|&x| x == 0.0));
        assert!(r.cov.iter().flatten().all(|&x| x == 0.0));
        let cmp = compare_covariance(&r, LimitKind { tag: LimitTag::ZetaD3, scale_c: 0.0 }).unwrap();
        assert_eq!(cmp.max_abs_z, 0.0);
        assert_eq!(cmp.max_diag_rel_err, 0.0);
    }
}

#[test]
fn comparison_needs_three_grid_points() {
    let mut cfg = ExperimentConfig::new(3, 0.5, vec![20.0], vec![0.5, 1.0], 100, 0);
    cfg.bootstrap = 20;
    let r = run_clt_experiment(&cfg).unwrap().remove(0);
    let kind = LimitKind { tag: LimitTag::ZetaD3, scale_c: 1.0 };
    assert!(matches!(compare_covariance(&r, kind), Err(Error::InvalidArgument(_))));
}

#[test]
fn empirical_mean_is_centered() {
    let cfg = ExperimentConfig::new(3, 0.5, vec![250.0], vec![0.25, 0.5, 1.0], 500, 21);
    let r = run_clt_experiment(&cfg).unwrap().remove(0);
    assert!(r.centered_ok);
    for (m, s) in r.mean.iter().zip(&r.mean_stderr) {
        assert!(m.abs() <= 4.0 * s, "mean {m} stderr {s}");
    }
}

#[test]
fn experiments_are_deterministic_across_pools() {
    let mut cfg = ExperimentConfig::new(3, 0.3, vec![40.0, 80.0], vec![0.5, 1.0], 150, 99);
    cfg.bootstrap = 40;
    let a = run_clt_experiment(&cfg).unwrap();
    let b = with_threads(1, || run_clt_experiment(&cfg)).unwrap().unwrap();
    let c = with_threads(3, || run_clt_experiment(&cfg)).unwrap().unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn oversized_requests_are_refused() {
    let mut cfg = ExperimentConfig::new(3, 0.5, vec![1e7], vec![0.5, 1.0], 1000, 0);
    cfg.engine = Engine::Forward;
    match run_clt_experiment(&cfg) {
        Err(Error::Budget { estimate, budget }) => assert!(estimate > budget),
        other => panic!("expected a budget refusal, got {other:?}"),
    }
    let mut sweep = SweepConfig::new(3, 0.5, vec![1e6, 2e6, 4e6, 8e6], 1000, 0);
    sweep.engine = Engine::Forward;
    assert!(matches!(variance_scaling_sweep(&sweep), Err(Error::Budget { .. })));
}

#[test]
fn invalid_configs_are_rejected() {
    let base = ExperimentConfig::new(3, 0.5, vec![100.0], vec![0.5, 1.0], 200, 0);
    let mut bad = vec![];
    let mut c = base.clone();
    c.p = 1.5;
    bad.push(c);
    let mut c = base.clone();
    c.grid = vec![1.0, 0.5];
    bad.push(c);
    let mut c = base.clone();
    c.grid = vec![0.5, 2.0];
    bad.push(c);
    let mut c = base.clone();
    c.reps = 50;
    bad.push(c);
    let mut c = base.clone();
    c.n_list = vec![2.0];
    bad.push(c);
    let mut c = base;
    c.d = 1;
    bad.push(c);
    for c in bad {
        assert!(run_clt_experiment(&c).is_err(), "{c:?}");
    }
}

/// The forward simulator and the one-walk dual formula target the same
/// covariance on the same torus.
#[test]
fn simulation_and_dual_covariances_agree() {
    let (n, side, p) = (100.0, 15, 0.5);
    let mut cfg = ExperimentConfig::new(3, p, vec![n], vec![0.5, 1.0], 400, 8);
    cfg.engine = Engine::Forward;
    cfg.side = side;
    cfg.bootstrap = 300;
    let r = run_clt_experiment(&cfg).unwrap().remove(0);
    let h2 = h_scale(3, n).unwrap().powi(2);
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let (s, t) = (r.grid[i] * n, r.grid[j] * n);
        let dual = occupation_cov_dual(s, t, p, 3, 20_000, 5 + i as u64 + j as u64, Geometry::Torus { side }).unwrap();
        let sim = r.cov[i][j] * h2;
        let se = (r.cov_stderr[i][j] * h2).hypot(dual.stderr);
        assert!((sim - dual.value).abs() < 3.0 * se, "({i},{j}) sim {sim} dual {} se {se}", dual.value);
    }
}

#[test]
fn normality_self_test_against_the_sampler() {
    let kind = LimitKind { tag: LimitTag::ZetaD3, scale_c: 0.7 };
    let var = kind.cov(1.0, 1.0).unwrap();
    let trials = 100;
    let mut passes = 0;
    for seed in 0..trials {
        let paths = sample_gaussian_path(kind, &[0.5, 1.0], 1000, seed).unwrap();
        let xs: Vec<f64> = paths.paths.iter().map(|r| r[1]).collect();
        if normality_test(&xs, var).unwrap().ks_pass {
            passes += 1;
        }
    }
    assert!(passes >= 95, "{passes} of {trials} trials passed");
}

#[test]
fn normality_degenerate_cases() {
    let zeros = vec![0.0; 600];
    let r = normality_test(&zeros, 0.0).unwrap();
    assert!(r.ks_pass && !r.degenerate_reference);
    let mut ones = zeros.clone();
    ones[0] = 1.0;
    let r = normality_test(&ones, 0.0).unwrap();
    assert!(!r.ks_pass && r.degenerate_reference);
    assert!(normality_test(&zeros[..100], 1.0).is_err());
}

#[test]
fn degenerate_sweeps() {
    for p in [0.0, 1.0] {
        let r = variance_scaling_sweep(&SweepConfig::new(3, p, vec![250.0, 500.0, 1000.0, 2000.0], 100, 0)).unwrap();
        assert!(r.degenerate && r.slope.is_none());
        assert!(r.points.iter().all(|q| q.variance == 0.0));
    }
    let short = SweepConfig::new(3, 0.5, vec![250.0, 500.0, 1000.0], 100, 0);
    assert!(variance_scaling_sweep(&short).is_err());
    let narrow = SweepConfig::new(3, 0.5, vec![250.0, 300.0, 400.0, 500.0], 100, 0);
    assert!(variance_scaling_sweep(&narrow).is_err());
}

#[test]
fn identity_sweep_in_high_dimension_is_linear() {
    let mut cfg = SweepConfig::new(5, 0.5, vec![250.0, 500.0, 1000.0, 2000.0], 10_000, 3);
    cfg.estimator = VarianceEstimator::DualIdentity;
    let r = variance_scaling_sweep(&cfg).unwrap();
    let slope = r.slope.unwrap();
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn martingale_check_degenerate_and_centered() {
    let spec = QuadratureSpec::default();
    for p in [0.0, 1.0] {
        let r = martingale_decomposition_check(&MdcConfig::new(p, 1.0, 100.0, 100, 0), &spec).unwrap();
        assert_eq!((r.mean_m, r.var_v0, r.var_m), (0.0, 0.0, 0.0));
    }
    let r = martingale_decomposition_check(&MdcConfig::new(0.5, 1.0, 100.0, 400, 6), &spec).unwrap();
    assert!(r.martingale_mean_ok(), "mean {} stderr {}", r.mean_m, r.mean_m_stderr);
    // The sampled initial term matches its exact variance.
    assert!((r.var_v0 - r.var_v0_exact).abs() < 4.0 * r.var_v0_stderr, "{r:?}");
}

#[test]
fn probe_is_labelled_and_degenerate_at_full_density() {
    let mut cfg = ProbeConfig::new(1.0, 50.0, 100, 0);
    cfg.tail_times = vec![10.0, 100.0];
    cfg.tail_reps = 2000;
    let r = conjecture_probe_d2(&cfg, &QuadratureSpec::default()).unwrap();
    assert_eq!(r.label, PROBE_LABEL);
    assert!(r.run.paths.iter().flatten().all(|&x| x == 0.0));
    assert!(r.diag_ratios.iter().all(|&(_, q)| q == 1.0));
    assert_eq!(r.tail.len(), 2);
    assert!(r.tail.iter().all(|t| t.value > 0.0));
}
