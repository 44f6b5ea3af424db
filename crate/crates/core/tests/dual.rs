use std::sync::Arc;

use rand::Rng;
use voterpath::dual::*;
use voterpath::kernel::{c_const, gamma_d, QuadratureSpec};
use voterpath::lattice::{Geometry, TorusLattice};
use voterpath::parallel::map_replicas;
use voterpath::rng::RngSeed;
use voterpath::voter::{advance_to, init_product, two_point_statistic, MeanEstimate, OccupationRecorder};

#[test]
fn exact_duality_on_the_small_torus() {
    let lat = TorusLattice::new(2, 3).unwrap();
    let mut rng = RngSeed::new(2024, 0).rng();
    for _ in 0..20 {
        let eta: Vec<bool> = (0..9).map(|_| rng.random::<bool>()).collect();
        let x = rng.random_range(0..9);
        for t in [0.1, 1.0, 5.0] {
            let (lhs, rhs) = exact_duality_oracle(&lat, &eta, x, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "t={t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn neighbors_meet_with_probability_one_minus_gamma() {
    let g = gamma_d(3, &QuadratureSpec::default()).unwrap();
    let est = meeting_prob_pair(&[0, 0, 0], &[1, 0, 0], 1e4, 4000, 31, Geometry::Infinite).unwrap();
    assert!((est.prob - (1.0 - g)).abs() < 3.0 * est.stderr + 0.005, "{est:?} vs {}", 1.0 - g);
}

#[test]
fn difference_walk_agrees_with_two_walkers() {
    for (x, y, t) in [(vec![0, 0, 0], vec![1, 0, 0], 5.0), (vec![0, 0], vec![2, 1], 3.0)] {
        let a = meeting_prob_pair(&x, &y, t, 20_000, 5, Geometry::Infinite).unwrap();
        let b = meeting_prob_pair_two_walker(&x, &y, t, 20_000, 6, Geometry::Infinite).unwrap();
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.prob - b.prob).abs() < 3.0 * se, "{a:?} vs {b:?}");
    }
}

#[test]
fn meeting_curve_is_monotone() {
    let hs = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let curve = meeting_curve_offset(&[0, 0, 0], &[1, 1, 0], 0.0, &hs, 2000, 9, Geometry::Infinite).unwrap();
    assert!(curve.windows(2).all(|w| w[0].prob <= w[1].prob));
}

#[test]
fn eta_covariance_matches_forward_ensemble() {
    let (r, theta, p) = (10.0, 20.0, 0.5);
    let dual = cov_eta_dual(r, theta, p, 3, 40_000, 17, Geometry::Torus { side: 31 }).unwrap();
    // Forward: average the covariance over all sites of each replica.
    let lat = Arc::new(TorusLattice::new(3, 31).unwrap());
    let samples = map_replicas(100, 18, "cov-forward", |_, rng| {
        let mut f = init_product(Arc::clone(&lat), p, rng).unwrap();
        advance_to(&mut f, r, &mut [], rng).unwrap();
        let early = f.clone();
        advance_to(&mut f, theta, &mut [], rng).unwrap();
        let n = lat.n_sites();
        let ones_a = early.count_ones() as f64 / n as f64;
        let ones_b = f.count_ones() as f64 / n as f64;
        let both = (0..n).filter(|&x| early.get(x) && f.get(x)).count() as f64 / n as f64;
        // Centering at p uses the known mean of the product law.
        both - p * ones_b - p * ones_a + p * p
    });
    let fwd = MeanEstimate::from_samples(&samples);
    let se = (fwd.stderr.powi(2) + dual.stderr.powi(2)).sqrt();
    assert!((fwd.mean - dual.value).abs() < 3.0 * se, "forward {fwd:?} dual {dual:?}");
}

#[test]
fn occupation_variance_approaches_limit() {
    let spec = QuadratureSpec::default();
    let target = c_const(3, 0.5, &spec).unwrap().powi(2) * (2.0 - 2f64.sqrt());
    for t0 in [100.0, 200.0, 400.0f64] {
        let c = occupation_cov_dual(t0, t0, 0.5, 3, 4000, 23, Geometry::Infinite).unwrap();
        let ratio = c.value / t0.powf(1.5);
        assert!((ratio / target - 1.0).abs() < 0.2, "T0={t0}: {ratio} vs {target}");
    }
    assert_eq!(occupation_cov_dual(3.0, 5.0, 0.0, 3, 10, 1, Geometry::Infinite).unwrap().value, 0.0);
}

#[test]
fn two_point_statistic_matches_dual() {
    let (d, side, t, p) = (2usize, 11usize, 3.0, 0.4);
    let lat = Arc::new(TorusLattice::new(d, side).unwrap());
    let fields: Vec<_> = map_replicas(3000, 41, "two-point", |_, rng| {
        let mut f = init_product(Arc::clone(&lat), p, rng).unwrap();
        advance_to(&mut f, t, &mut [], rng).unwrap();
        f
    });
    let y = lat.site_of(&[1, 0]);
    let fwd = two_point_statistic(&fields, 0, y).unwrap();
    let m = meeting_prob_pair(&[0, 0], &[1, 0], t, 100_000, 42, Geometry::Torus { side }).unwrap();
    let dual = 2.0 * p * (1.0 - p) * (1.0 - m.prob);
    let se = (fwd.stderr.powi(2) + (2.0 * p * (1.0 - p) * m.stderr).powi(2)).sqrt();
    assert!((fwd.mean - dual).abs() < 3.0 * se, "{fwd:?} vs {dual}");
    let at_zero: Vec<_> = map_replicas(2000, 43, "two-point-0", |_, rng| init_product(Arc::clone(&lat), p, rng).unwrap());
    let z = two_point_statistic(&at_zero, 0, y).unwrap();
    assert!((z.mean - 2.0 * p * (1.0 - p)).abs() < 3.0 * z.stderr);
}

#[test]
fn complementary_pairs_are_independent() {
    let sites = [vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 1, 1]];
    let (a, b, both) =
        meeting::independent_pair_events(&sites, [1.0, 1.5, 2.0, 3.0], 50_000, 3, Geometry::Infinite).unwrap();
    let se = (a * b * (1.0 - a * b) / 50_000.0).sqrt();
    assert!((both - a * b).abs() < 3.0 * se + 1e-3, "{both} vs {}", a * b);
}

#[test]
fn single_walker_spreads_like_the_kernel() {
    let t = 4.0;
    let sq = map_replicas(20_000, 8, "spread", |_, rng| {
        let sys = simulate_coalescing(&[(vec![0, 0, 0], 0.0)], t, Geometry::Infinite, rng).unwrap();
        sys.walkers[0].position.iter().map(|c| (c * c) as f64).sum::<f64>()
    });
    let m = MeanEstimate::from_samples(&sq);
    assert!((m.mean - 6.0 * t).abs() < 4.0 * m.stderr, "{m:?}");
}

/// The backward path sampler and the forward engine must give the same law
/// of the occupation path on a torus.
#[test]
fn dual_path_sampler_matches_forward_engine() {
    let (d, side, p) = (2usize, 5usize, 0.3);
    let grid = [0.5, 1.5, 3.0];
    let reps = 40_000;
    let lat = Arc::new(TorusLattice::new(d, side).unwrap());
    let forward = map_replicas(reps, 51, "equiv-forward", |_, rng| {
        let mut f = init_product(Arc::clone(&lat), p, rng).unwrap();
        let mut rec = vec![OccupationRecorder::new(&f, 0, &grid, p).unwrap()];
        advance_to(&mut f, 3.0, &mut rec, rng).unwrap();
        rec[0].path().values[1..].to_vec()
    });
    let backward = map_replicas(reps, 52, "equiv-dual", |_, rng| {
        let mut s = DualPathSampler::new(d, Geometry::Torus { side }).unwrap();
        let g = s.run(3.0, rng).unwrap();
        let spins = g.product_spins(p, rng);
        g.occupation(&grid, &spins)
    });
    let moments = |rows: &Vec<Vec<f64>>| {
        let k = grid.len();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..k).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n).collect();
        let mut cov = vec![0.0; k * k];
        for r in rows {
            for i in 0..k {
                for j in 0..k {
                    cov[i * k + j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1.0);
                }
            }
        }
        (mean, cov)
    };
    let (mf, cf) = moments(&forward);
    let (mb, cb) = moments(&backward);
    for i in 0..grid.len() {
        let se = ((cf[i * 4] + cb[i * 4]) / reps as f64).sqrt();
        assert!((mf[i] - mb[i]).abs() < 4.0 * se, "mean {i}: {} vs {}", mf[i], mb[i]);
    }
    for (a, b) in cf.iter().zip(&cb) {
        assert!((a - b).abs() < 0.05 * a.abs().max(0.05), "cov {a} vs {b}");
    }
}

#[test]
fn fourpoint_bound_holds_for_neighbors() {
    let sites = [vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]];
    let run = FourPointRun { side: 9, p: 0.5, forward_reps: 300, dual_reps: 20_000, seed: 77 };
    let report = fourpoint_bound_check([1.0, 2.0, 3.0, 4.0], sites.clone(), run).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.lhs_stderr < report.rhs / 5.0);
    let degenerate = fourpoint_bound_check([1.0, 2.0, 3.0, 4.0], sites, FourPointRun { p: 1.0, ..run }).unwrap();
    assert_eq!(degenerate.lhs, 0.0);
}
