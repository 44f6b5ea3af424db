//! Growth of Var(xi_N - pN) with N in d = 3, 4 and 5.

use voterpath::harness::{variance_scaling_sweep, SweepConfig, VarianceEstimator};

fn main() -> voterpath::Result<()> {
    let n_list = vec![250.0, 500.0, 1000.0, 2000.0];
    for (d, reps, estimator) in [
        (3, 300, VarianceEstimator::Simulation),
        (4, 20_000, VarianceEstimator::DualIdentity),
        (5, 20_000, VarianceEstimator::DualIdentity),
    ] {
        let mut cfg = SweepConfig::new(d, 0.5, n_list.clone(), reps, 11);
        cfg.estimator = estimator;
        let r = variance_scaling_sweep(&cfg)?;
        println!("d = {d} ({estimator:?}, {reps} replicas)");
        for p in &r.points {
            println!("  N = {:>6}: Var = {:>10.2} +- {:.2}", p.n, p.variance, p.stderr);
        }
        println!("  slope {:.3} +- {:.3}", r.slope.unwrap_or(f64::NAN), r.slope_stderr.unwrap_or(f64::NAN));
        if let Some(v) = r.n_log_n_variation {
            println!("  Var / (N log N) varies by {:.1}%", 100.0 * v);
        }
    }
    Ok(())
}
