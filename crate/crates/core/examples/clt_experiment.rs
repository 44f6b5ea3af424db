//! Scaled occupation-time paths in d = 3 against the limit covariance.

use voterpath::harness::{compare_covariance, limit_kind_for, normality_test, run_clt_experiment, ExperimentConfig};
use voterpath::kernel::QuadratureSpec;

fn main() -> voterpath::Result<()> {
    let cfg = ExperimentConfig::new(3, 0.5, vec![250.0], vec![0.25, 0.5, 1.0], 1000, 42);
    let kind = limit_kind_for(3, 0.5, &QuadratureSpec::default())?;
    for run in run_clt_experiment(&cfg)? {
        println!("N = {}, engine {}, torus side {}, {} walker jumps", run.n, run.engine.name(), run.side, run.events);
        let cmp = compare_covariance(&run, kind)?;
        for e in &cmp.entries {
            println!(
                "  cov({}, {}) = {:.4} +- {:.4}, limit {:.4}, z = {:+.2}",
                run.grid[e.i], run.grid[e.j], e.empirical, e.stderr, e.reference, e.z
            );
        }
        let last: Vec<f64> = run.paths.iter().map(|p| p[p.len() - 1]).collect();
        let nt = normality_test(&last, run.cov[2][2])?;
        println!("  t = 1: KS {:.4} (1% critical {:.4}), skewness {:+.3}, excess kurtosis {:+.3}",
            nt.ks_distance, nt.ks_critical_1pct, nt.skewness, nt.excess_kurtosis);
    }
    Ok(())
}
