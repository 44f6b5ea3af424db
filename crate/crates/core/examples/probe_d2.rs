//! Numerical evidence for the conjectured d = 2 limit. Nothing printed here
//! is a theorem check.

use voterpath::harness::{conjecture_probe_d2, ProbeConfig};
use voterpath::kernel::QuadratureSpec;

fn main() -> voterpath::Result<()> {
    let mut cfg = ProbeConfig::new(0.5, 300.0, 1000, 5);
    cfg.tail_reps = 20_000;
    let r = conjecture_probe_d2(&cfg, &QuadratureSpec::default())?;
    println!("[{}] N = {}, engine {}", r.label, r.run.n, r.run.engine.name());
    for (t, ratio) in &r.diag_ratios {
        println!("  t = {t}: empirical variance / reference = {ratio:.3}");
    }
    for p in &r.tail {
        println!("  (log t) P(tau > t) at t = {:>6}: {:.3} +- {:.3}  (pi = {:.3})", p.t, p.value, p.stderr, std::f64::consts::PI);
    }
    Ok(())
}
