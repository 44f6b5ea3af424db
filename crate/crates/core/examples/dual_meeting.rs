//! Coalescing walks: meeting probabilities of neighbors and the dual
//! occupation covariance.

use voterpath::dual::{meeting_curve_offset, occupation_cov_dual};
use voterpath::lattice::Geometry;

fn main() -> voterpath::Result<()> {
    let horizons = [1.0, 10.0, 100.0, 1000.0];
    for d in [2, 3, 4] {
        let mut x = vec![0; d];
        let y = x.clone();
        x[0] = 1;
        let curve = meeting_curve_offset(&x, &y, 0.0, &horizons, 20_000, 1, Geometry::Infinite)?;
        let line: Vec<String> = curve.iter().map(|m| format!("{:.4}", m.prob)).collect();
        println!("d = {d}: P(tau <= t) at t = {horizons:?}: {}", line.join(", "));
    }

    let (n, p) = (200.0, 0.5);
    let cov = occupation_cov_dual(n, n, p, 3, 20_000, 2, Geometry::Infinite)?;
    println!("Var(xi_N - pN) at N = {n}, d = 3: {:.2} +- {:.2}", cov.value, cov.stderr);
    Ok(())
}
