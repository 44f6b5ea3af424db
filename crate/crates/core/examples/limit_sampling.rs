//! Covariances of the limiting Gaussian processes and Cholesky sampling.

use voterpath::kernel::{c_const, QuadratureSpec};
use voterpath::limit::{limit_cov_matrix, sample_gaussian_path, LimitKind, LimitTag};

fn main() -> voterpath::Result<()> {
    let spec = QuadratureSpec::default();
    let grid = [0.25, 0.5, 1.0, 2.0];
    for d in [2, 3, 5] {
        let kind = LimitKind { tag: LimitTag::for_dimension(d)?, scale_c: c_const(d, 0.5, &spec)? };
        let m = limit_cov_matrix(kind, &grid)?;
        let sample = sample_gaussian_path(kind, &grid, 20_000, d as u64)?;
        println!("{:?} (C = {:.4}), smallest eigenvalue {:.3e}", kind.tag, kind.scale_c, m.min_eigenvalue);
        for (i, t) in grid.iter().enumerate() {
            let emp = sample.paths.iter().map(|r| r[i] * r[i]).sum::<f64>() / sample.paths.len() as f64;
            println!("  Var at t = {t}: exact {:.5}, sampled {emp:.5}", m.entries[(i, i)]);
        }
    }
    Ok(())
}
