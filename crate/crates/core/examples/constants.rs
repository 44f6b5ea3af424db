//! Prints the random-walk constants gamma_d, the Green integrals and C_d.

use voterpath::kernel::{Constants, QuadratureSpec, green0_est};

fn main() -> voterpath::Result<()> {
    let spec = QuadratureSpec::default();
    let p = 0.5;
    println!("{:>3} {:>12} {:>10} {:>12} {:>10} {:>10}", "d", "green0", "err", "green1", "gamma_d", "C_d");
    for d in 3..=7 {
        let c = Constants::compute(d, p, &spec)?;
        let err = green0_est(d, &spec)?.est_error;
        let g1 = c.green1.map_or("-".to_string(), |g| format!("{g:.8}"));
        println!("{d:>3} {:>12.8} {err:>10.1e} {g1:>12} {:>10.6} {:>10.6}", c.green0, c.gamma_d, c.c_d);
    }
    println!("C_2 at p = {p}: {:.6}", voterpath::kernel::c_const(2, p, &spec)?);
    Ok(())
}
