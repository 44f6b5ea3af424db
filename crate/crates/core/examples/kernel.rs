//! Transition kernel, occupation potential and resolvent of the rate-2d walk.

use voterpath::kernel::{p_kernel, p_torus_kernel, phi_resolvent, sum_phi_sq, v_potential, QuadratureSpec};

fn main() -> voterpath::Result<()> {
    let spec = QuadratureSpec::default();
    let sites: [&[i64]; 3] = [&[0, 0, 0], &[1, 0, 0], &[1, 1, 0]];
    println!("{:>10} {:>12} {:>14} {:>14} {:>14}", "site", "t", "p_t(x)", "torus L=5", "v(t,x)");
    for x in sites {
        for t in [0.5, 2.0, 10.0] {
            let p = p_kernel(x, t, &spec)?;
            let pl = p_torus_kernel(x, t, 5, &spec)?;
            let v = v_potential(t, x, &spec)?;
            println!("{:>10} {t:>12} {p:>14.6e} {pl:>14.6e} {v:>14.6e}", format!("{x:?}"));
        }
    }

    println!();
    println!("resolvent phi_N(O) and sum_x phi_N(x)^2 in d = 4 and 5");
    for n in [1e2, 1e3, 1e4] {
        let phi = phi_resolvent(n, &[0, 0, 0, 0], &spec)?;
        let s4 = sum_phi_sq(n, 4, &spec)?;
        let s5 = sum_phi_sq(n, 5, &spec)?;
        println!("N = {n:>8}: phi = {phi:.6}, d=4 sum / log N = {:.6}, d=5 sum = {s5:.6}", s4 / n.ln());
    }
    Ok(())
}
