//! Exact check of the one-point duality on a tiny torus.
//!
//! The voter generator on all `2^(L^d)` configurations is exponentiated
//! densely; `E_eta[eta_t(x)]` must equal `sum_y p^L_t(x, y) eta(y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{p_torus_kernel, QuadratureSpec};
use crate::lattice::TorusLattice;

/// Largest number of sites for which the dense state space is built.
pub const MAX_ORACLE_SITES: usize = 12;

/// Generator of the voter model on every configuration of `lattice`; bit `i` of a state is `eta(i)`.
pub fn voter_generator(lattice: &TorusLattice) -> Result<DMatrix<f64>> {
    let n = lattice.n_sites();
    if n > MAX_ORACLE_SITES {
        return Err(Error::Capacity(format!(
            "dense duality oracle needs at most {MAX_ORACLE_SITES} sites, torus has {n}"
        )));
    }
    let states = 1usize << n;
    let mut q = DMatrix::<f64>::zeros(states, states);
    for s in 0..states {
        for x in 0..n {
            for dir in 0..lattice.degree() {
                let y = lattice.neighbor(x, dir);
                if (s >> x) & 1 != (s >> y) & 1 {
                    q[(s, s ^ (1 << x))] += 1.0;
                    q[(s, s)] -= 1.0;
                }
            }
        }
    }
    Ok(q)
}

/// Returns `(E_eta[eta_t(x)]` from the generator exponential, `sum_y p^L_t(x, y) eta(y))`.
pub fn exact_duality_oracle(lattice: &TorusLattice, eta: &[bool], x: usize, t: f64) -> Result<(f64, f64)> {
    if eta.len() != lattice.n_sites() || x >= lattice.n_sites() {
        return Err(Error::invalid("configuration or site does not match the lattice"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    let q = voter_generator(lattice)?;
    let semigroup = (q * t).exp();
    let state: usize = eta.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum();
    let observable = DVector::from_fn(semigroup.ncols(), |s, _| ((s >> x) & 1) as f64);
    let lhs = semigroup.row(state).transpose().dot(&observable);

    let spec = QuadratureSpec { abs_tol: 1e-14, ..QuadratureSpec::default() };
    let cx = lattice.coords(x);
    let mut rhs = 0.0;
    for (y, &on) in eta.iter().enumerate() {
        if on {
            let dy: Vec<i64> = lattice.coords(y).iter().zip(&cx).map(|(&a, &b)| a as i64 - b as i64).collect();
            rhs += p_torus_kernel(&dy, t, lattice.side(), &spec)?;
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_configurations() {
        let lat = TorusLattice::new(2, 3).unwrap();
        for value in [false, true] {
            let (lhs, rhs) = exact_duality_oracle(&lat, &[value; 9], 4, 1.0).unwrap();
            let expect = value as u8 as f64;
            assert!((lhs - expect).abs() < 1e-10 && (rhs - expect).abs() < 1e-10);
        }
        let big = TorusLattice::new(2, 4).unwrap();
        assert!(matches!(exact_duality_oracle(&big, &[true; 16], 0, 1.0), Err(Error::Capacity(_))));
    }
}
