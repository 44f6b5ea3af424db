//! Numerics for the continuous-time simple random walk on `Z^d`.
//!
//! The walk jumps to each of its `2d` neighbors at rate 1. Everything here
//! is a pure function of its arguments: transition kernels on `Z^d` and on
//! the torus, time integrals of the kernel (Green's functions, the
//! potentials `v(t, x)` and `phi_N(x)`), and the constants built from them.
//!
//! Improper time integrals are split at a cut `T`: `[0, T]` is integrated by
//! adaptive Gauss–Kronrod quadrature and `[T, inf)` in closed form from the
//! large-time expansion of the kernel, `p_s(O, x) ~ (4 pi s)^{-d/2} (1 + b_1/s + ...)`.

mod quad;
mod series;
pub mod torus;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn invalid(msg: impl Into<String>) -> Error {
    Error::invalid(msg)
}
pub use quad::{integrate, log_breaks, Estimate};
pub use series::{p1, p1_torus, p_d};

/// Number of terms kept in the large-time expansion of one coordinate kernel.
const TAIL_TERMS: usize = 6;

/// Tolerances and the cut between numerical and asymptotic integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Decay power of the kernel at the origin; `None` means the lattice value `d/2`.
    pub tail_exponent: Option<f64>,
    pub max_time_cut: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-10, rel_tol: 1e-8, tail_exponent: None, max_time_cut: 1e3 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(invalid("quadrature tolerances must be positive"));
        }
        if !(self.max_time_cut > 0.0) || !self.max_time_cut.is_finite() {
            return Err(invalid("max_time_cut must be positive and finite"));
        }
        Ok(())
    }

    fn check_tail_exponent(&self, d: usize) -> Result<()> {
        match self.tail_exponent {
            Some(e) if (e - d as f64 / 2.0).abs() > 1e-12 => Err(invalid(format!(
                "tail_exponent {e} does not match the lattice decay d/2 = {}",
                d as f64 / 2.0
            ))),
            _ => Ok(()),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(())
}

/// `P(X_t = k)` for one coordinate of the walk.
pub fn p1_kernel(k: i64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_time(t)?;
    Ok(p1(k, t))
}

/// `p_t(O, x)` on `Z^d` with `d = x.len()`.
pub fn p_kernel(x: &[i64], t: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_dim(x.len())?;
    check_time(t)?;
    Ok(p_d(x, t))
}

/// `p^L_t(O, x)` on the torus of side `L`.
pub fn p_torus_kernel(x: &[i64], t: f64, side: usize, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_dim(x.len())?;
    let tol = spec.abs_tol / x.len() as f64;
    x.iter().try_fold(1.0, |acc, &k| Ok(acc * p1_torus(k, t, side, tol)?))
}

/// `int_0^upper s^m e^{-lambda s} p_s(O, x) ds`, with `upper = inf` allowed.
fn kernel_integral(x: &[i64], m: i32, lambda: f64, upper: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let d = x.len();
    check_dim(d)?;
    spec.check_tail_exponent(d)?;
    let weight = move |s: f64| {
        let mut w = if m == 0 { 1.0 } else { s.powi(m) };
        if lambda > 0.0 {
            w *= (-lambda * s).exp();
        }
        w * p_d(x, s)
    };
    if upper.is_finite() {
        check_time(upper)?;
        return Ok(integrate(weight, &log_breaks(upper), spec.abs_tol, spec.rel_tol));
    }
    // Keep the cut well inside the regime where the expansion is accurate for every coordinate.
    let nu_max = x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
    let cut = spec.max_time_cut.max(100.0 * nu_max * nu_max);
    let head = integrate(weight, &log_breaks(cut), spec.abs_tol, spec.rel_tol);
    let tail = asymptotic_tail(x, m, lambda, cut).ok_or(Error::Divergent {
        quantity: if lambda == 0.0 && m == 0 { "green0" } else { "kernel time integral" },
        d: d as u32,
    })?;
    Ok(head.add(tail))
}

/// Closed-form `int_cut^inf s^m e^{-lambda s} p_s(O, x) ds` from the kernel expansion.
fn asymptotic_tail(x: &[i64], m: i32, lambda: f64, cut: f64) -> Option<Estimate> {
    let d = x.len();
    let mut poly = vec![1.0];
    for &c in x {
        let coeffs = quad::bessel_asymptotic_coeffs(c.unsigned_abs(), TAIL_TERMS);
        let mut next = vec![0.0; TAIL_TERMS];
        for (i, &a) in poly.iter().enumerate() {
            for (j, &b) in coeffs.iter().enumerate() {
                if i + j < TAIL_TERMS {
                    next[i + j] += a * b;
                }
            }
        }
        poly = next;
    }
    let norm = (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let mut value = 0.0;
    let mut last = 0.0;
    for (k, &b) in poly.iter().enumerate() {
        let a = d as f64 / 2.0 + k as f64 - m as f64;
        let term = norm * b * quad::power_exp_tail(a, lambda, cut)?;
        value += term;
        last = term.abs();
    }
    Some(Estimate { value, est_error: last })
}

fn require_transient(d: usize, quantity: &'static str) -> Result<()> {
    if d <= 2 {
        return Err(Error::Divergent { quantity, d: d as u32 });
    }
    Ok(())
}

/// `int_0^inf p_s(O, O) ds` with its error estimate.
pub fn green0_est(d: usize, spec: &QuadratureSpec) -> Result<Estimate> {
    require_transient(d, "green0")?;
    kernel_integral(&vec![0; d], 0, 0.0, f64::INFINITY, spec)
}

pub fn green0(d: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(green0_est(d, spec)?.value)
}

/// `int_0^inf s p_s(O, O) ds`, finite only for `d >= 5`.
pub fn green1_est(d: usize, spec: &QuadratureSpec) -> Result<Estimate> {
    if d <= 4 {
        return Err(Error::Divergent { quantity: "green1", d: d as u32 });
    }
    kernel_integral(&vec![0; d], 1, 0.0, f64::INFINITY, spec)
}

pub fn green1(d: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(green1_est(d, spec)?.value)
}

/// Probability that the walk never returns to the origin: `1 / (2d green0)`.
pub fn gamma_d(d: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(1.0 / (2.0 * d as f64 * green0(d, spec)?))
}

/// Limiting standard-deviation constant `C_d` of the scaled occupation time.
pub fn c_const(d: usize, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("density p must lie in [0, 1], got {p}")));
    }
    let pq = p * (1.0 - p);
    let pi = std::f64::consts::PI;
    match d {
        0 | 1 => Err(invalid(format!("C_d is defined for d >= 2, got d = {d}"))),
        2 => Ok((2.0 * pq).sqrt()),
        3 => Ok((4.0 * pq * gamma_d(3, spec)? / pi.powf(1.5)).sqrt()),
        4 => Ok((gamma_d(4, spec)? * pq / (pi * pi)).sqrt()),
        _ => Ok((4.0 * d as f64 * pq * gamma_d(d, spec)? * green1(d, spec)?).sqrt()),
    }
}

/// Normalization `h_d(t)` of the occupation time.
pub fn h_scale(d: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("h_d(t) needs finite t > 0, got {t}")));
    }
    match d {
        0 | 1 => Err(invalid(format!("h_d is defined for d >= 2, got d = {d}"))),
        2 | 4 if t <= 1.0 => Err(Error::Domain(format!("h_{d}(t) needs t > 1, got {t}"))),
        2 => Ok(t / t.ln().sqrt()),
        3 => Ok(t.powf(0.75)),
        4 => Ok((t * t.ln()).sqrt()),
        _ => Ok(t.sqrt()),
    }
}

/// `v(t, x) = int_0^t p_s(O, x) ds`; `t = inf` gives the Green's function (d >= 3).
pub fn v_potential_est(t: f64, x: &[i64], spec: &QuadratureSpec) -> Result<Estimate> {
    if t.is_infinite() && t > 0.0 {
        require_transient(x.len(), "v(inf, x)")?;
        return kernel_integral(x, 0, 0.0, f64::INFINITY, spec);
    }
    check_time(t)?;
    if t == 0.0 {
        return Ok(Estimate { value: 0.0, est_error: 0.0 });
    }
    kernel_integral(x, 0, 0.0, t, spec)
}

pub fn v_potential(t: f64, x: &[i64], spec: &QuadratureSpec) -> Result<f64> {
    Ok(v_potential_est(t, x, spec)?.value)
}

/// `phi_N(x) = int_0^inf e^{-s/N} p_s(O, x) ds`.
pub fn phi_resolvent_est(n: f64, x: &[i64], spec: &QuadratureSpec) -> Result<Estimate> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(invalid(format!("phi_N needs finite N >= 1, got {n}")));
    }
    require_transient(x.len(), "phi_N")?;
    kernel_integral(x, 0, 1.0 / n, f64::INFINITY, spec)
}

pub fn phi_resolvent(n: f64, x: &[i64], spec: &QuadratureSpec) -> Result<f64> {
    Ok(phi_resolvent_est(n, x, spec)?.value)
}

/// `sum_x phi_N(x)^2`, evaluated as `int_0^inf s e^{-s/N} p_s(O, O) ds`.
pub fn sum_phi_sq_est(n: f64, d: usize, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(invalid(format!("sum_phi_sq needs finite N >= 1, got {n}")));
    }
    require_transient(d, "sum_phi_sq")?;
    kernel_integral(&vec![0; d], 1, 1.0 / n, f64::INFINITY, spec)
}

pub fn sum_phi_sq(n: f64, d: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(sum_phi_sq_est(n, d, spec)?.value)
}

/// `v^L(t, x) = int_0^t p^L_s(O, x) ds` at every site of the torus of side `L`,
/// indexed like [`crate::lattice::TorusLattice`] (coordinate 0 varies fastest).
///
/// Uses a fixed 15-point Kronrod rule on each dyadic panel of `[0, t]`, with
/// the integrand factorized over coordinates.
pub fn v_torus_table(d: usize, side: usize, t: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    check_dim(d)?;
    check_time(t)?;
    let n_sites = side
        .checked_pow(d as u32)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::Capacity(format!("torus {side}^{d} is too large for a v table")))?;
    let mut table = vec![0.0; n_sites];
    let mut q = vec![0.0; side];
    let mut partial = Vec::with_capacity(n_sites / side);
    let mut next = Vec::with_capacity(n_sites / side);
    let breaks = log_breaks(t);
    for w in breaks.windows(2).filter(|w| w[1] > w[0]) {
        for (s, weight) in quad::kronrod_rule(w[0], w[1]) {
            for (k, slot) in q.iter_mut().enumerate() {
                *slot = p1_torus(k as i64, s, side, spec.abs_tol * 1e-3)?;
            }
            partial.clear();
            partial.push(weight);
            for _ in 1..d {
                next.clear();
                for &a in &partial {
                    next.extend(q.iter().map(|&b| a * b));
                }
                std::mem::swap(&mut partial, &mut next);
            }
            for (row, &a) in table.chunks_exact_mut(side).zip(&partial) {
                for (cell, &b) in row.iter_mut().zip(&q) {
                    *cell += a * b;
                }
            }
        }
    }
    Ok(table)
}

/// The constants entering the occupation-time limit in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub d: usize,
    pub gamma_d: f64,
    pub green0: f64,
    pub green1: Option<f64>,
    pub c_d: f64,
    pub p_density: f64,
}

impl Constants {
    pub fn compute(d: usize, p: f64, spec: &QuadratureSpec) -> Result<Constants> {
        let g0 = green0(d, spec)?;
        let green1 = if d >= 5 { Some(green1(d, spec)?) } else { None };
        Ok(Constants {
            d,
            gamma_d: 1.0 / (2.0 * d as f64 * g0),
            green0: g0,
            green1,
            c_d: c_const(d, p, spec)?,
            p_density: p,
        })
    }
}
