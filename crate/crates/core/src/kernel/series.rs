//! Transition probabilities of the continuous-time simple random walk.
//!
//! One coordinate of the walk on `Z^d` (jump rate 1 to each of the two
//! neighbors) is a Poisson number of `+-1` steps. Conditioning on the number
//! of steps `n = 2m + k` gives
//!
//! `p1(k, t) = sum_m e^{-2t} t^{2m+k} / (m! (m+k)!)`,
//!
//! which is summed outwards from its largest term so that the truncation
//! error can be bounded by a geometric tail.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Relative size below which remaining terms of a series are dropped.
const SERIES_EPS: f64 = 1e-18;

fn ln_factorial(n: f64) -> f64 {
    ln_gamma(n + 1.0)
}

/// `P(X_t = k)` for one coordinate, i.e. `e^{-2t} I_|k|(2t)`.
pub fn p1(k: i64, t: f64) -> f64 {
    let k = k.unsigned_abs() as f64;
    if t == 0.0 {
        return if k == 0.0 { 1.0 } else { 0.0 };
    }
    let ln_t = t.ln();
    let t2 = t * t;
    // Largest term: t^2 = (m + 1)(m + k + 1) at the crossover.
    let m_star = ((-(k + 2.0) + (k * k + 4.0 * t2).sqrt()) / 2.0).ceil().max(0.0);
    let ln_peak = -2.0 * t + (2.0 * m_star + k) * ln_t - ln_factorial(m_star) - ln_factorial(m_star + k);
    let peak = ln_peak.exp();
    if peak == 0.0 {
        return 0.0;
    }
    let mut sum = peak;
    // Upwards: ratio t^2 / ((m+1)(m+k+1)) is decreasing, so once below 1 the
    // remainder is bounded by term * r / (1 - r).
    let mut term = peak;
    let mut m = m_star;
    loop {
        let r = t2 / ((m + 1.0) * (m + k + 1.0));
        term *= r;
        m += 1.0;
        sum += term;
        if r < 1.0 && term * r / (1.0 - r) <= SERIES_EPS * sum {
            break;
        }
    }
    // Downwards: ratio m (m+k) / t^2 is decreasing as m falls.
    let mut term = peak;
    let mut m = m_star;
    while m > 0.0 {
        let r = m * (m + k) / t2;
        term *= r;
        m -= 1.0;
        sum += term;
        if r < 1.0 && term * r / (1.0 - r) <= SERIES_EPS * sum {
            break;
        }
    }
    sum.min(1.0)
}

/// `p_t(O, x)` on `Z^d`, the product of the coordinate kernels.
pub fn p_d(x: &[i64], t: f64) -> f64 {
    // Multiply in a canonical order so the value is exactly symmetric.
    let mut abs: Vec<u64> = x.iter().map(|c| c.unsigned_abs()).collect();
    abs.sort_unstable();
    let mut prod = 1.0;
    let mut last: Option<(u64, f64)> = None;
    for a in abs {
        let v = match last {
            Some((k, v)) if k == a => v,
            _ => p1(a as i64, t),
        };
        last = Some((a, v));
        prod *= v;
    }
    prod
}

/// Coordinate kernel on the cycle `Z/LZ`: `sum_m p1(k + mL, t)`.
///
/// Terms decrease in `|k + mL|`, so the sum stops once the nearest unvisited
/// images are negligible against `abs_tol`.
pub fn p1_torus(k: i64, t: f64, side: usize, abs_tol: f64) -> Result<f64> {
    if side < 3 {
        return Err(Error::invalid(format!("torus side L = {side} is too small; L >= 3 is required")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    let l = side as i64;
    let k0 = k.rem_euclid(l);
    let cutoff = abs_tol * 1e-6;
    let mut sum = p1(k0, t);
    // Images k0 + mL for m >= 1 and k0 - mL for m >= 1.
    for sign in [1i64, -1] {
        let mut m = 1i64;
        loop {
            let j = k0 + sign * m * l;
            let v = p1(j, t);
            sum += v;
            // Beyond the peak at 0 the terms decay; stop when tiny.
            if v < cutoff && j.unsigned_abs() as f64 > 2.0 * t {
                break;
            }
            if v < cutoff * 1e-6 {
                break;
            }
            m += 1;
        }
    }
    Ok(sum.min(1.0))
}
