use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Forward-engine budget that caps the recommended side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardCap {
    pub reps: usize,
    pub budget: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvisorReport {
    pub side: usize,
    /// Union bound over coordinates on a walk of duration `N T` reaching
    /// distance `L/2` in some coordinate.
    pub wrap_bound: f64,
    /// True when the budget forced a side below the safety rule.
    pub capped: bool,
}

/// Expected forward-engine events: `2d L^d T N reps`.
pub fn forward_event_estimate(d: usize, side: usize, horizon: f64, reps: usize) -> f64 {
    2.0 * d as f64 * (side as f64).powi(d as i32) * horizon * reps as f64
}

fn wrap_bound(d: usize, side: usize, duration: f64) -> f64 {
    let sigma = (2.0 * duration).sqrt();
    let a = side as f64 / 2.0;
    (d as f64 * erfc(a / (std::f64::consts::SQRT_2 * sigma))).min(1.0)
}

/// Smallest odd `L >= k sqrt(2 N T)`, reduced to fit `cap` if one is given.
pub fn finite_size_advisor(d: usize, n: f64, t: f64, safety_k: f64, cap: Option<ForwardCap>) -> Result<AdvisorReport> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(safety_k >= 1.0) || !safety_k.is_finite() {
        return Err(Error::invalid(format!("safety_k must be at least 1, got {safety_k}")));
    }
    if !(n > 0.0) || !(t > 0.0) || !(n * t).is_finite() {
        return Err(Error::invalid(format!("N and T must be positive, got N = {n}, T = {t}")));
    }
    let raw = safety_k * (2.0 * n * t).sqrt();
    // Guard against 180.00000000000003-style rounding of exact products.
    let mut side = (raw - 1e-9 * raw).ceil().max(3.0) as usize;
    if side.is_multiple_of(2) {
        side += 1;
    }
    let mut capped = false;
    if let Some(cap) = cap {
        while side > 3 && forward_event_estimate(d, side, n * t, cap.reps) > cap.budget {
            side -= 2;
            capped = true;
        }
    }
    Ok(AdvisorReport { side, wrap_bound: wrap_bound(d, side, n * t), capped })
}
