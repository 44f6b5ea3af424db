//! Meeting probabilities of dual walker pairs and the covariances they give.
//!
//! Two independent rate-`2d` walks meet exactly when their difference, a
//! rate-`4d` walk, hits the origin. With an activation offset only one
//! walker moves at first, so the difference moves at rate `2d` during the
//! offset and a coincidence at the switch counts as a meeting.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::walkers::simulate_coalescing;
use crate::error::{Error, Result};
use crate::lattice::{Geometry, SiteCodec};
use crate::parallel::try_map_replicas;
use crate::rng::SimRng;
use crate::voter::MeanEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeetingEstimate {
    pub offset: f64,
    pub horizon: f64,
    pub prob: f64,
    pub stderr: f64,
    pub reps: usize,
}

impl MeetingEstimate {
    fn from_count(offset: f64, horizon: f64, hits: usize, reps: usize) -> Self {
        let prob = hits as f64 / reps as f64;
        MeetingEstimate { offset, horizon, prob, stderr: (prob * (1.0 - prob) / reps as f64).sqrt(), reps }
    }
}

/// An estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: usize,
}

fn displacement(x: &[i64], y: &[i64]) -> Result<Vec<i64>> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::invalid("sites must have the same positive dimension"));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

/// Meeting time of the pair measured from the second activation, or `None`
/// if they have not met after `duration` more time units.
fn difference_meeting(codec: &SiteCodec, start: u64, offset: f64, duration: f64, rng: &mut SimRng) -> Result<Option<f64>> {
    let origin = codec.origin();
    let degree = 2 * codec.dim() as u32;
    let overflow = || Error::Capacity("difference walk left the packable region of Z^d".into());
    let mut key = start;
    let mut u = 0.0;
    loop {
        let e: f64 = rng.sample(Exp1);
        u += e / degree as f64;
        if u >= offset {
            break;
        }
        key = codec.step(key, rng.random_range(0..degree)).ok_or_else(overflow)?;
    }
    if key == origin {
        return Ok(Some(0.0));
    }
    let rate = 2.0 * degree as f64;
    let mut t = 0.0;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e / rate;
        if t >= duration {
            return Ok(None);
        }
        key = codec.step(key, rng.random_range(0..degree)).ok_or_else(overflow)?;
        if key == origin {
            return Ok(Some(t));
        }
    }
}

fn check_duration(offset: f64, t: f64) -> Result<()> {
    if !(offset >= 0.0) || !(t >= 0.0) || !offset.is_finite() || !t.is_finite() {
        return Err(Error::invalid(format!("offset {offset} and horizon {t} must be finite and nonnegative")));
    }
    Ok(())
}

/// `P(tau <= t)` for walkers from `x` (active first) and `y` (active after `offset`);
/// `t` counts from the second activation.
pub fn meeting_prob_offset(
    x: &[i64],
    y: &[i64],
    offset: f64,
    t: f64,
    reps: usize,
    seed: u64,
    geometry: Geometry,
) -> Result<MeetingEstimate> {
    Ok(meeting_curve_offset(x, y, offset, &[t], reps, seed, geometry)?[0])
}

/// Meeting probabilities at several horizons from one set of walks, so the
/// estimates are nondecreasing in the horizon.
pub fn meeting_curve_offset(
    x: &[i64],
    y: &[i64],
    offset: f64,
    horizons: &[f64],
    reps: usize,
    seed: u64,
    geometry: Geometry,
) -> Result<Vec<MeetingEstimate>> {
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    check_duration(offset, t_max)?;
    let dx = displacement(x, y)?;
    let codec = SiteCodec::new(dx.len(), geometry)?;
    let start = codec.encode(&dx)?;
    let times = try_map_replicas(reps, seed, "meeting", |_, rng| difference_meeting(&codec, start, offset, t_max, rng))?;
    Ok(horizons
        .iter()
        .map(|&h| {
            let hits = times.iter().filter(|m| m.is_some_and(|s| s <= h)).count();
            MeetingEstimate::from_count(offset, h, hits, reps)
        })
        .collect())
}

/// `P(tau_xy <= t)` by the difference-walk reduction.
pub fn meeting_prob_pair(x: &[i64], y: &[i64], t: f64, reps: usize, seed: u64, geometry: Geometry) -> Result<MeetingEstimate> {
    if x == y {
        return Err(Error::invalid("meeting_prob_pair needs distinct sites"));
    }
    meeting_prob_offset(x, y, 0.0, t, reps, seed, geometry)
}

/// `P(tau_xy <= t)` from explicit two-walker coalescing runs (cross-check path).
pub fn meeting_prob_pair_two_walker(
    x: &[i64],
    y: &[i64],
    t: f64,
    reps: usize,
    seed: u64,
    geometry: Geometry,
) -> Result<MeetingEstimate> {
    if x == y {
        return Err(Error::invalid("meeting_prob_pair needs distinct sites"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    check_duration(0.0, t)?;
    let starts = vec![(x.to_vec(), 0.0), (y.to_vec(), 0.0)];
    let met = try_map_replicas(reps, seed, "meeting-two-walker", |_, rng| {
        Ok(simulate_coalescing(&starts, t, geometry, rng)?.meeting_time(0, 1).is_some())
    })?;
    Ok(MeetingEstimate::from_count(0.0, t, met.iter().filter(|&&m| m).count(), reps))
}

fn check_density(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("density p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `Cov(eta_r(O), eta_theta(O))` under the product initial law, `r <= theta`.
pub fn cov_eta_dual(r: f64, theta: f64, p: f64, d: usize, reps: usize, seed: u64, geometry: Geometry) -> Result<CovEstimate> {
    check_density(p)?;
    if !(r >= 0.0) || r > theta {
        return Err(Error::invalid(format!("need 0 <= r <= theta, got r = {r}, theta = {theta}")));
    }
    let origin = vec![0; d];
    let m = meeting_prob_offset(&origin, &origin, theta - r, r, reps, seed, geometry)?;
    let pq = p * (1.0 - p);
    Ok(CovEstimate { value: pq * m.prob, stderr: pq * m.stderr, reps })
}

/// Intervals `[enter, leave]` during which a rate-`2d` walk from `O` sits at `O`, up to `until`.
fn origin_visits(codec: &SiteCodec, until: f64, rng: &mut SimRng) -> Result<Vec<(f64, f64)>> {
    let origin = codec.origin();
    let degree = 2 * codec.dim() as u32;
    let mut visits = Vec::new();
    let mut key = origin;
    let mut entered = Some(0.0);
    let mut t = 0.0;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e / degree as f64;
        if t >= until {
            if let Some(a) = entered {
                visits.push((a, until));
            }
            return Ok(visits);
        }
        key = codec
            .step(key, rng.random_range(0..degree))
            .ok_or_else(|| Error::Capacity("walk left the packable region of Z^d".into()))?;
        match (entered, key == origin) {
            (Some(a), false) => {
                visits.push((a, t));
                entered = None;
            }
            (None, true) => entered = Some(t),
            _ => {}
        }
    }
}

/// `int_0^dmax max(0, m(D) - w(D)/2) dD` where `w(D)` is the waiting time from
/// `D` to the next visit and `m` is piecewise linear with a kink at `kink`.
fn window_integral(visits: &[(f64, f64)], dmax: f64, m: impl Fn(f64) -> f64, kink: f64) -> f64 {
    let mut cuts = vec![0.0, dmax];
    if kink > 0.0 && kink < dmax {
        cuts.push(kink);
    }
    for &(a, b) in visits {
        for c in [a, b] {
            if c > 0.0 && c < dmax {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let mid = 0.5 * (u + v);
        // First visit interval that ends after `mid`.
        let idx = visits.partition_point(|&(_, b)| b <= mid);
        let next_visit = match visits.get(idx) {
            Some(&(a, _)) if a <= mid => None,
            Some(&(a, _)) => Some(a),
            None => continue,
        };
        let g = |x: f64| m(x) - 0.5 * next_visit.map_or(0.0, |a| a - x);
        let (gu, gv) = (g(u), g(v));
        let len = v - u;
        total += if gu >= 0.0 && gv >= 0.0 {
            0.5 * (gu + gv) * len
        } else if gu > 0.0 {
            0.5 * gu * len * gu / (gu - gv)
        } else if gv > 0.0 {
            0.5 * gv * len * gv / (gv - gu)
        } else {
            0.0
        };
    }
    total
}

/// `int_0^s int_0^t 1{the walk visits O during [|a-b|, |a-b| + 2 min(a, b)]} db da`, exactly.
pub(crate) fn occupation_window_measure(visits: &[(f64, f64)], s: f64, t: f64) -> f64 {
    let above = window_integral(visits, t, |x| s.min(t - x), t - s);
    let below = window_integral(visits, s, |x| s - x, s);
    above + below
}

/// `Cov(xi_s - p s, xi_t - p t)` for the occupation time at the origin, `s <= t`.
///
/// The pair of dual lineages from `(O, a)` and `(O, b)` coalesces exactly
/// when one rate-`2d` walk from `O` visits `O` during `[|a-b|, |a-b| + 2 min(a, b)]`.
/// One walk per replica therefore yields the double time integral over all
/// `(a, b)` at once, and the integral of its indicator is computed exactly.
pub fn occupation_cov_dual(s: f64, t: f64, p: f64, d: usize, reps: usize, seed: u64, geometry: Geometry) -> Result<CovEstimate> {
    check_density(p)?;
    if !(s >= 0.0) || s > t || !t.is_finite() {
        return Err(Error::invalid(format!("need 0 <= s <= t < inf, got s = {s}, t = {t}")));
    }
    if reps < 2 {
        return Err(Error::invalid("occupation_cov_dual needs at least two replicas"));
    }
    let codec = SiteCodec::new(d, geometry)?;
    let samples = try_map_replicas(reps, seed, "occupation-cov", |_, rng| {
        let visits = origin_visits(&codec, s + t, rng)?;
        Ok(occupation_window_measure(&visits, s, t))
    })?;
    let est = MeanEstimate::from_samples(&samples);
    let pq = p * (1.0 - p);
    Ok(CovEstimate { value: pq * est.mean, stderr: pq * est.stderr, reps })
}

/// Independent walks `Z_j` frozen until `t4 - t_j`: joint and marginal
/// frequencies of `{tau_12 <= t4}` and `{tau_34 <= t4}` (no coalescence imposed).
pub fn independent_pair_events(
    sites: &[Vec<i64>; 4],
    times: [f64; 4],
    reps: usize,
    seed: u64,
    geometry: Geometry,
) -> Result<(f64, f64, f64)> {
    let d = sites[0].len();
    let codec = SiteCodec::new(d, geometry)?;
    let flags = try_map_replicas(reps, seed, "independent-pairs", |_, rng| {
        // Each pair involves disjoint walkers, so pairs are simulated separately.
        let pair = |i: usize, j: usize, rng: &mut SimRng| -> Result<bool> {
            let (first, second) = if times[i] >= times[j] { (i, j) } else { (j, i) };
            let dx = displacement(&sites[first], &sites[second])?;
            let start = codec.encode(&dx)?;
            Ok(difference_meeting(&codec, start, times[first] - times[second], times[second], rng)?.is_some())
        };
        Ok((pair(0, 1, rng)?, pair(2, 3, rng)?))
    })?;
    let n = reps as f64;
    let a = flags.iter().filter(|f| f.0).count() as f64 / n;
    let b = flags.iter().filter(|f| f.1).count() as f64 / n;
    let both = flags.iter().filter(|f| f.0 && f.1).count() as f64 / n;
    Ok((a, b, both))
}
