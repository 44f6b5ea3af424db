//! Coalescing random walks with staggered activation times.
//!
//! Walker `k` sits frozen at `x_k` until its activation time `s_k`, then
//! jumps to a uniform neighbor at rate `2d`. Active walkers that meet merge
//! into one class and move together afterwards. A walker that activates on
//! a site held by an active walker merges at that instant.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::occupancy::OccupancyMap;
use crate::error::{Error, Result};
use crate::lattice::{Geometry, SiteCodec};
use crate::rng::SimRng;

/// One walker's start and its state at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkerRecord {
    pub start: Vec<i64>,
    pub activation: f64,
    /// Position at the horizon (torus coordinates lie in `[0, L)`).
    pub position: Vec<i64>,
    /// Root class at the horizon.
    pub class: usize,
}

/// A merge of class `absorbed` into class `into` at `time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub time: f64,
    pub absorbed: usize,
    pub into: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkerSystem {
    pub walkers: Vec<WalkerRecord>,
    pub horizon: f64,
    /// Merges in the order they happened; times are nondecreasing.
    pub merges: Vec<Merge>,
    pub jumps: u64,
}

impl WalkerSystem {
    /// Number of distinct classes among walkers activated by time `t`.
    pub fn class_count_at(&self, t: f64) -> usize {
        let active = self.walkers.iter().filter(|w| w.activation <= t).count();
        active - self.merges.iter().filter(|m| m.time <= t).count()
    }

    /// Time at which walkers `i` and `j` first belong to the same class.
    pub fn meeting_time(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.walkers.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        if i == j {
            return Some(self.walkers[i].activation);
        }
        for m in &self.merges {
            let (a, b) = (find(&mut parent, m.absorbed), find(&mut parent, m.into));
            parent[a] = b;
            if find(&mut parent, i) == find(&mut parent, j) {
                return Some(m.time);
            }
        }
        None
    }
}

/// Simulates the coalescing system up to `horizon`.
///
/// Ties between activation times are resolved in input order; a walker
/// whose site and activation time coincide with an earlier one merges at
/// activation.
pub fn simulate_coalescing(
    starts: &[(Vec<i64>, f64)],
    horizon: f64,
    geometry: Geometry,
    rng: &mut SimRng,
) -> Result<WalkerSystem> {
    if starts.is_empty() {
        return Err(Error::invalid("simulate_coalescing needs at least one walker"));
    }
    let d = starts[0].0.len();
    let codec = SiteCodec::new(d, geometry)?;
    for (x, s) in starts {
        if x.len() != d {
            return Err(Error::invalid("all start sites must have the same dimension"));
        }
        if !(*s >= 0.0) || *s > horizon {
            return Err(Error::invalid(format!("activation time {s} outside [0, horizon = {horizon}]")));
        }
    }
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&a, &b| starts[a].1.total_cmp(&starts[b].1).then(a.cmp(&b)));

    // Entities are classes that are active; `owner[k]` is the walker index of class k's root.
    let mut parent: Vec<usize> = (0..starts.len()).collect();
    let mut active: Vec<(u64, usize)> = Vec::new(); // (site key, root walker)
    let mut occupied = OccupancyMap::with_capacity(starts.len());
    let mut merges = Vec::new();
    let degree = 2 * d as u64;
    let mut t = 0.0;
    let mut next_act = 0usize;
    let mut jumps = 0u64;

    loop {
        let act_time = order.get(next_act).map_or(f64::INFINITY, |&k| starts[k].1);
        let dt = if active.is_empty() {
            f64::INFINITY
        } else {
            let e: f64 = rng.sample(Exp1);
            e / (degree as f64 * active.len() as f64)
        };
        if act_time <= horizon && t + dt >= act_time {
            // Memorylessness lets the pending jump be discarded at an activation.
            t = act_time;
            let k = order[next_act];
            next_act += 1;
            let key = codec.encode(&starts[k].0)?;
            match occupied.insert_or_get(key, k as u32) {
                Some(root) => {
                    parent[k] = root as usize;
                    merges.push(Merge { time: t, absorbed: k, into: root as usize });
                }
                None => active.push((key, k)),
            }
            continue;
        }
        if t + dt >= horizon {
            break;
        }
        t += dt;
        let r = rng.random_range(0..active.len() as u64 * degree);
        let wi = (r / degree) as usize;
        let (key, root) = active[wi];
        let target = codec
            .step(key, (r % degree) as u32)
            .ok_or_else(|| Error::Capacity("walker left the packable region of Z^d".into()))?;
        jumps += 1;
        occupied.remove(key);
        match occupied.insert_or_get(target, root as u32) {
            Some(other) => {
                parent[root] = other as usize;
                merges.push(Merge { time: t, absorbed: root, into: other as usize });
                active.swap_remove(wi);
            }
            None => active[wi].0 = target,
        }
    }

    let mut position_of_root = vec![None; starts.len()];
    for &(key, root) in &active {
        position_of_root[root] = Some(key);
    }
    let find = |mut a: usize| {
        while parent[a] != a {
            a = parent[a];
        }
        a
    };
    let walkers = starts
        .iter()
        .enumerate()
        .map(|(k, (x, s))| {
            let root = find(k);
            let position = match position_of_root[root] {
                Some(key) if *s <= horizon => codec.decode(key),
                _ => x.clone(),
            };
            WalkerRecord { start: x.clone(), activation: *s, position, class: root }
        })
        .collect();
    Ok(WalkerSystem { walkers, horizon, merges, jumps })
}
