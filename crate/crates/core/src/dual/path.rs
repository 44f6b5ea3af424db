//! Occupation paths of the voter model read off the dual genealogy.
//!
//! Run the graphical construction backwards from the horizon `H`. Every
//! forward time `s` in `[0, H]` has a lineage that starts at `(O, s)` and
//! follows copy arrows down to time 0, where it reads `eta_0`. Lineages of
//! different forward times coalesce, so the whole path `s -> eta_s(O)` is
//! determined by a coalescing walker system in which the origin keeps
//! emitting new walkers:
//!
//! * one walker always sits at `O`; it carries the lineage class of the
//!   current path segment,
//! * when that walker jumps (an arrow `O <- y` at backward time `u`) its
//!   class moves to `y` and a fresh class starts at `O`, so the forward path
//!   has a segment boundary at `H - u`,
//! * every other walker jumps at rate `2d` and merges into whatever class
//!   occupies the site it lands on.
//!
//! At backward time `H` distinct surviving walkers sit on distinct sites and
//! therefore read independent `Bernoulli(p)` values under the product
//! measure. The law of the resulting path is exactly the law of the forward
//! process, and the cost does not depend on the torus side.

use rand::Rng;
use rand_distr::Exp1;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{Geometry, SiteCodec};
use crate::rng::SimRng;
use super::occupancy::OccupancyMap;

#[derive(Clone, Copy, Debug)]
struct Walker {
    key: u64,
    class: u32,
}

/// A maximal forward-time interval on which `eta(O)` follows one lineage class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub class: u32,
}

/// Resolved genealogy of one backward run.
#[derive(Clone, Debug)]
pub struct Genealogy {
    pub horizon: f64,
    /// Segments in increasing forward time, covering `[0, horizon]`.
    pub segments: Vec<Segment>,
    /// Root class of every class id.
    roots: Vec<u32>,
    /// Surviving walkers at forward time 0: `(root class, site key)`.
    pub finals: Vec<(u32, u64)>,
    pub jumps: u64,
}

impl Genealogy {
    /// Number of distinct sites of `eta_0` the path depends on.
    pub fn n_ancestors(&self) -> usize {
        self.finals.len()
    }

    /// Root class of segment `i`'s lineage.
    pub fn root_of(&self, class: u32) -> u32 {
        self.roots[class as usize]
    }

    /// Accumulated occupation `int_0^{t_k} eta_s(O) ds` at each grid time,
    /// given the initial spin read by each surviving lineage root.
    pub fn occupation(&self, grid: &[f64], spin_of_root: &FxHashMap<u32, bool>) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for seg in &self.segments {
            if !spin_of_root[&self.roots[seg.class as usize]] {
                continue;
            }
            for (acc, &t) in out.iter_mut().zip(grid) {
                let hi = seg.end.min(t);
                if hi > seg.start {
                    *acc += hi - seg.start;
                }
            }
        }
        out
    }

    /// Draws independent `Bernoulli(p)` spins for the ancestor sites.
    pub fn product_spins(&self, p: f64, rng: &mut SimRng) -> FxHashMap<u32, bool> {
        self.finals.iter().map(|&(root, _)| (root, rng.random::<f64>() < p)).collect()
    }
}

/// Reusable backward sampler; buffers are kept between replicas.
pub struct DualPathSampler {
    codec: SiteCodec,
    origin: u64,
    walkers: Vec<Walker>,
    occupied: OccupancyMap,
    parent: Vec<u32>,
}

impl DualPathSampler {
    pub fn new(d: usize, geometry: Geometry) -> Result<Self> {
        let codec = SiteCodec::new(d, geometry)?;
        Ok(DualPathSampler {
            origin: codec.origin(),
            codec,
            walkers: Vec::new(),
            occupied: OccupancyMap::with_capacity(1024),
            parent: Vec::new(),
        })
    }

    pub fn codec(&self) -> &SiteCodec {
        &self.codec
    }

    /// Upper bound on the expected number of walker jumps for horizon `h`:
    /// every emission from `O` survives until time `h`.
    pub fn expected_jumps_bound(d: usize, horizon: f64) -> f64 {
        let rate = 2.0 * d as f64;
        rate * horizon + rate * rate * horizon * horizon / 2.0
    }

    pub fn run(&mut self, horizon: f64, rng: &mut SimRng) -> Result<Genealogy> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must be finite and nonnegative, got {horizon}")));
        }
        let degree = 2 * self.codec.dim() as u64;
        let rate_per_walker = degree as f64;
        self.walkers.clear();
        self.occupied.clear();
        self.parent.clear();

        let origin = self.origin;
        self.parent.push(0);
        self.walkers.push(Walker { key: origin, class: 0 });
        self.occupied.set(origin, 0);

        // Backward-time segments, converted to forward time at the end.
        let mut back_segments: Vec<(f64, f64, u32)> = Vec::new();
        let mut seg_start = 0.0f64;
        let mut u = 0.0f64;
        let mut jumps = 0u64;

        loop {
            let n = self.walkers.len();
            let e: f64 = rng.sample(Exp1);
            u += e / (rate_per_walker * n as f64);
            if u >= horizon {
                break;
            }
            let r = rng.random_range(0..n as u64 * degree);
            let wi = (r / degree) as usize;
            let dir = (r % degree) as u32;
            let w = self.walkers[wi];
            let target = self.codec.step(w.key, dir).ok_or_else(|| {
                Error::Capacity("dual walker left the packable region of Z^d".into())
            })?;
            jumps += 1;

            if w.key == origin {
                // Arrow O <- y: the current segment's class leaves, a new one starts at O.
                back_segments.push((seg_start, u, w.class));
                seg_start = u;
                let fresh = self.parent.len() as u32;
                self.parent.push(fresh);
                self.occupied.set(origin, fresh);
                self.walkers.push(Walker { key: origin, class: fresh });
            } else {
                self.occupied.remove(w.key);
            }

            match self.occupied.insert_or_get(target, w.class) {
                Some(occupant) => {
                    self.parent[w.class as usize] = occupant;
                    self.walkers.swap_remove(wi);
                }
                None => self.walkers[wi].key = target,
            }
        }
        let o_class = self.occupied.get(origin).expect("origin is always occupied");
        back_segments.push((seg_start, horizon, o_class));

        // Resolve classes to roots.
        let mut roots = std::mem::take(&mut self.parent);
        for c in 0..roots.len() {
            let mut r = roots[c];
            while roots[r as usize] != r {
                r = roots[r as usize];
            }
            roots[c] = r;
        }
        self.parent = Vec::with_capacity(roots.len());

        let segments = back_segments
            .iter()
            .rev()
            .map(|&(a, b, class)| Segment { start: horizon - b, end: horizon - a, class })
            .collect();
        let finals = self.walkers.iter().map(|w| (w.class, w.key)).collect();
        Ok(Genealogy { horizon, segments, roots, finals, jumps })
    }
}
