//! Forward simulation of the voter model on a torus.
//!
//! Each directed edge `(x, y)` carries a rate-1 Poisson clock; when it rings
//! `x` copies the opinion of `y`. The superposition of all `2d L^d` clocks is
//! simulated as one exponential clock with a uniformly chosen directed edge
//! per event. Occupation times at tracked sites are integrated exactly: the
//! spin of a site is constant between events.

use std::sync::Arc;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusLattice;
use crate::rng::SimRng;

/// Spin configuration `eta` on a torus together with the current time.
#[derive(Clone, Debug)]
pub struct SpinField {
    lattice: Arc<TorusLattice>,
    words: Vec<u64>,
    time: f64,
}

impl SpinField {
    pub fn constant(lattice: Arc<TorusLattice>, value: bool) -> Self {
        let n = lattice.n_sites();
        let mut words = vec![if value { u64::MAX } else { 0 }; n.div_ceil(64)];
        if value && !n.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        SpinField { lattice, words, time: 0.0 }
    }

    pub fn from_spins(lattice: Arc<TorusLattice>, spins: &[bool]) -> Result<Self> {
        if spins.len() != lattice.n_sites() {
            return Err(Error::invalid(format!("expected {} spins, got {}", lattice.n_sites(), spins.len())));
        }
        let mut field = SpinField::constant(lattice, false);
        for (i, &s) in spins.iter().enumerate() {
            field.set(i, s);
        }
        Ok(field)
    }

    pub fn lattice(&self) -> &Arc<TorusLattice> {
        &self.lattice
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn get(&self, site: usize) -> bool {
        (self.words[site >> 6] >> (site & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, site: usize, value: bool) {
        let bit = 1u64 << (site & 63);
        if value {
            self.words[site >> 6] |= bit;
        } else {
            self.words[site >> 6] &= !bit;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn spins(&self) -> Vec<bool> {
        (0..self.lattice.n_sites()).map(|i| self.get(i)).collect()
    }

    /// FNV-1a digest of time and spins, used by determinism checks.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for w in std::iter::once(self.time.to_bits()).chain(self.words.iter().copied()) {
            for b in w.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Product Bernoulli(`p`) initial configuration at time 0.
pub fn init_product(lattice: Arc<TorusLattice>, p: f64, rng: &mut SimRng) -> Result<SpinField> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("density p must lie in [0, 1], got {p}")));
    }
    let mut field = SpinField::constant(lattice, false);
    for site in 0..field.lattice.n_sites() {
        if rng.random::<f64>() < p {
            field.set(site, true);
        }
    }
    Ok(field)
}

/// Accumulated occupation `xi_t = int_0^t eta_s(site) ds` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationPath {
    pub site: usize,
    /// `0 = t_0 < t_1 < ... < t_m`.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub density_p: f64,
}

impl OccupationPath {
    /// Centered values `xi_t - t p`.
    pub fn centered(&self) -> Vec<f64> {
        self.grid.iter().zip(&self.values).map(|(t, v)| v - t * self.density_p).collect()
    }
}

/// Attaches to a site before [`advance_to`] and fills in an [`OccupationPath`].
#[derive(Clone, Debug)]
pub struct OccupationRecorder {
    path: OccupationPath,
    next: usize,
    acc: f64,
    last: f64,
    spin: bool,
}

impl OccupationRecorder {
    /// `grid` must be strictly increasing and nonnegative; a leading 0 is added if absent.
    pub fn new(field: &SpinField, site: usize, grid: &[f64], density_p: f64) -> Result<Self> {
        if site >= field.lattice.n_sites() {
            return Err(Error::invalid(format!("site {site} outside the torus")));
        }
        if field.time != 0.0 {
            return Err(Error::invalid("recorders must be attached at time 0"));
        }
        let grid = normalize_grid(grid)?;
        let mut values = vec![f64::NAN; grid.len()];
        values[0] = 0.0;
        Ok(OccupationRecorder {
            path: OccupationPath { site, grid, values, density_p },
            next: 1,
            acc: 0.0,
            last: 0.0,
            spin: field.get(site),
        })
    }

    pub fn site(&self) -> usize {
        self.path.site
    }

    fn next_grid_time(&self) -> f64 {
        self.path.grid.get(self.next).copied().unwrap_or(f64::INFINITY)
    }

    /// Records every grid point up to and including `t`, with the spin constant since `last`.
    fn flush_until(&mut self, t: f64) {
        while self.next < self.path.grid.len() && self.path.grid[self.next] <= t {
            let g = self.path.grid[self.next];
            self.path.values[self.next] = self.acc + if self.spin { g - self.last } else { 0.0 };
            self.next += 1;
        }
    }

    fn spin_changes(&mut self, t: f64, new_spin: bool) {
        self.flush_until(t);
        if self.spin {
            self.acc += t - self.last;
        }
        self.last = t;
        self.spin = new_spin;
    }

    /// The path; grid points beyond the simulated horizon are `NaN`.
    pub fn path(&self) -> &OccupationPath {
        &self.path
    }

    pub fn into_path(self) -> OccupationPath {
        self.path
    }
}

/// Checks a time grid and prepends `0` if needed.
pub fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len() + 1);
    if grid.first().is_none_or(|&t| t != 0.0) {
        out.push(0.0);
    }
    out.extend_from_slice(grid);
    for w in out.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::invalid(format!("time grid must be strictly increasing and nonnegative: {grid:?}")));
        }
    }
    Ok(out)
}

/// Summary of one call to [`advance_to`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdvanceStats {
    pub events: u64,
    pub flips: u64,
}

/// Runs the graphical construction from `field.time` to `horizon`.
pub fn advance_to(
    field: &mut SpinField,
    horizon: f64,
    recorders: &mut [OccupationRecorder],
    rng: &mut SimRng,
) -> Result<AdvanceStats> {
    if !(horizon >= field.time) || !horizon.is_finite() {
        return Err(Error::invalid(format!("horizon {horizon} is before the field time {}", field.time)));
    }
    let lattice = Arc::clone(&field.lattice);
    let degree = lattice.degree() as u64;
    let n_edges = lattice.n_sites() as u64 * degree;
    let rate = n_edges as f64;
    let mut stats = AdvanceStats::default();
    let mut next_grid = recorders.iter().map(|r| r.next_grid_time()).fold(f64::INFINITY, f64::min);
    let mut t = field.time;
    loop {
        let e: f64 = rng.sample(Exp1);
        t += e / rate;
        if t >= horizon {
            break;
        }
        if t >= next_grid {
            for r in recorders.iter_mut() {
                r.flush_until(t);
            }
            next_grid = recorders.iter().map(|r| r.next_grid_time()).fold(f64::INFINITY, f64::min);
        }
        let edge = rng.random_range(0..n_edges);
        let x = (edge / degree) as usize;
        let y = lattice.neighbor(x, (edge % degree) as usize);
        stats.events += 1;
        let sy = field.get(y);
        if field.get(x) != sy {
            field.set(x, sy);
            stats.flips += 1;
            for r in recorders.iter_mut() {
                if r.path.site == x {
                    r.spin_changes(t, sy);
                }
            }
        }
    }
    for r in recorders.iter_mut() {
        r.flush_until(horizon);
        if r.spin {
            r.acc += horizon - r.last;
        }
        r.last = horizon;
    }
    field.time = horizon;
    Ok(stats)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> MeanEstimate {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MeanEstimate { mean, stderr: (var / n as f64).sqrt(), n }
    }
}

/// Ensemble estimate of `E[(eta_t(x) - eta_t(y))^2]` from replicate fields at a common time.
pub fn two_point_statistic(fields: &[SpinField], x: usize, y: usize) -> Result<MeanEstimate> {
    if x == y {
        return Err(Error::invalid("two-point statistic needs distinct sites"));
    }
    if fields.len() < 100 {
        return Err(Error::invalid(format!("ensemble of {} fields is below the minimum of 100", fields.len())));
    }
    let samples: Vec<f64> = fields.iter().map(|f| (f.get(x) != f.get(y)) as u8 as f64).collect();
    Ok(MeanEstimate::from_samples(&samples))
}
