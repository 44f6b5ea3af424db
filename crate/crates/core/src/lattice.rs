//! Lattice geometry shared by the forward and dual simulators.
//!
//! [`TorusLattice`] is the finite periodic box the voter model runs on.
//! [`SiteCodec`] packs lattice coordinates into a single `u64` key so that
//! sparse walker systems can live either on a torus or on unbounded `Z^d`.

use crate::error::{Error, Result};

/// Periodic box `(Z/LZ)^d` with row-major site indexing.
///
/// Direction `2j` is `+e_j`, direction `2j + 1` is `-e_j`.
#[derive(Clone, Debug)]
pub struct TorusLattice {
    d: usize,
    side: usize,
    n_sites: usize,
    strides: Vec<usize>,
    /// Precomputed neighbor table; omitted for very large tori.
    neighbors: Option<Vec<u32>>,
}

/// Largest neighbor table (in entries) that is precomputed.
const MAX_TABLE_ENTRIES: usize = 1 << 25;

impl TorusLattice {
    pub fn new(d: usize, side: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("lattice dimension must be at least 1"));
        }
        if side < 3 {
            return Err(Error::invalid(format!(
                "torus side L = {side} is too small; L >= 3 is required (L = 2 doubles edges)"
            )));
        }
        let n_sites = (side as u128).checked_pow(d as u32).filter(|&n| n <= u32::MAX as u128).ok_or_else(
            || Error::Capacity(format!("torus with L = {side}, d = {d} has more than 2^32 sites")),
        )? as usize;
        let mut strides = Vec::with_capacity(d);
        let mut s = 1usize;
        for _ in 0..d {
            strides.push(s);
            s *= side;
        }
        let mut lat = TorusLattice { d, side, n_sites, strides, neighbors: None };
        if n_sites * 2 * d <= MAX_TABLE_ENTRIES {
            let mut table = vec![0u32; n_sites * 2 * d];
            for site in 0..n_sites {
                for dir in 0..2 * d {
                    table[site * 2 * d + dir] = lat.compute_neighbor(site, dir) as u32;
                }
            }
            lat.neighbors = Some(table);
        }
        Ok(lat)
    }

    #[inline]
    fn compute_neighbor(&self, site: usize, dir: usize) -> usize {
        let j = dir >> 1;
        let stride = self.strides[j];
        let c = (site / stride) % self.side;
        if dir & 1 == 0 {
            if c + 1 == self.side { site - c * stride } else { site + stride }
        } else if c == 0 {
            site + (self.side - 1) * stride
        } else {
            site - stride
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn degree(&self) -> usize {
        2 * self.d
    }

    /// The site playing the role of the origin `O`.
    #[inline]
    pub fn origin(&self) -> usize {
        0
    }

    #[inline]
    pub fn neighbor(&self, site: usize, dir: usize) -> usize {
        match &self.neighbors {
            Some(table) => table[site * 2 * self.d + dir] as usize,
            None => self.compute_neighbor(site, dir),
        }
    }

    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        (0..2 * self.d).map(|dir| self.neighbor(site, dir)).collect()
    }

    /// Coordinates in `[0, L)^d`.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        (0..self.d).map(|j| (site / self.strides[j]) % self.side).collect()
    }

    /// Site index of a displacement from the origin; components may be negative.
    pub fn site_of(&self, displacement: &[i64]) -> usize {
        debug_assert_eq!(displacement.len(), self.d);
        let l = self.side as i64;
        displacement
            .iter()
            .zip(&self.strides)
            .map(|(&x, &s)| (x.rem_euclid(l) as usize) * s)
            .sum()
    }

    /// Minimal-image displacement of `site` from the origin, each component in `(-L/2, L/2]`.
    pub fn displacement(&self, site: usize) -> Vec<i64> {
        let l = self.side as i64;
        self.coords(site)
            .into_iter()
            .map(|c| {
                let c = c as i64;
                if c > l / 2 { c - l } else { c }
            })
            .collect()
    }
}

/// Whether walkers wrap around a torus or live on all of `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Torus { side: usize },
    Infinite,
}

/// Packs a lattice point into a `u64`: `bits` bits per coordinate.
///
/// On the torus a field stores the coordinate in `[0, L)`. On `Z^d` it stores
/// `x + 2^(bits-1)`; a step that would reach either end of the field is
/// reported as an overflow instead of silently aliasing.
#[derive(Clone, Copy, Debug)]
pub struct SiteCodec {
    d: u32,
    bits: u32,
    mask: u64,
    geometry: Geometry,
    side: u64,
    offset: u64,
}

impl SiteCodec {
    pub fn new(d: usize, geometry: Geometry) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("lattice dimension must be at least 1"));
        }
        let d32 = d as u32;
        let (bits, side, offset) = match geometry {
            Geometry::Torus { side } => {
                if side < 3 {
                    return Err(Error::invalid(format!("torus side L = {side} is too small; L >= 3 is required")));
                }
                let bits = u64::BITS - ((side - 1) as u64).leading_zeros();
                (bits, side as u64, 0)
            }
            Geometry::Infinite => {
                let bits = (64 / d32).min(24);
                (bits, 0, 1u64 << (bits - 1))
            }
        };
        if bits == 0 || (bits as u64) * (d as u64) > 64 {
            return Err(Error::Capacity(format!(
                "cannot pack d = {d} coordinates into 64 bits for {geometry:?}"
            )));
        }
        if matches!(geometry, Geometry::Infinite) && bits < 8 {
            return Err(Error::Capacity(format!("unbounded lattice with d = {d} leaves only {bits} bits per coordinate")));
        }
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        Ok(SiteCodec { d: d32, bits, mask, geometry, side, offset })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn origin(&self) -> u64 {
        (0..self.d).fold(0u64, |k, j| k | (self.offset << (j * self.bits)))
    }

    pub fn encode(&self, x: &[i64]) -> Result<u64> {
        if x.len() != self.d as usize {
            return Err(Error::invalid(format!("point has {} coordinates, expected {}", x.len(), self.d)));
        }
        let mut key = 0u64;
        for (j, &c) in x.iter().enumerate() {
            let field = match self.geometry {
                Geometry::Torus { .. } => c.rem_euclid(self.side as i64) as u64,
                Geometry::Infinite => {
                    let f = c + self.offset as i64;
                    if f <= 0 || f >= self.mask as i64 {
                        return Err(Error::Capacity(format!("coordinate {c} outside the packable range")));
                    }
                    f as u64
                }
            };
            key |= field << (j as u32 * self.bits);
        }
        Ok(key)
    }

    /// Coordinates relative to the origin (torus coordinates in `[0, L)`).
    pub fn decode(&self, key: u64) -> Vec<i64> {
        (0..self.d)
            .map(|j| ((key >> (j * self.bits)) & self.mask) as i64 - self.offset as i64)
            .collect()
    }

    /// Neighbor of `key` in direction `dir`; `None` only on unbounded-lattice overflow.
    #[inline(always)]
    pub fn step(&self, key: u64, dir: u32) -> Option<u64> {
        let shift = (dir >> 1) * self.bits;
        let c = (key >> shift) & self.mask;
        let unit = 1u64 << shift;
        if dir & 1 == 0 {
            match self.geometry {
                Geometry::Torus { .. } => Some(if c + 1 == self.side { key - c * unit } else { key + unit }),
                Geometry::Infinite => (c + 1 < self.mask).then(|| key + unit),
            }
        } else {
            match self.geometry {
                Geometry::Torus { .. } => Some(if c == 0 { key + (self.side - 1) * unit } else { key - unit }),
                Geometry::Infinite => (c > 1).then(|| key - unit),
            }
        }
    }

    /// Row-major torus site index of a torus key (for lookups in a [`TorusLattice`] field).
    pub fn torus_index(&self, key: u64) -> usize {
        let mut idx = 0u64;
        let mut stride = 1u64;
        for j in 0..self.d {
            idx += ((key >> (j * self.bits)) & self.mask) * stride;
            stride *= self.side;
        }
        idx as usize
    }
}
