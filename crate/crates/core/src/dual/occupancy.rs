//! Open-addressing map from packed site keys to lineage classes.
//!
//! Linear probing with backward-shift deletion; the table doubles when the
//! load factor passes one half. `u64::MAX` marks an empty slot, which no
//! packed site key can equal.

const EMPTY: u64 = u64::MAX;

#[derive(Clone, Debug)]
pub(crate) struct OccupancyMap {
    keys: Vec<u64>,
    vals: Vec<u32>,
    len: usize,
    shift: u32,
}

#[inline(always)]
fn slot_of(key: u64, shift: u32) -> usize {
    (key.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> shift) as usize
}

impl OccupancyMap {
    pub fn with_capacity(n: usize) -> Self {
        let cap = (2 * n.max(8)).next_power_of_two();
        OccupancyMap { keys: vec![EMPTY; cap], vals: vec![0; cap], len: 0, shift: 64 - cap.trailing_zeros() }
    }

    pub fn clear(&mut self) {
        if self.len > 0 {
            self.keys.fill(EMPTY);
            self.len = 0;
        }
    }

    #[inline(always)]
    fn mask(&self) -> usize {
        self.keys.len() - 1
    }

    #[inline]
    pub fn get(&self, key: u64) -> Option<u32> {
        let mask = self.mask();
        let mut i = slot_of(key, self.shift);
        loop {
            let k = self.keys[i];
            if k == key {
                return Some(self.vals[i]);
            }
            if k == EMPTY {
                return None;
            }
            i = (i + 1) & mask;
        }
    }

    /// Inserts `key -> val` unless `key` is present; returns the existing value if so.
    #[inline]
    pub fn insert_or_get(&mut self, key: u64, val: u32) -> Option<u32> {
        let mask = self.mask();
        let mut i = slot_of(key, self.shift);
        loop {
            let k = self.keys[i];
            if k == key {
                return Some(self.vals[i]);
            }
            if k == EMPTY {
                self.keys[i] = key;
                self.vals[i] = val;
                self.len += 1;
                if 2 * self.len > self.keys.len() {
                    self.grow();
                }
                return None;
            }
            i = (i + 1) & mask;
        }
    }

    /// Inserts or overwrites.
    #[inline]
    pub fn set(&mut self, key: u64, val: u32) {
        let mask = self.mask();
        let mut i = slot_of(key, self.shift);
        loop {
            let k = self.keys[i];
            if k == key {
                self.vals[i] = val;
                return;
            }
            if k == EMPTY {
                self.keys[i] = key;
                self.vals[i] = val;
                self.len += 1;
                if 2 * self.len > self.keys.len() {
                    self.grow();
                }
                return;
            }
            i = (i + 1) & mask;
        }
    }

    #[inline]
    pub fn remove(&mut self, key: u64) -> Option<u32> {
        let mask = self.mask();
        let mut i = slot_of(key, self.shift);
        loop {
            let k = self.keys[i];
            if k == EMPTY {
                return None;
            }
            if k == key {
                break;
            }
            i = (i + 1) & mask;
        }
        let out = self.vals[i];
        // Backward-shift: pull later entries of the cluster into the hole.
        let mut hole = i;
        let mut j = i;
        loop {
            j = (j + 1) & mask;
            let k = self.keys[j];
            if k == EMPTY {
                break;
            }
            let home = slot_of(k, self.shift);
            // Entry at j may move to the hole iff its home is not in (hole, j] cyclically.
            let in_range = if hole <= j { hole < home && home <= j } else { hole < home || home <= j };
            if !in_range {
                self.keys[hole] = k;
                self.vals[hole] = self.vals[j];
                hole = j;
            }
        }
        self.keys[hole] = EMPTY;
        self.len -= 1;
        Some(out)
    }

    fn grow(&mut self) {
        let old_keys = std::mem::take(&mut self.keys);
        let old_vals = std::mem::take(&mut self.vals);
        let cap = old_keys.len() * 2;
        self.keys = vec![EMPTY; cap];
        self.vals = vec![0; cap];
        self.shift = 64 - cap.trailing_zeros();
        self.len = 0;
        for (k, v) in old_keys.into_iter().zip(old_vals) {
            if k != EMPTY {
                self.set(k, v);
            }
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.len
    }
}
