//! Deterministic random streams.
//!
//! Every replica of every experiment draws from its own generator, seeded
//! from `(master_seed, stream_id)`. The stream id for replica `i` of a
//! subcommand is derived from the subcommand tag and `i`, so results never
//! depend on how replicas are scheduled across workers.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// Generator used by all simulation kernels.
pub type SimRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used only to turn subcommand tags into stable integers.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngSeed { master_seed, stream_id }
    }

    /// Seed for replica `index` of the computation labelled `tag`.
    pub fn for_replica(master_seed: u64, tag: &str, index: u64) -> Self {
        let stream_id = splitmix64(fnv1a(tag.as_bytes()) ^ splitmix64(index.wrapping_mul(GOLDEN)));
        RngSeed { master_seed, stream_id }
    }

    /// A child stream, for nested computations that need their own replicas.
    pub fn child(&self, tag: &str, index: u64) -> Self {
        RngSeed::for_replica(splitmix64(self.master_seed ^ self.stream_id.rotate_left(29)), tag, index)
    }

    pub fn rng(&self) -> SimRng {
        let m = self.master_seed;
        let s = self.stream_id;
        let words = [
            splitmix64(m),
            splitmix64(s ^ 0xD1B5_4A32_D192_ED03),
            splitmix64(m ^ s.rotate_left(32) ^ 0x8CB9_2BA7_2F3D_8DD7),
            splitmix64(s.wrapping_add(m.rotate_left(17))),
        ];
        let mut seed = [0u8; 32];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        SimRng::from_seed(seed)
    }
}
