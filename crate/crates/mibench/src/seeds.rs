//! Deterministic derivation of per-stream RNG seeds.
//!
//! Every random draw in the crate flows through a `ChaCha8Rng` seeded by
//! folding identifying fields (design tag, subject id, algorithm, n, rep
//! index, ...) into a master seed. Streams therefore never depend on
//! iteration or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit fold of integers and strings.
#[derive(Debug, Clone, Copy)]
pub struct SeedMixer(u64);

impl SeedMixer {
    pub fn new(master_seed: u64) -> Self {
        SeedMixer(splitmix64(master_seed))
    }

    pub fn with_u64(self, v: u64) -> Self {
        SeedMixer(splitmix64(self.0 ^ v.wrapping_mul(FNV_PRIME)))
    }

    pub fn with_str(self, s: &str) -> Self {
        let mut h = FNV_OFFSET;
        for &b in s.as_bytes() {
            h = (h ^ b as u64).wrapping_mul(FNV_PRIME);
        }
        self.with_u64(h)
    }

    pub fn finish(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
