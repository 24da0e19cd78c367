//! Reproducible random streams.
//!
//! A [`SeededRandomSource`] is a `(master_seed, stream_id)` pair. The pair
//! keys a ChaCha20 generator, so equal pairs replay the same draws and
//! distinct stream ids give independent sequences. Parallel code never
//! shares a generator: each task derives its own child stream from a
//! stable tag (replicate index, cluster count, ...), which makes results
//! independent of thread count and scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRandomSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRandomSource {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, stream_id: 0 }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Child stream keyed by `tag`. Deterministic and collision-resistant.
    pub fn derive(&self, tag: u64) -> Self {
        let id = splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(0xA076_1D64_78BD_642F)));
        Self { master_seed: self.master_seed, stream_id: id }
    }

    /// Child stream keyed by a label and an index, e.g. `("replicate", 7)`.
    pub fn derive_named(&self, label: &str, index: u64) -> Self {
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        self.derive(h).derive(index)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut r = ChaCha20Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }
}
