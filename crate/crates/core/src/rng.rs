//! Counter-based splitting of one master seed into independent streams.
//!
//! Every random draw in a run comes from a stream identified by
//! `(master seed, label, index…)`. Streams never depend on scheduling, so
//! serial and parallel executions produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Labels for the random streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Noise = 1,
    PriorInit = 2,
    Kernel = 3,
    Resample = 4,
    Repetition = 5,
    Reference = 6,
    User = 7,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A node in the stream tree: derive children by label and counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedKey(u64);

impl SeedKey {
    pub const fn new(master: u64) -> Self {
        Self(master)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn child(self, stream: Stream, index: u64) -> Self {
        let a = splitmix64(self.0 ^ splitmix64(stream as u64));
        Self(splitmix64(a ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }

    pub fn rng(self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut state = self.0;
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    pub fn stream(self, stream: Stream, index: u64) -> StreamRng {
        self.child(stream, index).rng()
    }
}
