//! Keyed random streams.
//!
//! Every random draw in the toolkit comes from a ChaCha8 generator whose key
//! is expanded from the master seed with splitmix64 and whose 64-bit stream
//! id is derived from a *key path* such as `[stage::NOISE, network, rep]`.
//! Two draws with different key paths are independent streams; the same key
//! path always yields the same numbers, whichever thread asks for it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in manifests so seeds stay portable.
pub const RNG_ALGORITHM: &str = "chacha8-splitmix64-keyed-v1";

pub type StreamRng = ChaCha8Rng;

/// Key-path heads used by the library. Callers may use any other values.
pub mod stage {
    pub const ER: u64 = 0x01;
    pub const TRIANGLE: u64 = 0x02;
    pub const SBM_LABELS: u64 = 0x03;
    pub const SBM_EDGES: u64 = 0x04;
    pub const NETWORK: u64 = 0x10;
    pub const NOISE: u64 = 0x20;
    pub const PILOT: u64 = 0x21;
    pub const COUPLED_BASE: u64 = 0x30;
    pub const COUPLED_COPY: u64 = 0x31;
    pub const LIPSCHITZ_PROBE: u64 = 0x40;
}

#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into a single 64-bit value.
pub fn key_hash(key: &[u64]) -> u64 {
    let mut state = 0x6A09_E667_F3BC_C908 ^ (key.len() as u64);
    let mut acc = splitmix64(&mut state);
    for &k in key {
        state ^= k;
        acc = acc.rotate_left(23) ^ splitmix64(&mut state);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub const fn new(master: u64) -> Self {
        Self { master }
    }

    pub const fn master(&self) -> u64 {
        self.master
    }

    /// The generator for one key path.
    pub fn rng(&self, key: &[u64]) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut state = self.master;
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(key_hash(key));
        rng
    }

    /// A derived family of streams, for handing a sub-experiment its own
    /// seed space (e.g. one network draw inside a table cell).
    pub fn child(&self, key: &[u64]) -> Streams {
        let mut state = self.master ^ key_hash(key);
        Streams::new(splitmix64(&mut state))
    }
}
