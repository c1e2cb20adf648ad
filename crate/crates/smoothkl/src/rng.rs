//! Deterministic, splittable random streams.
//!
//! Every randomized routine derives its own stream from a base seed and a
//! path of integer identifiers (trial index, row index, starting point, ...),
//! so results do not depend on scheduling or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A counter-based generator keyed by `(seed, path)`. Streams with different
/// paths are independent for simulation purposes.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &id in path {
        state ^= id.wrapping_mul(0xA076_1D64_78BD_642F);
        acc ^= splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    let mut s = acc;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
