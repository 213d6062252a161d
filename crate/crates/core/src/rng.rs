//! Deterministic random substreams.
//!
//! Every stochastic step takes its generator from [`substream`], keyed by a
//! master seed and a path of integers (ORC, replicate, chunk, ...). Work can
//! therefore be split across threads in any order and still reproduce the
//! serial result bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent generator for `(seed, keys...)`.
pub fn substream(seed: u64, keys: &[u64]) -> SimRng {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &k in keys {
        // Fold each key through the mixer so that (1, 2) and (2, 1) differ.
        state ^= acc.rotate_left(17) ^ k.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc = splitmix64(&mut state);
    }
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Collapse a key path into a single stream identifier.
pub fn stream_id(keys: &[u64]) -> u64 {
    let mut state = 0x5EED_u64;
    let mut acc = 0;
    for &k in keys {
        state ^= acc ^ k.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc = splitmix64(&mut state);
    }
    acc
}
