//! Keyed random streams.
//!
//! Every stochastic quantity draws from a ChaCha8 stream whose key is a pure
//! function of `(seed, domain, indices...)`. Results therefore depend only on
//! the key layout, never on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream domains. Distinct domains never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    PoolSweep = 1,
    RootEstimate = 2,
    Realization = 3,
    FreshStep = 4,
    EnergyPoint = 5,
    TestMatrix = 6,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit sub-seed from a seed and a key path.
pub fn derive_seed(seed: u64, domain: Domain, indices: &[u64]) -> u64 {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for word in std::iter::once(domain as u64).chain(indices.iter().copied()) {
        state ^= word.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc ^= splitmix64(&mut state);
        state = acc;
    }
    acc
}

/// The stream for a key path.
pub fn stream(seed: u64, domain: Domain, indices: &[u64]) -> Stream {
    let mut state = seed;
    let mut key = [0u8; 32];
    let mut mixed = derive_seed(seed, domain, indices);
    for chunk in key.chunks_exact_mut(8) {
        state ^= mixed;
        mixed = splitmix64(&mut state);
        chunk.copy_from_slice(&mixed.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
