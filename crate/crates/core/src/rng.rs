//! Deterministic random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream whose seed
//! is derived from a master seed and an integer coordinate (task index,
//! repetition index, ...). Derivation is a pure function, so work units can be
//! generated in any order, or in parallel, and still produce identical output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(master: u64, index: u64) -> Stream {
    stream(derive_seed(master, index))
}

/// Partial Fisher-Yates: after the call, `items[..n]` is a uniform random
/// ordered sample without replacement of the original contents.
///
/// Only `n` swaps are performed.
pub fn partial_shuffle<T, R: Rng + ?Sized>(items: &mut [T], n: usize, rng: &mut R) {
    let len = items.len();
    assert!(n <= len, "cannot take {n} of {len} items");
    for i in 0..n {
        let j = rng.random_range(i..len);
        items.swap(i, j);
    }
}
