//! Keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose seed is
//! a hash of a tuple of integers (campaign seed, sample index, lattice site,
//! ...). Draws therefore do not depend on execution order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a sequence of integer keys into one 64-bit seed.
pub fn derive(parts: &[u64]) -> u64 {
    let mut h = splitmix64(parts.len() as u64);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Encode a signed lattice coordinate as a key part.
pub fn site_key(k: i64) -> u64 {
    k as u64
}

/// A generator for the stream identified by `parts`.
pub fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(parts))
}

/// One uniform draw in [0, 1) from the stream identified by `parts`.
pub fn uniform(parts: &[u64]) -> f64 {
    stream(parts).gen::<f64>()
}

/// Stream for lattice site `site` of sample `sample` in campaign `seed`.
pub fn site_stream(seed: u64, sample: u64, site: &[i64]) -> ChaCha8Rng {
    let mut parts = Vec::with_capacity(3 + site.len());
    parts.push(seed);
    parts.push(sample);
    parts.push(0x5173);
    parts.extend(site.iter().map(|&k| site_key(k)));
    stream(&parts)
}
