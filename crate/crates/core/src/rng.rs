//! Deterministic seeding for ensemble members.
//!
//! Every ensemble operation derives the RNG for member `i` from
//! `(seed, i)` alone, so members can be generated in any order — or in
//! parallel — and still reproduce bit-identically. The subseed is the
//! `i`-th output of a SplitMix64 stream started at `seed`; the member
//! generator is ChaCha8, a counter-based stream cipher RNG with a
//! platform-independent output sequence.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output for index `i` of the stream seeded with `seed`.
pub fn subseed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for ensemble member `index` under the run seed `seed`.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed(seed, index))
}
