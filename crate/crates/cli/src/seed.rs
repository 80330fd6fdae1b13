//! Per-scenario random streams: ChaCha20 seeded from
//! splitmix64(seed ^ fnv1a64(scenario name)).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const GENERATOR: &str = "ChaCha20";

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, name: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(name.as_bytes()))
}

pub fn stream(seed: u64, name: &str) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(stream_seed(seed, name))
}
