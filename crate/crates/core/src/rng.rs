//! Seeded random streams.
//!
//! Every stream in a run is derived from the scenario's master seed, a stream
//! tag and a replica index:
//!
//! ```text
//! seed(master, stream, index) = splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
//! ```
//!
//! and drives a `ChaCha8Rng`. Replicas therefore never share state, and the
//! numbers a replica sees do not depend on how replicas are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Stream tags keeping the different consumers of one master seed apart.
pub mod tags {
    pub const FORWARD: u64 = 1;
    pub const FORWARD_ALT: u64 = 2;
    pub const COUPLED: u64 = 3;
    pub const DIAGNOSTICS: u64 = 4;
    pub const INVARIANT: u64 = 5;
    pub const PERPETUITY_PHI: u64 = 6;
    pub const PERPETUITY_PSI: u64 = 7;
}

/// One round of the splitmix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

pub fn stream(master: u64, tag: u64, index: u64) -> Stream {
    Stream::seed_from_u64(derive_seed(master, tag, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn derived_streams_are_distinct_and_replayable() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1, 0), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1, 0), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1, 1), |r, _| Some(r.random())).collect();
        let d: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 2, 0), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
