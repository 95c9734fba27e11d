//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by a master seed plus a path of
//! integers (repetition, game index, seat, tick, ...), so results do not
//! depend on execution order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the child stream `path` under `master`.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &k| mix(acc ^ mix(k.wrapping_add(GOLDEN))))
}
