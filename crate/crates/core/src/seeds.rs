//! Sub-seed derivation.
//!
//! Every random component is seeded from one user seed through
//! `derive(seed, label, index)`: the label is hashed with 64-bit FNV-1a,
//! combined with the seed and index, and passed through the SplitMix64
//! finaliser. Distinct labels or indices give unrelated streams.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, label: &str, index: u64) -> u64 {
    mix(mix(seed ^ fnv1a(label)).wrapping_add(index))
}
