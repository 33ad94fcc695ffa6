//! Seed splitting.
//!
//! Every random stream in the crate is keyed by a base seed and a path of
//! indices, `derive_seed(derive_seed(base, i), j)`. The mixing step is the
//! SplitMix64 finalizer, so neighbouring indices give unrelated seeds.

pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
