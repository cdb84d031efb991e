//! Deterministic seed derivation.
//!
//! Every random stream in the crate is keyed by a chain of integers hashed
//! through splitmix64, so outputs are reproducible independent of thread
//! scheduling.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a sequence of key parts into a single 64-bit seed.
pub fn derive(parts: &[u64]) -> u64 {
    let mut acc = 0x51_7c_c1_b7_27_22_0a_95u64;
    for &part in parts {
        acc = splitmix64(acc ^ splitmix64(part));
    }
    acc
}

/// Domain-separation tags so distinct purposes never share a stream.
pub mod tag {
    pub const MODEL: u64 = 1;
    pub const SAMPLE_ROW: u64 = 2;
    pub const TRIAL: u64 = 3;
    pub const SYMMETRIC_MATRIX: u64 = 4;
    pub const ORBIT_SHUFFLE: u64 = 5;
    pub const BASIS_CHECK: u64 = 6;
}
