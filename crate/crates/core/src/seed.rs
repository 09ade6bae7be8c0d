//! Seed derivation. Every random stream in a run is keyed off the master
//! seed plus a stream label, so adding a consumer never shifts another one.

/// One round of the splitmix64 output function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Pure function of its three inputs; distinct inputs give unrelated seeds.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ a) ^ b.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub(crate) const STREAM_WORKLOAD: u64 = 1;
pub(crate) const STREAM_JITTER: u64 = 2;
pub(crate) const STREAM_DECISION: u64 = 3;
