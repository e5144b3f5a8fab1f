//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, role, sub)` in the
//! key and `stream_index` in the nonce, so draws depend only on the address and
//! never on scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct roles never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Couplings = 0,
    AuxA = 1,
    AuxB = 2,
    Bootstrap = 3,
    Chain = 4,
    Swap = 5,
    Synthetic = 6,
}

const DOMAIN_TAG: u64 = 0x736b_666c_7563_7401;

pub fn stream(seed: u64, stream_index: u64, role: StreamRole, sub: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(role as u64).to_le_bytes());
    key[16..24].copy_from_slice(&sub.to_le_bytes());
    key[24..32].copy_from_slice(&DOMAIN_TAG.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream_index);
    rng
}

/// SplitMix64 finalizer; used to fold labels into derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a list of labels.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(master), |acc, &l| mix64(acc ^ mix64(l)))
}
