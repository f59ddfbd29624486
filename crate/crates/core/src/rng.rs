//! Named, seedable random streams.
//!
//! Every consumer of randomness derives its own [`ChaCha8Rng`] from the run
//! seed, a label and a task index, so results do not depend on execution
//! order or thread count and are identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a over the label bytes.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives a child seed from a parent seed and a sequence of indices.
pub fn derive_seed(seed: u64, label: &str, indices: &[u64]) -> u64 {
    let mut s = mix(seed ^ label_hash(label));
    for &i in indices {
        s = mix(s ^ mix(i));
    }
    s
}

/// Independent generator for `(seed, label, indices)`.
pub fn stream(seed: u64, label: &str, indices: &[u64]) -> StreamRng {
    let s = derive_seed(seed, label, indices);
    let mut key = [0u8; 32];
    for (k, chunk) in key.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(s.wrapping_add(k as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
