//! Seed derivation and the crate-wide random stream type.
//!
//! Every component draws from its own [`Stream`], a ChaCha8 generator whose
//! seed is derived from the experiment master seed, a fixed text label and a
//! list of integer coordinates (run id, arm index, episode number, ...). The
//! derivation is the first eight bytes (little endian) of
//! `SHA-256(master_le || label || 0x00 || coord_le...)`, so streams are
//! independent of evaluation order and identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

pub fn derive_seed(master: u64, label: &str, coords: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    h.update([0u8]);
    for c in coords {
        h.update(c.to_le_bytes());
    }
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_stream(master: u64, label: &str, coords: &[u64]) -> Stream {
    stream(derive_seed(master, label, coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn labels_and_coords_separate_streams() {
        let a = derive_seed(7, "env", &[0, 1]);
        assert_eq!(a, derive_seed(7, "env", &[0, 1]));
        assert_ne!(a, derive_seed(7, "env", &[1, 0]));
        assert_ne!(a, derive_seed(7, "agent", &[0, 1]));
        assert_ne!(a, derive_seed(8, "env", &[0, 1]));
    }

    #[test]
    fn stream_is_reproducible() {
        let mut s1 = derive_stream(1, "x", &[]);
        let mut s2 = derive_stream(1, "x", &[]);
        for _ in 0..16 {
            assert_eq!(s1.next_u64(), s2.next_u64());
        }
    }
}
