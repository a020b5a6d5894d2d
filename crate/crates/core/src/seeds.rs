//! Named seed derivation.
//!
//! All randomness in the toolkit flows from a single root seed through
//! named derivations, so every subsystem (instance generation, lattice
//! search, race shuffles, selector folds) is independently replayable.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `root` and a textual purpose label.
pub fn derive(root: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(b"/");
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is at least 8 bytes"))
}

/// A deterministic RNG for the given root seed and purpose label.
pub fn rng(root: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive(root, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_label_sensitive() {
        assert_eq!(derive(7, "generator"), derive(7, "generator"));
        assert_ne!(derive(7, "generator"), derive(7, "search"));
        assert_ne!(derive(7, "generator"), derive(8, "generator"));
    }

    #[test]
    fn rngs_with_same_label_agree() {
        use rand::Rng;
        let mut a = rng(42, "x");
        let mut b = rng(42, "x");
        for _ in 0..8 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }
}
