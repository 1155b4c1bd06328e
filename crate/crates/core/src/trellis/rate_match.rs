use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Circular-buffer rate matcher: each of the three output streams is
/// permuted by its own seeded sub-block interleaver and the permuted
/// streams are concatenated. Blocklength `n` transmits the first `n`
/// buffer positions, so shorter codes are prefixes of longer ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateMatcher {
    k: usize,
    seed: u64,
    /// Buffer position to coded-bit index (`stream * k + time`).
    buffer: Vec<u32>,
}

impl RateMatcher {
    pub fn new(k: usize, seed: u64) -> Self {
        let mut buffer = Vec::with_capacity(3 * k);
        for stream in 0..3u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut perm: Vec<u32> = (0..k as u32).collect();
            perm.shuffle(&mut rng);
            buffer.extend(perm.into_iter().map(|t| stream as u32 * k as u32 + t));
        }
        Self { k, seed, buffer }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Coded-bit indices of the first `n` buffer positions.
    pub fn positions(&self, n: usize) -> Result<&[u32]> {
        if n == 0 || n > 3 * self.k {
            return Err(Error::InvalidArgument("blocklength must lie in 1..=3k"));
        }
        Ok(&self.buffer[..n])
    }

    /// The first `n` channel bits for `coded` (length `3k`).
    pub fn rate_match(&self, coded: &[u8], n: usize) -> Result<Vec<u8>> {
        if coded.len() != 3 * self.k {
            return Err(Error::InvalidArgument("codeword length must be 3k"));
        }
        Ok(self
            .positions(n)?
            .iter()
            .map(|&p| coded[p as usize])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_buffer_is_a_permutation() {
        let rm = RateMatcher::new(40, 7);
        let mut seen = rm.positions(120).unwrap().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, (0..120).collect::<Vec<u32>>());
    }

    #[test]
    fn prefixes_nest_and_are_deterministic() {
        let a = RateMatcher::new(32, 11);
        let b = RateMatcher::new(32, 11);
        assert_eq!(a, b);
        assert_eq!(&a.positions(70).unwrap()[..40], a.positions(40).unwrap());
        assert_ne!(a, RateMatcher::new(32, 12));
    }

    #[test]
    fn rejects_overlong_prefix() {
        let rm = RateMatcher::new(16, 0);
        assert!(rm.positions(49).is_err());
        assert!(rm.rate_match(&[0; 48], 0).is_err());
    }
}
