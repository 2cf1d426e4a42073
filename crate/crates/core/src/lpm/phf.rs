//! Minimal perfect hashing over 64-bit keys (hash-and-displace with per-bucket
//! pilots).
//!
//! Keys are hashed into `ceil(n / 3)` buckets. Buckets are placed largest
//! first: for each one we search the smallest pilot value whose derived slot
//! positions are all free, and record it. Lookup is one hash, one pilot load
//! and one more mix. Keys outside the build set map to an arbitrary slot, so
//! callers must store the key alongside the value and compare.

use crate::error::{Error, Result};

const KEYS_PER_BUCKET: usize = 3;
const MAX_PILOT: u32 = 1 << 22;
const MAX_SEEDS: usize = 16;

#[derive(Debug, Clone)]
pub struct PerfectHash {
    seed: u64,
    pilots: Vec<u32>,
    slots: usize,
}

#[inline(always)]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51afd7ed558ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ceb9fe1a85ec53);
    h ^ (h >> 33)
}

#[inline(always)]
fn reduce(h: u64, n: usize) -> usize {
    ((h as u128 * n as u128) >> 64) as usize
}

#[inline(always)]
fn slot_for(h: u64, pilot: u32, slots: usize) -> usize {
    reduce(fmix64(h ^ fmix64(pilot as u64 ^ 0x9e3779b97f4a7c15)), slots)
}

impl PerfectHash {
    /// Builds a function mapping each of `keys` to a distinct value in
    /// `0..keys.len()`. Tries up to 16 seeds derived from `seed`.
    pub fn build(keys: &[u64], seed: u64) -> Result<Self> {
        let mut sorted = keys.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("perfect hash keys must be distinct".into()));
        }
        for attempt in 0..MAX_SEEDS {
            let s = fmix64(seed.wrapping_add(attempt as u64).wrapping_mul(0x2545f4914f6cdd1d) | 1);
            if let Some(phf) = Self::try_build(keys, s) {
                return Ok(phf);
            }
        }
        Err(Error::PerfectHash { attempts: MAX_SEEDS })
    }

    fn try_build(keys: &[u64], seed: u64) -> Option<Self> {
        let slots = keys.len();
        let num_buckets = slots.div_ceil(KEYS_PER_BUCKET).max(1);

        let mut hashed: Vec<(usize, u64)> = keys
            .iter()
            .map(|&k| {
                let h = fmix64(k ^ seed);
                (reduce(h, num_buckets), h)
            })
            .collect();
        hashed.sort_unstable();

        let mut groups: Vec<&[(usize, u64)]> = hashed.chunk_by(|a, b| a.0 == b.0).collect();
        groups.sort_by_key(|g| std::cmp::Reverse(g.len()));

        let mut pilots = vec![0u32; num_buckets];
        let mut taken = vec![false; slots];
        let mut positions = Vec::with_capacity(16);

        for group in groups {
            // Equal full hashes in one bucket can never be separated.
            if group.windows(2).any(|w| w[0].1 == w[1].1) {
                return None;
            }
            let pilot = (0..MAX_PILOT).find(|&p| {
                positions.clear();
                for &(_, h) in group {
                    let pos = slot_for(h, p, slots);
                    if taken[pos] || positions.contains(&pos) {
                        return false;
                    }
                    positions.push(pos);
                }
                true
            })?;
            for &pos in &positions {
                taken[pos] = true;
            }
            pilots[group[0].0] = pilot;
        }

        Some(Self { seed, pilots, slots })
    }

    #[inline(always)]
    pub fn index(&self, key: u64) -> usize {
        let h = fmix64(key ^ self.seed);
        let pilot = self.pilots[reduce(h, self.pilots.len())];
        slot_for(h, pilot, self.slots)
    }

    /// Number of slots, equal to the number of keys.
    pub fn len(&self) -> usize {
        self.slots
    }

    pub fn is_empty(&self) -> bool {
        self.slots == 0
    }

    pub fn size_bytes(&self) -> usize {
        4 * self.pilots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_minimal_perfect(keys: &[u64], phf: &PerfectHash) {
        let mut seen = vec![false; keys.len()];
        for &k in keys {
            let i = phf.index(k);
            assert!(i < keys.len());
            assert!(!seen[i], "collision at slot {i}");
            seen[i] = true;
        }
    }

    #[test]
    fn random_key_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 10, 100, 1000, 20_000] {
            let mut keys: Vec<u64> = (0..n).map(|_| rng.random()).collect();
            keys.sort_unstable();
            keys.dedup();
            let phf = PerfectHash::build(&keys, 42).unwrap();
            assert_minimal_perfect(&keys, &phf);
        }
    }

    #[test]
    fn structured_keys() {
        // Text-like prefixes differ in few bits.
        let keys: Vec<u64> =
            (0..5000u64).map(|i| u64::from_le_bytes(*format!("ttl{i:05}").as_bytes().first_chunk().unwrap())).collect();
        let phf = PerfectHash::build(&keys, 0).unwrap();
        assert_minimal_perfect(&keys, &phf);
    }

    #[test]
    fn empty_and_duplicate_keys() {
        let phf = PerfectHash::build(&[], 0).unwrap();
        assert!(phf.is_empty());
        assert!(PerfectHash::build(&[5, 5], 0).is_err());
    }
}
