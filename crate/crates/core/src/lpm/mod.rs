//! Longest prefix matching.
//!
//! Patterns of at most 8 bytes live in a hash map keyed by their packed
//! 64-bit form and length. Longer patterns are grouped in buckets keyed by
//! their first 8 bytes; each bucket keeps the remaining suffixes sorted by
//! descending length so a scan can stop at the first hit.
//!
//! [`DynamicMatcher`] supports insertion and is used while training (and for
//! parsing with unbounded tokens). [`StaticMatcher`] is the read-only form
//! built once training is over, for 16-byte bounded tokens only.

mod dynamic;
mod phf;
mod static_matcher;

pub use dynamic::{DynamicMatcher, BOUNDED_MAX_BUCKET_SIZE};
pub use phf::PerfectHash;
pub use static_matcher::{BucketInfo, StaticMatcher, INLINE_SUFFIXES};

use crate::dictionary::TokenId;
use crate::error::{Error, Result};

/// Length of the bucket key for long patterns.
pub const PREFIX_LEN: usize = 8;

const MASKS: [u64; 9] = [
    0x0000000000000000,
    0x00000000000000FF,
    0x000000000000FFFF,
    0x0000000000FFFFFF,
    0x00000000FFFFFFFF,
    0x000000FFFFFFFFFF,
    0x0000FFFFFFFFFFFF,
    0x00FFFFFFFFFFFFFF,
    0xFFFFFFFFFFFFFFFF,
];

/// Up to 8 bytes packed little-endian (first byte lowest), zero above `len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PackedWord {
    pub word: u64,
    pub len: u8,
}

impl PackedWord {
    pub fn pack(bytes: &[u8]) -> Result<Self> {
        if bytes.len() > 8 {
            return Err(Error::PackLength(bytes.len()));
        }
        Ok(Self { word: load_word(bytes, bytes.len()), len: bytes.len() as u8 })
    }

    /// Packs the first `min(8, bytes.len())` bytes.
    #[inline(always)]
    pub fn pack_prefix(bytes: &[u8]) -> Self {
        let len = bytes.len().min(8);
        Self { word: load_word(bytes, len), len: len as u8 }
    }

    pub fn unpack(self) -> Vec<u8> {
        self.word.to_le_bytes()[..self.len as usize].to_vec()
    }

    #[inline(always)]
    pub fn is_prefix_of(self, input: PackedWord) -> bool {
        is_prefix(input, self)
    }
}

/// Loads the first `len` bytes of `bytes` as a little-endian word.
#[inline(always)]
pub(crate) fn load_word(bytes: &[u8], len: usize) -> u64 {
    debug_assert!(len <= 8 && len <= bytes.len());
    if bytes.len() >= 8 {
        u64::from_le_bytes(bytes[..8].try_into().unwrap()) & MASKS[len]
    } else {
        let mut buf = [0u8; 8];
        buf[..len].copy_from_slice(&bytes[..len]);
        u64::from_le_bytes(buf)
    }
}

#[inline(always)]
pub(crate) fn mask(word: u64, len: usize) -> u64 {
    word & MASKS[len]
}

/// Number of equal low-order bytes of two packed words; 8 when equal.
#[inline(always)]
pub fn shared_prefix_size(a: PackedWord, b: PackedWord) -> usize {
    shared_bytes(a.word, b.word)
}

#[inline(always)]
pub(crate) fn shared_bytes(a: u64, b: u64) -> usize {
    let diff = a ^ b;
    if diff == 0 {
        8
    } else {
        (diff.trailing_zeros() / 8) as usize
    }
}

/// True when `prefix` is a prefix of `input`. The length guard matters:
/// zero padding would otherwise let "ab" match the packed form of "a".
#[inline(always)]
pub fn is_prefix(input: PackedWord, prefix: PackedWord) -> bool {
    prefix.len <= input.len && shared_prefix_size(input, prefix) >= prefix.len as usize
}

/// Anything that answers longest-prefix queries over a dictionary that
/// contains all single-byte tokens.
pub trait LongestPrefixMatch {
    /// Longest entry that is a prefix of `input`, as `(id, length)`.
    /// `input` must be non-empty; the result length is always at least 1.
    fn longest_match(&self, input: &[u8]) -> (TokenId, usize);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pw(bytes: &[u8]) -> PackedWord {
        PackedWord::pack(bytes).unwrap()
    }

    #[test]
    fn pack_examples() {
        assert_eq!(pw(b"a"), PackedWord { word: 0x61, len: 1 });
        assert_eq!(pw(b""), PackedWord { word: 0, len: 0 });
        assert_eq!(pw(b"abcdefgh").word & 0xff, b'a' as u64);
        assert!(matches!(PackedWord::pack(b"abcdefghi"), Err(Error::PackLength(9))));
    }

    #[test]
    fn pack_unpack_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.random_range(0..=8);
            let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            assert_eq!(pw(&bytes).unpack(), bytes);
        }
    }

    #[test]
    fn shared_prefix_examples() {
        assert_eq!(shared_prefix_size(pw(b"abcdefgh"), pw(b"abcdefgh")), 8);
        assert_eq!(shared_prefix_size(pw(b""), pw(b"")), 8);
        assert_eq!(shared_prefix_size(pw(b"xbc"), pw(b"abc")), 0);
        assert_eq!(shared_prefix_size(pw(b"abcx"), pw(b"abcy")), 3);
    }

    #[test]
    fn is_prefix_examples() {
        assert!(is_prefix(pw(b"abc"), pw(b"ab")));
        assert!(!is_prefix(pw(b"ab"), pw(b"abc")));
        assert!(is_prefix(pw(b"a\0b"), pw(b"a\0")));
        assert!(!is_prefix(pw(b"a"), pw(b"ab")));
        // "a\0" vs "a": padding makes the words equal, the length guard rejects.
        assert!(!is_prefix(pw(b"a"), pw(b"a\0")));
        assert!(is_prefix(pw(b"a"), pw(b"")));
    }

    #[test]
    fn load_word_short_and_long_slices() {
        assert_eq!(load_word(b"abcdefghij", 3), pw(b"abc").word);
        assert_eq!(load_word(b"ab", 2), pw(b"ab").word);
        assert_eq!(load_word(b"abcdefghij", 8), pw(b"abcdefgh").word);
    }
}
