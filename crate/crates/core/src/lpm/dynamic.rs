use rustc_hash::FxHashMap;

use super::{load_word, mask, shared_bytes, LongestPrefixMatch, PREFIX_LEN};
use crate::dictionary::{Dictionary, TokenId, Variant};
use crate::error::{Error, Result};

/// Bucket capacity for the bounded variant.
pub const BOUNDED_MAX_BUCKET_SIZE: usize = 128;

/// A long pattern, minus its 8-byte bucket key.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LongEntry {
    /// First `min(len, 8)` suffix bytes, packed.
    pub head: u64,
    /// Suffix length in bytes (pattern length minus 8).
    pub len: u32,
    /// Offset into `tails` of suffix bytes past the first 8.
    pub tail: u32,
    pub id: TokenId,
}

/// Mutable longest-prefix matcher used during training.
#[derive(Debug, Clone)]
pub struct DynamicMatcher {
    pub(crate) short: FxHashMap<(u64, u8), TokenId>,
    pub(crate) buckets: FxHashMap<u64, Vec<LongEntry>>,
    tails: Vec<u8>,
    variant: Variant,
    max_bucket_size: Option<usize>,
    entries: usize,
}

impl DynamicMatcher {
    /// Matcher holding the 256 single-byte tokens.
    pub fn new(variant: Variant) -> Self {
        let mut short = FxHashMap::default();
        short.reserve(1 << 16);
        for b in 0..=255u8 {
            short.insert((b as u64, 1), TokenId::from(b));
        }
        Self {
            short,
            buckets: FxHashMap::default(),
            tails: Vec::new(),
            variant,
            max_bucket_size: match variant {
                Variant::Bounded16 => Some(BOUNDED_MAX_BUCKET_SIZE),
                Variant::Unbounded => None,
            },
            entries: 256,
        }
    }

    /// Rebuilds the matcher for a loaded dictionary, inserting entries in ID
    /// order exactly as training did.
    pub fn from_dictionary(dict: &Dictionary) -> Result<Self> {
        let mut matcher = Self::new(dict.variant());
        for i in 256..dict.len() {
            matcher.insert(dict.entry(i), TokenId::new(i as u32))?;
        }
        Ok(matcher)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn max_bucket_size(&self) -> Option<usize> {
        self.max_bucket_size
    }

    /// Overrides the bucket cap. `None` leaves buckets unbounded.
    pub fn set_max_bucket_size(&mut self, cap: Option<usize>) {
        self.max_bucket_size = cap;
    }

    /// Number of stored patterns.
    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    pub fn num_buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.buckets.values().map(Vec::len)
    }

    /// Suffixes stored under an 8-byte prefix, in search order.
    pub fn bucket(&self, prefix: &[u8]) -> Option<Vec<(Vec<u8>, TokenId)>> {
        if prefix.len() != PREFIX_LEN {
            return None;
        }
        let bucket = self.buckets.get(&load_word(prefix, PREFIX_LEN))?;
        Some(bucket.iter().map(|e| (self.suffix_bytes(e), e.id)).collect())
    }

    pub(crate) fn suffix_bytes(&self, e: &LongEntry) -> Vec<u8> {
        let head_len = (e.len as usize).min(8);
        let mut out = e.head.to_le_bytes()[..head_len].to_vec();
        if e.len > 8 {
            let start = e.tail as usize;
            out.extend_from_slice(&self.tails[start..start + e.len as usize - 8]);
        }
        out
    }

    /// ID of the entry whose content is exactly `bytes`.
    pub fn get(&self, bytes: &[u8]) -> Option<TokenId> {
        if bytes.is_empty() {
            return None;
        }
        let (id, len) = self.longest_match(bytes);
        (len == bytes.len()).then_some(id)
    }

    /// Adds a pattern. Long patterns go into the bucket for their first 8
    /// bytes, after every suffix at least as long, so equal lengths keep
    /// insertion order.
    pub fn insert(&mut self, bytes: &[u8], id: TokenId) -> Result<()> {
        let max = self.variant.max_entry_len();
        if bytes.is_empty() || bytes.len() > max {
            return Err(Error::EntryLength { len: bytes.len(), max });
        }
        if let Some(existing) = self.get(bytes) {
            return Err(Error::Duplicate { existing: existing.get() });
        }

        if bytes.len() <= PREFIX_LEN {
            self.short.insert((load_word(bytes, bytes.len()), bytes.len() as u8), id);
        } else {
            let prefix = load_word(bytes, PREFIX_LEN);
            let suffix = &bytes[PREFIX_LEN..];
            let bucket = self.buckets.entry(prefix).or_default();
            if let Some(cap) = self.max_bucket_size {
                if bucket.len() >= cap {
                    return Err(Error::BucketFull { prefix, cap });
                }
            }
            let tail = if suffix.len() > 8 {
                let at = self.tails.len() as u32;
                self.tails.extend_from_slice(&suffix[8..]);
                at
            } else {
                0
            };
            let entry = LongEntry { head: load_word(suffix, suffix.len().min(8)), len: suffix.len() as u32, tail, id };
            let at = bucket.partition_point(|e| e.len >= entry.len);
            bucket.insert(at, entry);
        }
        self.entries += 1;
        Ok(())
    }

    #[inline(always)]
    fn matches_suffix(&self, e: &LongEntry, rest: &[u8], rest_head: u64) -> bool {
        let len = e.len as usize;
        if len > rest.len() {
            return false;
        }
        if len <= 8 {
            shared_bytes(rest_head, e.head) >= len
        } else {
            rest_head == e.head && {
                let start = e.tail as usize;
                rest[8..len] == self.tails[start..start + len - 8]
            }
        }
    }
}

impl LongestPrefixMatch for DynamicMatcher {
    #[inline]
    fn longest_match(&self, input: &[u8]) -> (TokenId, usize) {
        debug_assert!(!input.is_empty());
        if input.len() > PREFIX_LEN {
            let prefix = load_word(input, PREFIX_LEN);
            if let Some(bucket) = self.buckets.get(&prefix) {
                let rest = &input[PREFIX_LEN..];
                let rest_head = load_word(rest, rest.len().min(8));
                for e in bucket {
                    if self.matches_suffix(e, rest, rest_head) {
                        return (e.id, PREFIX_LEN + e.len as usize);
                    }
                }
            }
        }

        let word = load_word(input, input.len().min(8));
        for len in (1..=input.len().min(8)).rev() {
            if let Some(&id) = self.short.get(&(mask(word, len), len as u8)) {
                return (id, len);
            }
        }
        unreachable!("single-byte tokens are always present")
    }
}
