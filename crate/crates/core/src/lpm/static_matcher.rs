use rustc_hash::FxHashMap;

use super::dynamic::DynamicMatcher;
use super::phf::PerfectHash;
use super::{load_word, mask, shared_bytes, LongestPrefixMatch, PREFIX_LEN};
use crate::dictionary::{TokenId, Variant};
use crate::error::{Error, Result};

/// Suffixes stored directly in a bucket record.
pub const INLINE_SUFFIXES: usize = 2;

const NO_OVERFLOW: u32 = u32::MAX;

/// Per-prefix record, one cache line. The inline slots hold the longest
/// suffixes of the bucket; the rest live in the shared overflow vector.
#[repr(C, align(64))]
#[derive(Debug, Clone, Copy)]
pub struct BucketInfo {
    pub prefix: u64,
    pub inline_suffixes: [u64; INLINE_SUFFIXES],
    pub inline_ids: [TokenId; INLINE_SUFFIXES],
    overflow_offset: u32,
    pub overflow_size: u16,
    pub inline_lens: [u8; INLINE_SUFFIXES],
    pub inline_count: u8,
}

const _: () = assert!(std::mem::size_of::<BucketInfo>() == 64);

impl BucketInfo {
    pub fn overflow_offset(&self) -> Option<u32> {
        (self.overflow_offset != NO_OVERFLOW).then_some(self.overflow_offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverflowEntry {
    pub suffix: u64,
    pub id: TokenId,
    pub len: u8,
}

/// Read-only matcher for 16-byte bounded dictionaries.
#[derive(Debug, Clone)]
pub struct StaticMatcher {
    phf: PerfectHash,
    infos: Vec<BucketInfo>,
    overflow: Vec<OverflowEntry>,
    short: FxHashMap<(u64, u8), TokenId>,
}

impl StaticMatcher {
    /// Freezes a bounded-variant dynamic matcher. Searches on the result
    /// return exactly what the dynamic matcher returns.
    pub fn finalize(dynamic: &DynamicMatcher, seed: u64) -> Result<Self> {
        if dynamic.variant() != Variant::Bounded16 {
            return Err(Error::Config("static matching requires the bounded16 variant".into()));
        }

        // Numeric prefix order fixes the overflow layout independent of
        // hash-map iteration order.
        let mut prefixes: Vec<u64> = dynamic.buckets.keys().copied().collect();
        prefixes.sort_unstable();
        let phf = PerfectHash::build(&prefixes, seed)?;

        let empty = BucketInfo {
            prefix: 0,
            inline_suffixes: [0; INLINE_SUFFIXES],
            inline_ids: [TokenId::default(); INLINE_SUFFIXES],
            overflow_offset: NO_OVERFLOW,
            overflow_size: 0,
            inline_lens: [0; INLINE_SUFFIXES],
            inline_count: 0,
        };
        let mut infos = vec![empty; prefixes.len()];
        let mut overflow = Vec::new();

        for &prefix in &prefixes {
            let bucket = &dynamic.buckets[&prefix];
            let mut info = BucketInfo { prefix, ..empty };
            for (slot, e) in bucket.iter().take(INLINE_SUFFIXES).enumerate() {
                debug_assert!(e.len as usize <= 8);
                info.inline_suffixes[slot] = e.head;
                info.inline_lens[slot] = e.len as u8;
                info.inline_ids[slot] = e.id;
                info.inline_count += 1;
            }
            let rest = bucket.len().saturating_sub(INLINE_SUFFIXES);
            if rest > 0 {
                info.overflow_offset =
                    u32::try_from(overflow.len()).map_err(|_| Error::Config("overflow region too large".into()))?;
                info.overflow_size =
                    u16::try_from(rest).map_err(|_| Error::Config(format!("bucket of {} suffixes", bucket.len())))?;
                overflow.extend(bucket[INLINE_SUFFIXES..].iter().map(|e| OverflowEntry {
                    suffix: e.head,
                    id: e.id,
                    len: e.len as u8,
                }));
            }
            infos[phf.index(prefix)] = info;
        }

        Ok(Self { phf, infos, overflow, short: dynamic.short.clone() })
    }

    pub fn num_buckets(&self) -> usize {
        self.infos.len()
    }

    pub fn bucket_info(&self, prefix: &[u8]) -> Option<&BucketInfo> {
        if prefix.len() != PREFIX_LEN || self.infos.is_empty() {
            return None;
        }
        let key = load_word(prefix, PREFIX_LEN);
        let info = &self.infos[self.phf.index(key)];
        (info.prefix == key).then_some(info)
    }

    pub fn overflow_entries(&self, info: &BucketInfo) -> &[OverflowEntry] {
        match info.overflow_offset() {
            Some(at) => &self.overflow[at as usize..at as usize + info.overflow_size as usize],
            None => &[],
        }
    }

    /// Approximate heap size of the lookup structures.
    pub fn size_bytes(&self) -> usize {
        self.phf.size_bytes()
            + self.infos.len() * std::mem::size_of::<BucketInfo>()
            + self.overflow.len() * std::mem::size_of::<OverflowEntry>()
            + self.short.capacity() * (std::mem::size_of::<((u64, u8), TokenId)>() + 1)
    }

    #[inline(always)]
    fn long_match(&self, input: &[u8]) -> Option<(TokenId, usize)> {
        let prefix = load_word(input, PREFIX_LEN);
        let info = &self.infos[self.phf.index(prefix)];
        if info.prefix != prefix {
            return None;
        }
        let rest = &input[PREFIX_LEN..];
        let rest_len = rest.len().min(8);
        let rest_head = load_word(rest, rest_len);

        for slot in 0..info.inline_count as usize {
            let len = info.inline_lens[slot] as usize;
            if len <= rest_len && shared_bytes(rest_head, info.inline_suffixes[slot]) >= len {
                return Some((info.inline_ids[slot], PREFIX_LEN + len));
            }
        }
        if info.overflow_size > 0 {
            let start = info.overflow_offset as usize;
            for e in &self.overflow[start..start + info.overflow_size as usize] {
                let len = e.len as usize;
                if len <= rest_len && shared_bytes(rest_head, e.suffix) >= len {
                    return Some((e.id, PREFIX_LEN + len));
                }
            }
        }
        None
    }
}

impl LongestPrefixMatch for StaticMatcher {
    #[inline]
    fn longest_match(&self, input: &[u8]) -> (TokenId, usize) {
        debug_assert!(!input.is_empty());
        if input.len() > PREFIX_LEN && !self.infos.is_empty() {
            if let Some(hit) = self.long_match(input) {
                return hit;
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
