//! Token dictionary.
//!
//! All token contents live back to back in one byte region, and an offset
//! array maps a token ID to its byte range: token `i` is
//! `data[offsets[i]..offsets[i + 1]]`, so the length is implicit in the
//! difference of consecutive offsets. The first 256 entries are the
//! single-byte identity tokens, which is what makes longest-prefix parsing
//! total.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MIN_BITS_PER_TOKEN: u8 = 9;
pub const MAX_BITS_PER_TOKEN: u8 = 21;
pub const DEFAULT_BITS_PER_TOKEN: u8 = 16;

/// Longest entry allowed by the bounded variant.
pub const BOUNDED_MAX_ENTRY_LEN: usize = 16;

/// Zero bytes kept after the logical end of `data` so a decoder may always
/// load 16 bytes starting at any token.
pub(crate) const DATA_PADDING: usize = 16;

const MAGIC: &[u8; 4] = b"SSDC";
const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 12;

/// Which token-length discipline a dictionary follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Entries may grow without a length limit.
    Unbounded,
    /// Entries are at most 16 bytes; parsing uses the static matcher.
    Bounded16,
}

impl Variant {
    pub fn max_entry_len(self) -> usize {
        match self {
            Variant::Unbounded => u32::MAX as usize,
            Variant::Bounded16 => BOUNDED_MAX_ENTRY_LEN,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Unbounded => "unbounded",
            Variant::Bounded16 => "bounded16",
        }
    }

    fn code(self) -> u8 {
        match self {
            Variant::Unbounded => 0,
            Variant::Bounded16 => 1,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Variant::Unbounded),
            1 => Some(Variant::Bounded16),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbounded" => Ok(Variant::Unbounded),
            "bounded16" | "bounded" => Ok(Variant::Bounded16),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TokenId(u32);

impl TokenId {
    #[inline(always)]
    pub const fn new(value: u32) -> Self {
        TokenId(value)
    }

    #[inline(always)]
    pub const fn get(self) -> u32 {
        self.0
    }

    #[inline(always)]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u8> for TokenId {
    fn from(byte: u8) -> Self {
        TokenId(byte as u32)
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Footprint {
    pub data_bytes: usize,
    pub offsets_bytes: usize,
    pub total_bytes: usize,
}

/// Net bytes saved by a token of `len` bytes used `freq` times: every use
/// replaces `len` raw bytes by a 2-byte ID, and the entry itself costs `len`
/// bytes of dictionary data.
#[inline]
pub fn token_gain(len: usize, freq: u64) -> i64 {
    (len as i64 - 2) * freq as i64 - len as i64
}

#[derive(Clone)]
pub struct Dictionary {
    /// Token bytes followed by `DATA_PADDING` zero bytes.
    data: Vec<u8>,
    offsets: Vec<u32>,
    variant: Variant,
    bits_per_token: u8,
    hash: OnceLock<u64>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.variant == other.variant
            && self.bits_per_token == other.bits_per_token
            && self.offsets == other.offsets
            && self.data == other.data
    }
}

impl Eq for Dictionary {}

impl fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dictionary")
            .field("variant", &self.variant)
            .field("bits_per_token", &self.bits_per_token)
            .field("entries", &self.len())
            .field("data_bytes", &self.data_len())
            .finish()
    }
}

impl Dictionary {
    /// Base dictionary holding the 256 single-byte tokens.
    pub fn new(bits_per_token: u8, variant: Variant) -> Result<Self> {
        check_bits(bits_per_token)?;
        let mut data = Vec::with_capacity(256 + DATA_PADDING);
        data.extend(0..=255u8);
        data.resize(256 + DATA_PADDING, 0);
        Ok(Self { data, offsets: (0..=256).collect(), variant, bits_per_token, hash: OnceLock::new() })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Never true: the identity tokens are always present.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        1usize << self.bits_per_token
    }

    pub fn is_full(&self) -> bool {
        self.len() >= self.capacity()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn bits_per_token(&self) -> u8 {
        self.bits_per_token
    }

    pub fn max_entry_len(&self) -> usize {
        self.variant.max_entry_len()
    }

    /// Bytes one token ID occupies in a compressed stream.
    pub fn bytes_per_token(&self) -> usize {
        (self.bits_per_token as usize).div_ceil(8)
    }

    /// Appends a new entry at the next free ID.
    pub fn append(&mut self, bytes: &[u8]) -> Result<TokenId> {
        if self.is_full() {
            return Err(Error::Capacity { capacity: self.capacity() });
        }
        if bytes.is_empty() || bytes.len() > self.max_entry_len() {
            return Err(Error::EntryLength { len: bytes.len(), max: self.max_entry_len() });
        }
        let end = self.data_len() + bytes.len();
        let end = u32::try_from(end).map_err(|_| Error::Capacity { capacity: self.len() })?;

        let id = TokenId(self.len() as u32);
        self.hash = OnceLock::new();
        self.data.truncate(self.data_len());
        self.data.extend_from_slice(bytes);
        self.data.resize(end as usize + DATA_PADDING, 0);
        self.offsets.push(end);
        Ok(id)
    }

    pub fn token_bytes(&self, id: TokenId) -> Result<&[u8]> {
        if id.index() >= self.len() {
            return Err(Error::Lookup { index: id.index(), len: self.len() });
        }
        Ok(self.entry(id.index()))
    }

    /// Content of entry `i`. Panics when out of range.
    #[inline(always)]
    pub fn entry(&self, i: usize) -> &[u8] {
        &self.data[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline(always)]
    pub fn entry_len(&self, i: usize) -> usize {
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.offsets.windows(2).map(|w| &self.data[w[0] as usize..w[1] as usize])
    }

    /// All token bytes, without the trailing padding.
    pub fn data(&self) -> &[u8] {
        &self.data[..self.data_len()]
    }

    /// Token bytes plus at least 16 readable bytes past the last token.
    #[inline(always)]
    pub(crate) fn padded_data(&self) -> &[u8] {
        &self.data
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    #[inline]
    fn data_len(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    pub fn longest_entry(&self) -> usize {
        (0..self.len()).map(|i| self.entry_len(i)).max().unwrap_or(0)
    }

    pub fn footprint(&self) -> Footprint {
        let data_bytes = self.data_len();
        let offsets_bytes = 4 * self.offsets.len();
        Footprint { data_bytes, offsets_bytes, total_bytes: data_bytes + offsets_bytes }
    }

    /// Number of entries whose content repeats an earlier entry. Training
    /// never produces these; loading reports them instead of failing.
    pub fn duplicate_entries(&self) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        self.iter().filter(|e| !seen.insert(*e)).count()
    }

    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + self.footprint().total_bytes
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&[FORMAT_VERSION, self.variant.code(), self.bits_per_token, 0])?;
        out.write_all(&(self.len() as u32).to_le_bytes())?;
        for &o in &self.offsets {
            out.write_all(&o.to_le_bytes())?;
        }
        out.write_all(self.data())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |reason: String| Error::format("dictionary", reason);

        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let variant = Variant::from_code(bytes[5]).ok_or_else(|| bad(format!("unknown variant {}", bytes[5])))?;
        let bits = bytes[6];
        check_bits(bits).map_err(|e| bad(e.to_string()))?;
        if bytes[7] != 0 {
            return Err(bad("reserved byte is not zero".into()));
        }
        let entry_count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if entry_count < 256 || entry_count > 1usize << bits {
            return Err(bad(format!("entry count {entry_count} outside 256..=2^{bits}")));
        }

        let offsets_end = HEADER_LEN + 4 * (entry_count + 1);
        if bytes.len() < offsets_end {
            return Err(bad("truncated offsets".into()));
        }
        let offsets: Vec<u32> =
            bytes[HEADER_LEN..offsets_end].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        if offsets[0] != 0 {
            return Err(bad("first offset is not zero".into()));
        }
        let max_len = variant.max_entry_len();
        for (i, w) in offsets.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(bad(format!("offsets not increasing at entry {i}")));
            }
            if (w[1] - w[0]) as usize > max_len {
                return Err(bad(format!("entry {i} longer than {max_len} bytes")));
            }
        }
        let data_len = offsets[entry_count] as usize;
        let data = &bytes[offsets_end..];
        if data.len() != data_len {
            return Err(bad(format!("expected {data_len} data bytes, found {}", data.len())));
        }
        for b in 0..256 {
            if offsets[b + 1] as usize != b + 1 || data[b] as usize != b {
                return Err(bad(format!("entry {b} is not the identity token")));
            }
        }

        let mut padded = Vec::with_capacity(data_len + DATA_PADDING);
        padded.extend_from_slice(data);
        padded.resize(data_len + DATA_PADDING, 0);
        Ok(Self { data: padded, offsets, variant, bits_per_token: bits, hash: OnceLock::new() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Identifies the dictionary a compressed column was built against:
    /// the first 8 bytes of the SHA-256 of the serialized form. Computed once
    /// per dictionary state.
    pub fn content_hash(&self) -> u64 {
        *self.hash.get_or_init(|| {
            let digest = Sha256::digest(self.to_bytes());
            u64::from_le_bytes(digest[..8].try_into().unwrap())
        })
    }
}

fn check_bits(bits: u8) -> Result<()> {
    if !(MIN_BITS_PER_TOKEN..=MAX_BITS_PER_TOKEN).contains(&bits) {
        return Err(Error::Config(format!(
            "bits per token must be in {MIN_BITS_PER_TOKEN}..={MAX_BITS_PER_TOKEN}, got {bits}"
        )));
    }
    Ok(())
}
