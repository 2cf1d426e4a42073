//! Parsing strings into token IDs, and decoding them back.
//!
//! Every string is encoded on its own, so a [`CompressedColumn`] is just the
//! concatenated token IDs of all strings plus the index where each string
//! starts. Decoding writes whole 16-byte blocks per token and advances by
//! the real token length; output buffers therefore carry 16 bytes of slack.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::dictionary::{Dictionary, TokenId, Variant};
use crate::error::{Error, Result};
use crate::lpm::{DynamicMatcher, LongestPrefixMatch, StaticMatcher};

/// Writable bytes a decoder may touch past the end of the decoded string.
pub const DECODE_SLACK: usize = 16;

const MAGIC: &[u8; 4] = b"SSCC";
const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8;

/// Greedy longest-prefix parse of `input`, reporting each `(id, length)`.
#[inline]
pub fn parse<M, F>(matcher: &M, input: &[u8], mut emit: F)
where
    M: LongestPrefixMatch + ?Sized,
    F: FnMut(TokenId, usize),
{
    let mut pos = 0;
    while pos < input.len() {
        let (id, len) = matcher.longest_match(&input[pos..]);
        emit(id, len);
        pos += len;
    }
}

pub fn compress_string<M: LongestPrefixMatch + ?Sized>(matcher: &M, input: &[u8]) -> Vec<TokenId> {
    let mut out = Vec::with_capacity(input.len() / 2 + 1);
    parse(matcher, input, |id, _| out.push(id));
    out
}

/// The matcher used for parsing: static for bounded dictionaries, the
/// training-time dynamic matcher otherwise.
#[derive(Debug, Clone)]
pub enum Parser {
    Dynamic(DynamicMatcher),
    Static(StaticMatcher),
}

impl Parser {
    /// Finalizes `matcher` when the variant allows it.
    pub fn new(matcher: DynamicMatcher, seed: u64) -> Result<Self> {
        match matcher.variant() {
            Variant::Bounded16 => Ok(Parser::Static(StaticMatcher::finalize(&matcher, seed)?)),
            Variant::Unbounded => Ok(Parser::Dynamic(matcher)),
        }
    }

    pub fn from_dictionary(dict: &Dictionary, seed: u64) -> Result<Self> {
        Self::new(DynamicMatcher::from_dictionary(dict)?, seed)
    }

    pub fn compress_column<'a, I>(&self, dict: &Dictionary, strings: I) -> CompressedColumn
    where
        I: IntoIterator<Item = &'a [u8]>,
    {
        match self {
            Parser::Dynamic(m) => CompressedColumn::compress(m, dict, strings),
            Parser::Static(m) => CompressedColumn::compress(m, dict, strings),
        }
    }

    pub fn compress_corpus(&self, dict: &Dictionary, corpus: &Corpus) -> CompressedColumn {
        self.compress_column(dict, corpus.iter())
    }

    pub fn compress_corpus_parallel(&self, dict: &Dictionary, corpus: &Corpus) -> CompressedColumn {
        match self {
            Parser::Dynamic(m) => CompressedColumn::compress_parallel(m, dict, corpus),
            Parser::Static(m) => CompressedColumn::compress_parallel(m, dict, corpus),
        }
    }
}

impl LongestPrefixMatch for Parser {
    fn longest_match(&self, input: &[u8]) -> (TokenId, usize) {
        match self {
            Parser::Dynamic(m) => m.longest_match(input),
            Parser::Static(m) => m.longest_match(input),
        }
    }
}

/// Token IDs of a column: 2 bytes each when the dictionary has at most
/// 2^16 entries, 4 bytes in memory otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tokens {
    Narrow(Vec<u16>),
    Wide(Vec<u32>),
}

impl Tokens {
    fn for_dictionary(dict: &Dictionary) -> Self {
        if dict.bits_per_token() <= 16 {
            Tokens::Narrow(Vec::new())
        } else {
            Tokens::Wide(Vec::new())
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Tokens::Narrow(v) => v.len(),
            Tokens::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> TokenId {
        match self {
            Tokens::Narrow(v) => TokenId::new(v[i] as u32),
            Tokens::Wide(v) => TokenId::new(v[i]),
        }
    }

    #[inline]
    fn push(&mut self, id: TokenId) {
        match self {
            Tokens::Narrow(v) => v.push(id.get() as u16),
            Tokens::Wide(v) => v.push(id.get()),
        }
    }

    fn reserve(&mut self, n: usize) {
        match self {
            Tokens::Narrow(v) => v.reserve(n),
            Tokens::Wide(v) => v.reserve(n),
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = TokenId> + '_> {
        match self {
            Tokens::Narrow(v) => Box::new(v.iter().map(|&t| TokenId::new(t as u32))),
            Tokens::Wide(v) => Box::new(v.iter().map(|&t| TokenId::new(t))),
        }
    }
}

/// Reusable output region for single-string decoding.
#[derive(Debug, Clone, Default)]
pub struct DecodeBuffer {
    buf: Vec<u8>,
}

impl DecodeBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sized for every string of `column`.
    pub fn for_column(column: &CompressedColumn) -> Self {
        Self { buf: vec![0; column.max_string_len + DECODE_SLACK] }
    }

    fn reserve_for(&mut self, len: usize) -> &mut [u8] {
        if self.buf.len() < len + DECODE_SLACK {
            self.buf.resize(len + DECODE_SLACK, 0);
        }
        &mut self.buf
    }
}

/// Writes token `id` at the start of `out` and returns its length.
///
/// At least the first 16 bytes of `out` are overwritten regardless of the
/// token length; only the first `length` are meaningful. Tokens longer than
/// 16 bytes take a second copy for the remainder. `out` must hold
/// `max(16, length)` bytes.
#[inline(always)]
pub fn decompress_token(dict: &Dictionary, id: TokenId, out: &mut [u8]) -> usize {
    let offsets = dict.offsets();
    let start = offsets[id.index()] as usize;
    let end = offsets[id.index() + 1] as usize;
    let length = end - start;
    let data = dict.padded_data();

    copy16(&mut out[..16], &data[start..start + 16]);
    if length > 16 {
        out[16..length].copy_from_slice(&data[start + 16..end]);
    }
    length
}

/// Bounded tokens: one fixed 16-byte copy, no length branch.
#[inline(always)]
fn decompress_token16(data: &[u8], offsets: &[u32], id: usize, out: &mut [u8]) -> usize {
    let start = offsets[id] as usize;
    let length = offsets[id + 1] as usize - start;
    copy16(&mut out[..16], &data[start..start + 16]);
    length
}

#[inline(always)]
fn copy16(dst: &mut [u8], src: &[u8]) {
    let src: &[u8; 16] = src.try_into().unwrap();
    let dst: &mut [u8; 16] = dst.try_into().unwrap();
    *dst = *src;
}

#[inline]
fn decode_ids<T: Copy + Into<u32>>(dict: &Dictionary, ids: &[T], out: &mut [u8]) -> usize {
    let mut cursor = 0;
    match dict.variant() {
        Variant::Bounded16 => {
            let (data, offsets) = (dict.padded_data(), dict.offsets());
            for &id in ids {
                cursor += decompress_token16(data, offsets, id.into() as usize, &mut out[cursor..]);
            }
        }
        Variant::Unbounded => {
            for &id in ids {
                cursor += decompress_token(dict, TokenId::new(id.into()), &mut out[cursor..]);
            }
        }
    }
    cursor
}

/// Concatenated token IDs of many strings with per-string boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedColumn {
    tokens: Tokens,
    /// `n + 1` token indices; string `i` is `tokens[offsets[i]..offsets[i+1]]`.
    string_offsets: Vec<usize>,
    dict_hash: u64,
    raw_bytes: usize,
    max_string_len: usize,
}

impl CompressedColumn {
    pub fn compress<'a, M, I>(matcher: &M, dict: &Dictionary, strings: I) -> Self
    where
        M: LongestPrefixMatch + ?Sized,
        I: IntoIterator<Item = &'a [u8]>,
    {
        let mut tokens = Tokens::for_dictionary(dict);
        let mut string_offsets = vec![0];
        let mut raw_bytes = 0;
        let mut max_string_len = 0;
        for s in strings {
            tokens.reserve(s.len() / 2);
            parse(matcher, s, |id, _| tokens.push(id));
            string_offsets.push(tokens.len());
            raw_bytes += s.len();
            max_string_len = max_string_len.max(s.len());
        }
        Self { tokens, string_offsets, dict_hash: dict.content_hash(), raw_bytes, max_string_len }
    }

    /// Same result as [`CompressedColumn::compress`], parsing chunks of
    /// strings on the rayon pool.
    pub fn compress_parallel<M>(matcher: &M, dict: &Dictionary, corpus: &Corpus) -> Self
    where
        M: LongestPrefixMatch + Sync + ?Sized,
    {
        const CHUNK: usize = 4096;
        let indices: Vec<usize> = (0..corpus.len()).collect();
        let parts: Vec<CompressedColumn> = indices
            .par_chunks(CHUNK)
            .map(|chunk| Self::compress(matcher, dict, chunk.iter().map(|&i| &corpus[i])))
            .collect();

        let mut out = Self {
            tokens: Tokens::for_dictionary(dict),
            string_offsets: vec![0],
            dict_hash: dict.content_hash(),
            raw_bytes: 0,
            max_string_len: 0,
        };
        for part in parts {
            let base = out.tokens.len();
            match (&mut out.tokens, part.tokens) {
                (Tokens::Narrow(a), Tokens::Narrow(b)) => a.extend(b),
                (Tokens::Wide(a), Tokens::Wide(b)) => a.extend(b),
                _ => unreachable!("token width is fixed by the dictionary"),
            }
            out.string_offsets.extend(part.string_offsets[1..].iter().map(|o| o + base));
            out.raw_bytes += part.raw_bytes;
            out.max_string_len = out.max_string_len.max(part.max_string_len);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.string_offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &Tokens {
        &self.tokens
    }

    pub fn string_offsets(&self) -> &[usize] {
        &self.string_offsets
    }

    /// Sum of the original string lengths.
    pub fn raw_bytes(&self) -> usize {
        self.raw_bytes
    }

    pub fn max_string_len(&self) -> usize {
        self.max_string_len
    }

    pub fn dictionary_hash(&self) -> u64 {
        self.dict_hash
    }

    /// Bytes of the token stream at `bytes_per_token` bytes per ID.
    pub fn compressed_bytes(&self, bytes_per_token: usize) -> usize {
        self.token_count() * bytes_per_token
    }

    pub fn string_tokens(&self, i: usize) -> Result<Vec<TokenId>> {
        self.check_index(i)?;
        Ok((self.string_offsets[i]..self.string_offsets[i + 1]).map(|t| self.tokens.get(t)).collect())
    }

    pub fn iter_tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.tokens.iter()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::Lookup { index: i, len: self.len() });
        }
        Ok(())
    }

    pub fn check_dictionary(&self, dict: &Dictionary) -> Result<()> {
        let found = dict.content_hash();
        if found != self.dict_hash {
            return Err(Error::DictionaryMismatch { expected: self.dict_hash, found });
        }
        Ok(())
    }

    /// Decodes string `i` into `buf` and returns the decoded bytes.
    #[inline]
    pub fn decompress_into<'b>(&self, dict: &Dictionary, i: usize, buf: &'b mut DecodeBuffer) -> Result<&'b [u8]> {
        self.check_index(i)?;
        self.check_dictionary(dict)?;
        let out = buf.reserve_for(self.max_string_len);
        let (a, b) = (self.string_offsets[i], self.string_offsets[i + 1]);
        let len = match &self.tokens {
            Tokens::Narrow(v) => decode_ids(dict, &v[a..b], out),
            Tokens::Wide(v) => decode_ids(dict, &v[a..b], out),
        };
        Ok(&out[..len])
    }

    pub fn decompress_string(&self, dict: &Dictionary, i: usize) -> Result<Vec<u8>> {
        let mut buf = DecodeBuffer::new();
        Ok(self.decompress_into(dict, i, &mut buf)?.to_vec())
    }

    /// Decodes every string back to back into `out`, which is resized to the
    /// total original length.
    pub fn decompress_all_into(&self, dict: &Dictionary, out: &mut Vec<u8>) -> Result<()> {
        self.check_dictionary(dict)?;
        out.clear();
        out.resize(self.raw_bytes + DECODE_SLACK, 0);
        let written = match &self.tokens {
            Tokens::Narrow(v) => decode_ids(dict, v, out),
            Tokens::Wide(v) => decode_ids(dict, v, out),
        };
        debug_assert_eq!(written, self.raw_bytes);
        out.truncate(written);
        Ok(())
    }

    pub fn decompress_all(&self, dict: &Dictionary) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.decompress_all_into(dict, &mut out)?;
        Ok(out)
    }

    /// Serializes the column. Only 2-byte token streams have a file format.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let Tokens::Narrow(tokens) = &self.tokens else {
            return Err(Error::Config(
                "column files store 2-byte token IDs; dictionaries above 16 bits cannot be saved".into(),
            ));
        };
        let n = self.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * (n + 1) + 2 * tokens.len() + 8);
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&(tokens.len() as u64).to_le_bytes());
        for &o in &self.string_offsets {
            out.extend_from_slice(&(o as u64).to_le_bytes());
        }
        for &t in tokens {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out.extend_from_slice(&self.dict_hash.to_le_bytes());
        Ok(out)
    }

    /// Parses a column file and checks it against the dictionary it claims
    /// to be built with.
    pub fn from_bytes(bytes: &[u8], dict: &Dictionary) -> Result<Self> {
        let bad = |reason: String| Error::format("column", reason);
        if bytes.len() < HEADER_LEN + 8 + 8 {
            return Err(bad("shorter than header and footer".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let n = read_u64(5);
        let token_count = read_u64(13);
        let expected = (n.checked_add(1))
            .and_then(|k| k.checked_mul(8))
            .and_then(|o| token_count.checked_mul(2).and_then(|t| o.checked_add(t)))
            .and_then(|body| body.checked_add((HEADER_LEN + 8) as u64));
        if expected != Some(bytes.len() as u64) {
            return Err(bad(format!("length {} does not match header", bytes.len())));
        }
        let (n, token_count) = (n as usize, token_count as usize);

        let footer = read_u64(bytes.len() - 8);
        let found = dict.content_hash();
        if footer != found {
            return Err(Error::DictionaryMismatch { expected: footer, found });
        }
        if dict.bits_per_token() > 16 {
            return Err(bad("dictionary has more than 2^16 entries".into()));
        }

        let offsets_end = HEADER_LEN + 8 * (n + 1);
        let string_offsets: Vec<usize> = bytes[HEADER_LEN..offsets_end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        if string_offsets[0] != 0 || string_offsets[n] != token_count {
            return Err(bad("string offsets do not span the token stream".into()));
        }
        if string_offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(bad("string offsets decrease".into()));
        }

        let tokens: Vec<u16> =
            bytes[offsets_end..bytes.len() - 8].chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
        let entries = dict.len();
        if let Some(&t) = tokens.iter().find(|&&t| t as usize >= entries) {
            return Err(bad(format!("token {t} outside a dictionary of {entries} entries")));
        }

        let mut raw_bytes = 0;
        let mut max_string_len = 0;
        for w in string_offsets.windows(2) {
            let len: usize = tokens[w[0]..w[1]].iter().map(|&t| dict.entry_len(t as usize)).sum();
            raw_bytes += len;
            max_string_len = max_string_len.max(len);
        }

        Ok(Self { tokens: Tokens::Narrow(tokens), string_offsets, dict_hash: footer, raw_bytes, max_string_len })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, dict: &Dictionary) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?, dict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::{train, TrainerConfig};

    fn base(variant: Variant) -> (Dictionary, DynamicMatcher) {
        (Dictionary::new(16, variant).unwrap(), DynamicMatcher::new(variant))
    }

    #[test]
    fn trivial_strings() {
        let (dict, m) = base(Variant::Bounded16);
        assert!(compress_string(&m, b"").is_empty());
        assert_eq!(compress_string(&m, b"z"), vec![TokenId::new(122)]);

        let col = CompressedColumn::compress(&m, &dict, [&b""[..], b"a"]);
        assert_eq!(col.string_offsets(), &[0, 0, 1]);
        assert_eq!(col.tokens(), &Tokens::Narrow(vec![97]));
        assert_eq!(col.decompress_string(&dict, 0).unwrap(), b"");
        assert_eq!(col.decompress_string(&dict, 1).unwrap(), b"a");
        assert!(matches!(col.decompress_string(&dict, 2), Err(Error::Lookup { index: 2, len: 2 })));
    }

    #[test]
    fn token_decode_793() {
        let mut dict = Dictionary::new(16, Variant::Unbounded).unwrap();
        for i in 0..536 {
            dict.append(format!("{i:06}").as_bytes()).unwrap();
        }
        dict.append(&[b'#'; 297]).unwrap();
        dict.append(b"abracad").unwrap();
        let mut out = [0u8; 32];
        assert_eq!(decompress_token(&dict, TokenId::new(793), &mut out), 7);
        assert_eq!(&out[..7], b"abracad");
        assert_eq!(decompress_token(&dict, TokenId::new(97), &mut out), 1);
        assert_eq!(out[0], b'a');
    }

    #[test]
    fn long_token_takes_second_copy() {
        let mut dict = Dictionary::new(16, Variant::Unbounded).unwrap();
        let long: Vec<u8> = (0..23).map(|i| b'A' + i).collect();
        let id = dict.append(&long).unwrap();
        let mut out = [0xffu8; 40];
        assert_eq!(decompress_token(&dict, id, &mut out), 23);
        assert_eq!(&out[..23], dict.token_bytes(id).unwrap());
    }

    #[test]
    fn trained_round_trip_both_variants() {
        let corpus = crate::synth::title_corpus(300_000, 4);
        for variant in [Variant::Unbounded, Variant::Bounded16] {
            let model = train(&corpus, &TrainerConfig::new(variant)).unwrap();
            let parser = Parser::new(model.matcher.clone(), 1).unwrap();
            let col = parser.compress_corpus(&model.dictionary, &corpus);
            assert_eq!(col.raw_bytes(), corpus.total_bytes());
            assert_eq!(col.decompress_all(&model.dictionary).unwrap(), corpus.data());

            let mut buf = DecodeBuffer::for_column(&col);
            for i in (0..corpus.len()).step_by(7) {
                assert_eq!(col.decompress_into(&model.dictionary, i, &mut buf).unwrap(), &corpus[i]);
            }
            let per_string: usize = (0..col.len()).map(|i| col.string_tokens(i).unwrap().len()).sum();
            assert_eq!(per_string, col.token_count());

            let par = parser.compress_corpus_parallel(&model.dictionary, &corpus);
            assert_eq!(par, col);
        }
    }

    #[test]
    fn strings_compress_independently() {
        let corpus = crate::synth::title_corpus(100_000, 8);
        let model = train(&corpus, &TrainerConfig::new(Variant::Bounded16)).unwrap();
        let parser = Parser::new(model.matcher, 3).unwrap();
        let col = parser.compress_corpus(&model.dictionary, &corpus);
        let reversed: Vec<&[u8]> = corpus.iter().rev().collect();
        let rev = parser.compress_column(&model.dictionary, reversed);
        let n = corpus.len();
        for i in (0..n).step_by(13) {
            assert_eq!(col.string_tokens(i).unwrap(), rev.string_tokens(n - 1 - i).unwrap());
        }
    }

    #[test]
    fn wide_tokens() {
        // Unbounded training at threshold 2 on 8 MiB yields about 80k entries.
        let corpus = crate::synth::title_corpus(8 << 20, 2);
        let config = TrainerConfig { bits_per_token: 18, threshold: Some(2), ..TrainerConfig::new(Variant::Unbounded) };
        let model = train(&corpus, &config).unwrap();
        assert!(model.dictionary.len() > 1 << 16);
        let parser = Parser::new(model.matcher, 0).unwrap();
        let col = parser.compress_corpus(&model.dictionary, &corpus);
        assert!(matches!(col.tokens(), Tokens::Wide(_)));
        assert_eq!(col.decompress_all(&model.dictionary).unwrap(), corpus.data());
        assert!(matches!(col.to_bytes(), Err(Error::Config(_))));
    }

    #[test]
    fn file_round_trip_and_rejections() {
        let corpus = crate::synth::title_corpus(50_000, 6);
        let model = train(&corpus, &TrainerConfig::new(Variant::Bounded16)).unwrap();
        let dict = &model.dictionary;
        let col = CompressedColumn::compress(&model.matcher, dict, corpus.iter());
        let bytes = col.to_bytes().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 8 * (col.len() + 1) + 2 * col.token_count() + 8);
        let back = CompressedColumn::from_bytes(&bytes, dict).unwrap();
        assert_eq!(back, col);
        assert_eq!(back.to_bytes().unwrap(), bytes);

        let other = Dictionary::new(16, Variant::Bounded16).unwrap();
        assert!(matches!(CompressedColumn::from_bytes(&bytes, &other), Err(Error::DictionaryMismatch { .. })));
        assert!(matches!(col.decompress_string(&other, 0), Err(Error::DictionaryMismatch { .. })));

        let mut bad_magic = bytes.clone();
        bad_magic[1] = b'X';
        assert!(CompressedColumn::from_bytes(&bad_magic, dict).is_err());
        let mut bad_count = bytes.clone();
        bad_count[13] ^= 1;
        assert!(CompressedColumn::from_bytes(&bad_count, dict).is_err());
        assert!(CompressedColumn::from_bytes(&bytes[..bytes.len() - 3], dict).is_err());
        // Swap two string offsets so they decrease.
        let mut bad_offsets = bytes.clone();
        let at = HEADER_LEN + 8;
        bad_offsets[at..at + 8].copy_from_slice(&(col.token_count() as u64).to_le_bytes());
        assert!(CompressedColumn::from_bytes(&bad_offsets, dict).is_err());
    }
}
