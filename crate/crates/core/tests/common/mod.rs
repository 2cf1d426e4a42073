#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssdc::{Corpus, DynamicMatcher, TokenId, Variant};

/// Byte alphabets for randomized corpora, including ones with zero bytes.
pub const ALPHABETS: [&[u8]; 4] = [b"\x00\x01", b"\x00ab", b"abcd", b""];

pub fn alphabet_byte(rng: &mut ChaCha8Rng, alphabet: &[u8]) -> u8 {
    if alphabet.is_empty() {
        rng.random()
    } else {
        alphabet[rng.random_range(0..alphabet.len())]
    }
}

/// Strings of length 0..=max_len over `alphabet` (every byte when empty),
/// with repeated fragments so training finds pairs.
pub fn random_corpus(rng: &mut ChaCha8Rng, strings: usize, max_len: usize, alphabet: &[u8]) -> Corpus {
    let fragments: Vec<Vec<u8>> = (0..8)
        .map(|_| {
            let len = rng.random_range(1..=12);
            (0..len).map(|_| alphabet_byte(rng, alphabet)).collect()
        })
        .collect();
    let mut corpus = Corpus::new("random");
    for _ in 0..strings {
        let len = rng.random_range(0..=max_len);
        let mut s = Vec::with_capacity(len + 12);
        while s.len() < len {
            if rng.random_bool(0.5) {
                s.extend_from_slice(&fragments[rng.random_range(0..fragments.len())]);
            } else {
                s.push(alphabet_byte(rng, alphabet));
            }
        }
        s.truncate(len);
        corpus.push(&s);
    }
    corpus
}

/// Random unique entries inserted into a fresh matcher, with their ids.
/// Entries that the matcher refuses (full bucket) are left out.
pub fn random_matcher(
    rng: &mut ChaCha8Rng,
    variant: Variant,
    count: usize,
    alphabet: &[u8],
) -> (DynamicMatcher, Vec<(Vec<u8>, TokenId)>) {
    let mut matcher = DynamicMatcher::new(variant);
    let mut entries: Vec<(Vec<u8>, TokenId)> = (0..=255u8).map(|b| (vec![b], TokenId::from(b))).collect();
    let max_len = variant.max_entry_len().min(24);
    let mut next = 256u32;
    for _ in 0..count {
        let len = rng.random_range(2..=max_len);
        let bytes: Vec<u8> = (0..len).map(|_| alphabet_byte(rng, alphabet)).collect();
        if matcher.get(&bytes).is_some() {
            continue;
        }
        let id = TokenId::new(next);
        if matcher.insert(&bytes, id).is_ok() {
            entries.push((bytes, id));
            next += 1;
        }
    }
    (matcher, entries)
}

/// Longest entry that is a prefix of `probe`, by linear scan.
pub fn brute_force_lpm(entries: &[(Vec<u8>, TokenId)], probe: &[u8]) -> (TokenId, usize) {
    entries
        .iter()
        .filter(|(e, _)| probe.starts_with(e))
        .max_by_key(|(e, _)| e.len())
        .map(|(e, id)| (*id, e.len()))
        .expect("single bytes always match")
}

/// A probe made of entry fragments and random bytes.
pub fn random_probe(rng: &mut ChaCha8Rng, entries: &[(Vec<u8>, TokenId)], alphabet: &[u8]) -> Vec<u8> {
    let mut probe = Vec::new();
    let target = rng.random_range(1..=40);
    while probe.len() < target {
        if rng.random_bool(0.6) {
            let (e, _) = &entries[rng.random_range(0..entries.len())];
            let take = rng.random_range(1..=e.len());
            probe.extend_from_slice(&e[..take]);
        } else {
            probe.push(alphabet_byte(rng, alphabet));
        }
    }
    probe
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
