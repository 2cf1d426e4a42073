//! Single-pass dictionary training.
//!
//! Strings from a shuffled sample are parsed greedily with the dynamic
//! matcher. Each pair of adjacent matches inside a string bumps a counter;
//! once a pair has been seen `threshold` times it is merged into a new
//! token, and the merged token takes the place of the second match so that
//! counting continues from it. Training stops when the dictionary is full or
//! the sample runs out.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::dictionary::{Dictionary, TokenId, Variant, DEFAULT_BITS_PER_TOKEN};
use crate::error::{Error, Result};
use crate::lpm::{DynamicMatcher, LongestPrefixMatch};

pub use crate::dictionary::token_gain;

/// Generator used for sampling; pinned so a seed means the same sample
/// across builds.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9";

pub const DEFAULT_SAMPLE_CAP_BYTES: u64 = 8 << 20;

/// Smallest legal pair threshold. A threshold of 1 merges every pair on
/// sight and just builds ever-longer prefixes of each string.
pub const MIN_THRESHOLD: u32 = 2;

/// `max(2, floor(log2(size_mib)))`.
pub fn compute_threshold(dataset_size_mib: f64) -> u32 {
    let log = dataset_size_mib.log2().floor();
    if log.is_nan() || log < MIN_THRESHOLD as f64 {
        MIN_THRESHOLD
    } else {
        log as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainerConfig {
    pub bits_per_token: u8,
    pub variant: Variant,
    /// Fixed pair threshold; derived from the corpus size when `None`.
    pub threshold: Option<u32>,
    pub sample_cap_bytes: u64,
    /// Optional fraction of the corpus to sample, further limited by
    /// `sample_cap_bytes`.
    pub sample_fraction: Option<f64>,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            bits_per_token: DEFAULT_BITS_PER_TOKEN,
            variant: Variant::Bounded16,
            threshold: None,
            sample_cap_bytes: DEFAULT_SAMPLE_CAP_BYTES,
            sample_fraction: None,
            seed: 0x5eed,
        }
    }
}

impl TrainerConfig {
    pub fn new(variant: Variant) -> Self {
        Self { variant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        Dictionary::new(self.bits_per_token, self.variant)?;
        if let Some(t) = self.threshold {
            if t < MIN_THRESHOLD {
                return Err(Error::Config(format!("pair threshold must be at least 2, got {t}")));
            }
        }
        if let Some(f) = self.sample_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("sample fraction must be in (0, 1], got {f}")));
            }
        }
        Ok(())
    }

    pub fn threshold_for(&self, corpus: &Corpus) -> u32 {
        self.threshold.unwrap_or_else(|| compute_threshold(corpus.stats().size_mib))
    }

    fn sample_cap(&self, total: u64) -> u64 {
        let by_fraction = self.sample_fraction.map_or(u64::MAX, |f| (total as f64 * f).round() as u64);
        self.sample_cap_bytes.min(by_fraction)
    }
}

/// String indices to train on: a seeded shuffle of the corpus, cut once the
/// selected strings reach the byte cap.
pub fn sample_strings(corpus: &Corpus, config: &TrainerConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);

    let total = corpus.total_bytes() as u64;
    let cap = config.sample_cap(total);
    if cap >= total {
        return order;
    }
    let mut taken = 0u64;
    let mut end = 0;
    while end < order.len() && taken < cap {
        taken += corpus[order[end]].len() as u64;
        end += 1;
    }
    order.truncate(end);
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    DictionaryFull,
    SampleExhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::DictionaryFull => "dictionary_full",
            StopReason::SampleExhausted => "sample_exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingReport {
    pub variant: Variant,
    pub bits_per_token: u8,
    pub threshold: u32,
    pub tokens_created: usize,
    pub entry_count: usize,
    /// Sample bytes parsed before training stopped.
    pub bytes_consumed: u64,
    pub strings_consumed: usize,
    pub sample_bytes: u64,
    pub sample_strings: usize,
    /// Merges dropped because the result was too long, already present, or
    /// its bucket was full.
    pub merges_skipped: usize,
    pub wall_time: Duration,
    pub stop_reason: StopReason,
    pub seed: u64,
    pub rng: &'static str,
}

impl TrainingReport {
    /// `key=value` lines, one field per line.
    pub fn to_key_values(&self) -> String {
        let fields: [(&str, String); 15] = [
            ("variant", self.variant.to_string()),
            ("bits_per_token", self.bits_per_token.to_string()),
            ("threshold", self.threshold.to_string()),
            ("tokens_created", self.tokens_created.to_string()),
            ("entry_count", self.entry_count.to_string()),
            ("bytes_consumed", self.bytes_consumed.to_string()),
            ("strings_consumed", self.strings_consumed.to_string()),
            ("sample_bytes", self.sample_bytes.to_string()),
            ("sample_strings", self.sample_strings.to_string()),
            ("merges_skipped", self.merges_skipped.to_string()),
            ("wall_time_s", format!("{:.6}", self.wall_time.as_secs_f64())),
            ("stop_reason", self.stop_reason.to_string()),
            ("seed", self.seed.to_string()),
            ("rng", self.rng.to_string()),
            ("version", env!("CARGO_PKG_VERSION").to_string()),
        ];
        fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Hooks into the training loop, for tracing and tests.
pub trait TrainObserver {
    /// A pair of adjacent matches was counted; `count` is the value after
    /// the increment.
    fn on_pair(&mut self, _left: TokenId, _right: TokenId, _count: u32) {}

    /// A pair reached the threshold and became token `created`. `register`
    /// is the match that pair counting continues from.
    fn on_merge(&mut self, _event: MergeEvent) {}
}

impl TrainObserver for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeEvent {
    pub left: TokenId,
    pub right: TokenId,
    pub created: TokenId,
    pub count: u32,
    pub register: TokenId,
}

/// Incremental trainer. [`train`] drives it over a sample; it can also be fed
/// strings directly, starting from any dictionary.
#[derive(Debug, Clone)]
pub struct Trainer {
    dict: Dictionary,
    matcher: DynamicMatcher,
    pairs: FxHashMap<(TokenId, TokenId), u32>,
    threshold: u32,
    bytes_consumed: u64,
    strings_consumed: usize,
    merges_skipped: usize,
}

impl Trainer {
    pub fn new(bits_per_token: u8, variant: Variant, threshold: u32) -> Result<Self> {
        Self::from_dictionary(Dictionary::new(bits_per_token, variant)?, threshold)
    }

    pub fn from_dictionary(dict: Dictionary, threshold: u32) -> Result<Self> {
        if threshold < MIN_THRESHOLD {
            return Err(Error::Config(format!("pair threshold must be at least 2, got {threshold}")));
        }
        let matcher = DynamicMatcher::from_dictionary(&dict)?;
        Ok(Self {
            dict,
            matcher,
            pairs: FxHashMap::default(),
            threshold,
            bytes_consumed: 0,
            strings_consumed: 0,
            merges_skipped: 0,
        })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn matcher(&self) -> &DynamicMatcher {
        &self.matcher
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn pair_count(&self, left: TokenId, right: TokenId) -> u32 {
        self.pairs.get(&(left, right)).copied().unwrap_or(0)
    }

    pub fn bytes_consumed(&self) -> u64 {
        self.bytes_consumed
    }

    pub fn is_full(&self) -> bool {
        self.dict.is_full()
    }

    /// Parses one string, counting and merging pairs. Returns `false` once
    /// the dictionary is full; the rest of the string is then left unread.
    pub fn feed<O: TrainObserver>(&mut self, s: &[u8], observer: &mut O) -> Result<bool> {
        if self.dict.is_full() {
            return Ok(false);
        }
        let mut pos = 0;
        let mut previous: Option<TokenId> = None;
        while pos < s.len() {
            let (mut current, len) = self.matcher.longest_match(&s[pos..]);
            pos += len;

            if let Some(left) = previous {
                let count = self.pairs.entry((left, current)).or_insert(0);
                *count += 1;
                let count = *count;
                observer.on_pair(left, current, count);

                if count >= self.threshold {
                    self.pairs.remove(&(left, current));
                    match self.merge(left, current)? {
                        Some(created) => {
                            let right = current;
                            current = created;
                            observer.on_merge(MergeEvent { left, right, created, count, register: current });
                            if self.dict.is_full() {
                                self.bytes_consumed += pos as u64;
                                return Ok(false);
                            }
                        }
                        None => self.merges_skipped += 1,
                    }
                }
            }
            previous = Some(current);
        }
        self.bytes_consumed += s.len() as u64;
        self.strings_consumed += 1;
        Ok(true)
    }

    fn merge(&mut self, left: TokenId, right: TokenId) -> Result<Option<TokenId>> {
        let (a, b) = (self.dict.entry(left.index()), self.dict.entry(right.index()));
        if a.len() + b.len() > self.dict.max_entry_len() {
            return Ok(None);
        }
        let mut merged = Vec::with_capacity(a.len() + b.len());
        merged.extend_from_slice(a);
        merged.extend_from_slice(b);

        let id = TokenId::new(self.dict.len() as u32);
        match self.matcher.insert(&merged, id) {
            Ok(()) => {}
            Err(Error::BucketFull { .. } | Error::Duplicate { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
        let appended = self.dict.append(&merged)?;
        debug_assert_eq!(appended, id);
        Ok(Some(id))
    }

    pub fn into_parts(self) -> (Dictionary, DynamicMatcher) {
        (self.dict, self.matcher)
    }
}

/// Dictionary and matcher produced by training.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub dictionary: Dictionary,
    pub matcher: DynamicMatcher,
    pub report: TrainingReport,
}

pub fn train(corpus: &Corpus, config: &TrainerConfig) -> Result<TrainedModel> {
    train_with_observer(corpus, config, &mut ())
}

pub fn train_with_observer<O: TrainObserver>(
    corpus: &Corpus,
    config: &TrainerConfig,
    observer: &mut O,
) -> Result<TrainedModel> {
    config.validate()?;
    let start = Instant::now();
    let threshold = config.threshold_for(corpus);
    let sample = sample_strings(corpus, config);
    let sample_bytes = sample.iter().map(|&i| corpus[i].len() as u64).sum();

    let mut trainer = Trainer::new(config.bits_per_token, config.variant, threshold)?;
    let mut stop_reason = StopReason::SampleExhausted;
    for &i in &sample {
        if !trainer.feed(&corpus[i], observer)? {
            stop_reason = StopReason::DictionaryFull;
            break;
        }
    }
    if trainer.is_full() {
        stop_reason = StopReason::DictionaryFull;
    }

    let report = TrainingReport {
        variant: config.variant,
        bits_per_token: config.bits_per_token,
        threshold,
        tokens_created: trainer.dict.len() - 256,
        entry_count: trainer.dict.len(),
        bytes_consumed: trainer.bytes_consumed,
        strings_consumed: trainer.strings_consumed,
        sample_bytes,
        sample_strings: sample.len(),
        merges_skipped: trainer.merges_skipped,
        wall_time: start.elapsed(),
        stop_reason,
        seed: config.seed,
        rng: RNG_ALGORITHM,
    };
    let (dictionary, matcher) = trainer.into_parts();
    Ok(TrainedModel { dictionary, matcher, report })
}
