//! Deterministic natural-text-like corpora.
//!
//! Lines look like catalog titles: title-cased words drawn from a Zipfian
//! vocabulary, chained by a first-order Markov model, with occasional
//! subtitle, volume, edition and year decorations. The same `(bytes, seed)`
//! always yields the same corpus.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;

/// Size of the bundled regression corpus.
pub const BUNDLED_BYTES: usize = 4 << 20;
pub const BUNDLED_SEED: u64 = 20_250_701;

const COMMON: &[&str] = &[
    "the",
    "of",
    "and",
    "a",
    "to",
    "in",
    "for",
    "with",
    "on",
    "my",
    "your",
    "how",
    "from",
    "at",
    "by",
    "an",
    "is",
    "guide",
    "book",
    "life",
    "world",
    "history",
    "art",
    "love",
    "story",
    "day",
    "night",
    "new",
    "little",
    "great",
    "last",
    "first",
    "time",
    "war",
    "house",
    "secret",
    "man",
    "woman",
    "city",
    "dark",
    "light",
    "heart",
    "home",
    "children",
    "family",
    "school",
    "american",
    "complete",
    "practical",
    "introduction",
    "handbook",
    "journal",
    "collection",
    "stories",
    "poems",
    "letters",
    "adventures",
    "mystery",
    "murder",
    "garden",
    "cooking",
    "kitchen",
    "modern",
    "ancient",
    "english",
    "science",
    "nature",
    "power",
    "king",
    "queen",
    "lost",
    "young",
    "old",
    "black",
    "white",
    "red",
    "blue",
    "golden",
    "river",
    "sea",
    "mountain",
    "road",
    "journey",
    "beyond",
    "under",
    "between",
    "without",
    "everything",
    "nothing",
    "other",
    "words",
    "music",
    "design",
    "business",
    "management",
    "theory",
    "practice",
    "principles",
    "essential",
];

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "br", "ch", "cl", "cr", "dr",
    "fl", "gr", "pl", "pr", "sh", "sl", "st", "th", "tr", "wh",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ee", "ou", "oo", "ie"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "t", "l", "nd", "ng", "st", "rk", "ck", "th"];

const VOCABULARY: usize = 4000;
const SUCCESSORS: usize = 12;

struct Model {
    words: Vec<String>,
    global: WeightedIndex<f64>,
    successors: Vec<Vec<usize>>,
    successor_pick: WeightedIndex<f64>,
}

impl Model {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut words: Vec<String> = COMMON.iter().map(|w| w.to_string()).collect();
        let mut seen: std::collections::HashSet<String> = words.iter().cloned().collect();
        while words.len() < VOCABULARY {
            let syllables = rng.random_range(1..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
                w.push_str(NUCLEI[rng.random_range(0..NUCLEI.len())]);
                w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
            }
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }

        let zipf: Vec<f64> = (0..words.len()).map(|r| 1.0 / (r as f64 + 1.0).powf(1.05)).collect();
        let global = WeightedIndex::new(&zipf).unwrap();
        let successors = (0..words.len()).map(|_| (0..SUCCESSORS).map(|_| global.sample(rng)).collect()).collect();
        let successor_pick = WeightedIndex::new((0..SUCCESSORS).map(|r| 1.0 / (r as f64 + 1.0))).unwrap();
        Self { words, global, successors, successor_pick }
    }

    fn line(&self, rng: &mut ChaCha8Rng, out: &mut Vec<u8>) {
        let n_words = rng.random_range(2..=11);
        let mut word = self.global.sample(rng);
        for k in 0..n_words {
            if k > 0 {
                out.push(b' ');
                word = if rng.random_bool(0.65) {
                    self.successors[word][self.successor_pick.sample(rng)]
                } else {
                    self.global.sample(rng)
                };
            }
            let w = self.words[word].as_bytes();
            let capitalize = k == 0 || w.len() > 3 || rng.random_bool(0.2);
            if capitalize {
                out.push(w[0].to_ascii_uppercase());
                out.extend_from_slice(&w[1..]);
            } else {
                out.extend_from_slice(w);
            }
            if k + 1 < n_words && rng.random_bool(0.04) {
                out.push(b':');
            }
        }
        match rng.random_range(0..20) {
            0 => out.extend_from_slice(format!(" (Volume {})", rng.random_range(1..=12)).as_bytes()),
            1 => out.extend_from_slice(format!(" ({})", rng.random_range(1950..=2024)).as_bytes()),
            2 => out.extend_from_slice(b": A Novel"),
            3 => {
                const ORD: [&str; 5] = ["2nd", "3rd", "4th", "5th", "10th"];
                out.extend_from_slice(format!(", {} Edition", ORD[rng.random_range(0..5)]).as_bytes())
            }
            4 => out.extend_from_slice(b" (Classic Reprint)"),
            _ => {}
        }
    }
}

/// Generates about `target_bytes` bytes of title-like lines.
pub fn title_corpus(target_bytes: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = Model::new(&mut rng);
    let mut corpus = Corpus::new(format!("synthetic-titles-{seed}"));
    let mut line = Vec::with_capacity(256);
    while corpus.total_bytes() < target_bytes {
        line.clear();
        model.line(&mut rng, &mut line);
        corpus.push(&line);
    }
    corpus
}

/// The 4 MiB corpus used as the compression-quality regression bound.
pub fn bundled_corpus() -> Corpus {
    let mut corpus = title_corpus(BUNDLED_BYTES, BUNDLED_SEED);
    corpus.set_name("bundled-titles");
    corpus
}
