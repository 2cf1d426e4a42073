//! Benchmark driver: timed train/parse/decompress/access runs, parameter
//! sweeps and the diagnostic distributions written as CSV.
//!
//! Every timed phase runs once as a warm-up and then `repetitions` times;
//! the repetition with the median value is reported. Results carry their
//! raw components (bytes, token counts, wall times) so derived numbers can
//! be recomputed from the output.

use std::fs::File;
use std::hint::black_box;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{CompressedColumn, DecodeBuffer, Parser};
use crate::corpus::Corpus;
use crate::dictionary::{token_gain, Dictionary, TokenId, Variant};
use crate::error::{Error, Result};
use crate::lpm::DynamicMatcher;
use crate::trainer::{train, StopReason, TrainedModel, TrainerConfig, TrainingReport};

const MIB: f64 = (1 << 20) as f64;

pub const DEFAULT_QUERIES: usize = 1_000_000;
pub const DEFAULT_REPETITIONS: usize = 3;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trainer: TrainerConfig,
    /// Point queries in the access workload; 0 skips it.
    pub queries: usize,
    pub query_seed: u64,
    /// Timed repetitions after the warm-up.
    pub repetitions: usize,
    /// Seed for the static matcher's perfect hash.
    pub matcher_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self::new(TrainerConfig::default())
    }
}

impl BenchConfig {
    pub fn new(trainer: TrainerConfig) -> Self {
        Self {
            trainer,
            queries: DEFAULT_QUERIES,
            query_seed: 0x9e37_79b9,
            repetitions: DEFAULT_REPETITIONS,
            matcher_seed: 0,
        }
    }
}

/// Uniformly distributed string indices.
#[derive(Debug, Clone)]
pub struct QueryWorkload {
    pub indices: Vec<usize>,
    pub seed: u64,
}

impl QueryWorkload {
    pub fn uniform(n_strings: usize, n_queries: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices =
            if n_strings == 0 { Vec::new() } else { (0..n_queries).map(|_| rng.random_range(0..n_strings)).collect() };
        Self { indices, seed }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// One benchmark row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub corpus: String,
    pub variant: Variant,
    pub bits_per_token: u8,
    pub threshold: u32,
    pub rows: usize,
    pub raw_bytes: usize,
    pub token_count: usize,
    pub bytes_per_token: usize,
    pub dict_entries: usize,
    pub dict_data_bytes: usize,
    pub dict_offsets_bytes: usize,
    pub dict_total_bytes: usize,
    /// `bytes_per_token * token_count + dict_total_bytes`.
    pub compressed_bytes: usize,
    pub compression_ratio: f64,
    pub avg_token_len: f64,
    /// Training including sampling and, for the bounded variant, building
    /// the static matcher.
    pub training_s: f64,
    pub parsing_s: f64,
    /// Parsing throughput, training excluded.
    pub compress_mib_s: f64,
    /// Throughput over `training_s + parsing_s`.
    pub compress_incl_training_mib_s: f64,
    pub decompress_s: f64,
    pub decompress_mib_s: f64,
    pub queries: usize,
    pub access_s: Option<f64>,
    pub access_ns: Option<f64>,
    pub access_checksum: u64,
    pub dict_total_mib: f64,
    pub dict_data_mib: f64,
    pub bytes_consumed: u64,
    pub sample_bytes: u64,
    pub tokens_created: usize,
    pub merges_skipped: usize,
    pub stop_reason: StopReason,
    pub seed: u64,
    pub repetitions: usize,
}

impl BenchResult {
    pub fn recomputed_ratio(&self) -> f64 {
        ratio(self.raw_bytes, self.bytes_per_token * self.token_count + self.dict_total_bytes)
    }
}

fn ratio(raw: usize, compressed: usize) -> f64 {
    if compressed == 0 {
        0.0
    } else {
        raw as f64 / compressed as f64
    }
}

fn mib_s(bytes: usize, secs: f64) -> f64 {
    if secs > 0.0 {
        bytes as f64 / MIB / secs
    } else {
        0.0
    }
}

/// Index of the median element of `values` under `key`.
fn median_by<T, F: Fn(&T) -> f64>(values: &[T], key: F) -> usize {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(&values[a]).total_cmp(&key(&values[b])));
    order[order.len() / 2]
}

/// Runs `f` once to warm up, then `reps` times, returning the median run.
fn timed<T, F: FnMut() -> Result<(T, Duration)>>(reps: usize, mut f: F) -> Result<(T, Duration)> {
    f()?;
    let mut runs = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        runs.push(f()?);
    }
    let mid = median_by(&runs, |r| r.1.as_secs_f64());
    Ok(runs.swap_remove(mid))
}

struct CompressRun {
    dictionary: Dictionary,
    report: TrainingReport,
    column: CompressedColumn,
    training: Duration,
    parsing: Duration,
}

fn compress_once(corpus: &Corpus, config: &BenchConfig) -> Result<CompressRun> {
    let start = Instant::now();
    let TrainedModel { dictionary, matcher, report } = train(corpus, &config.trainer)?;
    let parser = Parser::new(matcher, config.matcher_seed)?;
    let training = start.elapsed();

    let start = Instant::now();
    let column = parser.compress_corpus(&dictionary, corpus);
    let parsing = start.elapsed();
    Ok(CompressRun { dictionary, report, column, training, parsing })
}

/// Checks every queried string against the corpus, untimed.
pub fn verify_access(
    corpus: &Corpus,
    dict: &Dictionary,
    column: &CompressedColumn,
    workload: &QueryWorkload,
) -> Result<()> {
    let mut buf = DecodeBuffer::for_column(column);
    for &i in &workload.indices {
        let got = column.decompress_into(dict, i, &mut buf)?;
        if got != &corpus[i] {
            return Err(Error::Verification(format!("string {i} decompressed incorrectly")));
        }
    }
    Ok(())
}

/// The timed query loop. The checksum depends on every decoded string.
pub fn access_loop(dict: &Dictionary, column: &CompressedColumn, workload: &QueryWorkload) -> Result<(u64, Duration)> {
    let mut buf = DecodeBuffer::for_column(column);
    let mut checksum = 0u64;
    let start = Instant::now();
    for &i in &workload.indices {
        let s = column.decompress_into(dict, i, &mut buf)?;
        let last = s.last().copied().unwrap_or(0) as u64;
        checksum = checksum.wrapping_mul(31).wrapping_add(s.len() as u64 ^ last);
    }
    let elapsed = start.elapsed();
    Ok((black_box(checksum), elapsed))
}

pub fn run_benchmark(corpus: &Corpus, config: &BenchConfig) -> Result<BenchResult> {
    config.trainer.validate()?;
    let reps = config.repetitions.max(1);

    compress_once(corpus, config)?;
    let mut runs = Vec::with_capacity(reps);
    for _ in 0..reps {
        runs.push(compress_once(corpus, config)?);
    }
    let mid = median_by(&runs, |r| (r.training + r.parsing).as_secs_f64());
    let CompressRun { dictionary, report, column, training, parsing } = runs.swap_remove(mid);
    drop(runs);
    let dict = &dictionary;

    let mut out = Vec::with_capacity(corpus.total_bytes() + 16);
    column.decompress_all_into(dict, &mut out)?;
    if out != corpus.data() {
        return Err(Error::Verification("full decompression differs from the corpus".into()));
    }
    let (_, decompress) = timed(reps, || {
        let start = Instant::now();
        column.decompress_all_into(dict, &mut out)?;
        let elapsed = start.elapsed();
        black_box(&out);
        Ok(((), elapsed))
    })?;

    let workload = QueryWorkload::uniform(corpus.len(), config.queries, config.query_seed);
    let (checksum, access) = if workload.is_empty() {
        (0, None)
    } else {
        verify_access(corpus, dict, &column, &workload)?;
        let (sum, elapsed) = timed(reps, || access_loop(dict, &column, &workload))?;
        (sum, Some(elapsed))
    };

    Ok(summarize(corpus, dict, &report, &column, training, parsing, decompress, &workload, access, checksum, reps))
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    corpus: &Corpus,
    dict: &Dictionary,
    report: &TrainingReport,
    column: &CompressedColumn,
    training: Duration,
    parsing: Duration,
    decompress: Duration,
    workload: &QueryWorkload,
    access: Option<Duration>,
    checksum: u64,
    repetitions: usize,
) -> BenchResult {
    let footprint = dict.footprint();
    let raw = corpus.total_bytes();
    let bpt = dict.bytes_per_token();
    let compressed = bpt * column.token_count() + footprint.total_bytes;
    let (training_s, parsing_s) = (training.as_secs_f64(), parsing.as_secs_f64());
    BenchResult {
        corpus: corpus.name().to_string(),
        variant: dict.variant(),
        bits_per_token: dict.bits_per_token(),
        threshold: report.threshold,
        rows: corpus.len(),
        raw_bytes: raw,
        token_count: column.token_count(),
        bytes_per_token: bpt,
        dict_entries: dict.len(),
        dict_data_bytes: footprint.data_bytes,
        dict_offsets_bytes: footprint.offsets_bytes,
        dict_total_bytes: footprint.total_bytes,
        compressed_bytes: compressed,
        compression_ratio: ratio(raw, compressed),
        avg_token_len: if column.token_count() == 0 { 0.0 } else { raw as f64 / column.token_count() as f64 },
        training_s,
        parsing_s,
        compress_mib_s: mib_s(raw, parsing_s),
        compress_incl_training_mib_s: mib_s(raw, training_s + parsing_s),
        decompress_s: decompress.as_secs_f64(),
        decompress_mib_s: mib_s(raw, decompress.as_secs_f64()),
        queries: workload.len(),
        access_s: access.map(|d| d.as_secs_f64()),
        access_ns: access.map(|d| d.as_nanos() as f64 / workload.len() as f64),
        access_checksum: checksum,
        dict_total_mib: footprint.total_bytes as f64 / MIB,
        dict_data_mib: footprint.data_bytes as f64 / MIB,
        bytes_consumed: report.bytes_consumed,
        sample_bytes: report.sample_bytes,
        tokens_created: report.tokens_created,
        merges_skipped: report.merges_skipped,
        stop_reason: report.stop_reason,
        seed: report.seed,
        repetitions,
    }
}

/// One full benchmark per bits value, threshold forced to 2.
pub fn sweep_bits<I>(corpus: &Corpus, config: &BenchConfig, bits: I) -> Result<Vec<BenchResult>>
where
    I: IntoIterator<Item = u8>,
{
    bits.into_iter()
        .map(|b| {
            let mut c = config.clone();
            c.trainer.bits_per_token = b;
            c.trainer.threshold = Some(2);
            run_benchmark(corpus, &c)
        })
        .collect()
}

/// Outcome of training at one pair-frequency threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub threshold: u32,
    pub bytes_consumed: u64,
    pub strings_consumed: usize,
    pub sample_bytes: u64,
    pub entry_count: usize,
    pub stop_reason: StopReason,
    pub raw_bytes: usize,
    pub token_count: usize,
    pub dict_total_bytes: usize,
    pub compression_ratio: f64,
    pub training_s: f64,
}

pub fn sweep_threshold<I>(corpus: &Corpus, config: &TrainerConfig, thresholds: I) -> Result<Vec<ThresholdRow>>
where
    I: IntoIterator<Item = u32>,
{
    thresholds
        .into_iter()
        .map(|t| {
            let c = TrainerConfig { threshold: Some(t), ..config.clone() };
            let model = train(corpus, &c)?;
            let parser = Parser::new(model.matcher, 0)?;
            let column = parser.compress_corpus(&model.dictionary, corpus);
            let dict_total = model.dictionary.footprint().total_bytes;
            let compressed = model.dictionary.bytes_per_token() * column.token_count() + dict_total;
            Ok(ThresholdRow {
                threshold: t,
                bytes_consumed: model.report.bytes_consumed,
                strings_consumed: model.report.strings_consumed,
                sample_bytes: model.report.sample_bytes,
                entry_count: model.report.entry_count,
                stop_reason: model.report.stop_reason,
                raw_bytes: corpus.total_bytes(),
                token_count: column.token_count(),
                dict_total_bytes: dict_total,
                compression_ratio: ratio(corpus.total_bytes(), compressed),
                training_s: model.report.wall_time.as_secs_f64(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainByLength {
    pub token_length: usize,
    pub entries: usize,
    pub occurrences: u64,
    pub gain: i64,
    pub cumulative_gain_pct: f64,
    pub cumulative_occurrence_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSizeBin {
    pub bucket_size: usize,
    pub buckets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenLengthBin {
    pub token_length: usize,
    pub occurrences: u64,
    pub occurrence_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub rank: usize,
    pub token_id: u32,
    pub token_length: usize,
    pub occurrences: u64,
    pub cumulative_occurrence_pct: f64,
    pub cumulative_data_bytes: usize,
    /// Data bytes plus 4 bytes per offset, `k + 1` offsets for `k` tokens.
    pub cumulative_footprint_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothedGain {
    pub token_id: u32,
    pub token_length: usize,
    pub occurrences: u64,
    pub gain: i64,
    /// Trailing moving average over token ids.
    pub smoothed_gain: f64,
}

/// All diagnostic tables for one dictionary and compressed column.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub gain_by_length: Vec<GainByLength>,
    pub bucket_sizes: Vec<BucketSizeBin>,
    pub token_lengths: Vec<TokenLengthBin>,
    pub coverage: Vec<CoveragePoint>,
    pub smoothed_gain: Vec<SmoothedGain>,
    pub smoothing_window: usize,
    pub total_gain: i64,
}

fn pct(part: f64, whole: f64) -> f64 {
    if whole == 0.0 {
        0.0
    } else {
        100.0 * part / whole
    }
}

/// Occurrences of each token id in `column`.
pub fn token_frequencies(dict: &Dictionary, column: &CompressedColumn) -> Vec<u64> {
    let mut freq = vec![0u64; dict.len()];
    for id in column.iter_tokens() {
        freq[id.index()] += 1;
    }
    freq
}

pub fn compute_diagnostics(dict: &Dictionary, column: &CompressedColumn) -> Result<Diagnostics> {
    column.check_dictionary(dict)?;
    let freq = token_frequencies(dict, column);
    let gains: Vec<i64> = (0..dict.len()).map(|i| token_gain(dict.entry_len(i), freq[i])).collect();
    let total_gain: i64 = gains.iter().sum();
    let total_occ = column.token_count() as f64;
    let max_len = dict.longest_entry();

    let mut by_len = vec![(0usize, 0u64, 0i64); max_len + 1];
    for i in 0..dict.len() {
        let slot = &mut by_len[dict.entry_len(i)];
        slot.0 += 1;
        slot.1 += freq[i];
        slot.2 += gains[i];
    }
    let (mut cum_gain, mut cum_occ) = (0i64, 0u64);
    let mut gain_by_length = Vec::new();
    let mut token_lengths = Vec::new();
    for (len, &(entries, occurrences, gain)) in by_len.iter().enumerate() {
        if entries == 0 {
            continue;
        }
        cum_gain += gain;
        cum_occ += occurrences;
        gain_by_length.push(GainByLength {
            token_length: len,
            entries,
            occurrences,
            gain,
            cumulative_gain_pct: pct(cum_gain as f64, total_gain as f64),
            cumulative_occurrence_pct: pct(cum_occ as f64, total_occ),
        });
        token_lengths.push(TokenLengthBin {
            token_length: len,
            occurrences,
            occurrence_pct: pct(occurrences as f64, total_occ),
        });
    }

    let matcher = DynamicMatcher::from_dictionary(dict)?;
    let mut sizes: Vec<usize> = matcher.bucket_sizes().collect();
    sizes.sort_unstable();
    let mut bucket_sizes: Vec<BucketSizeBin> = Vec::new();
    for s in sizes {
        match bucket_sizes.last_mut() {
            Some(bin) if bin.bucket_size == s => bin.buckets += 1,
            _ => bucket_sizes.push(BucketSizeBin { bucket_size: s, buckets: 1 }),
        }
    }

    let mut order: Vec<usize> = (0..dict.len()).collect();
    order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    let (mut cum_occ, mut cum_data) = (0u64, 0usize);
    let coverage = order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            cum_occ += freq[i];
            cum_data += dict.entry_len(i);
            CoveragePoint {
                rank: k + 1,
                token_id: i as u32,
                token_length: dict.entry_len(i),
                occurrences: freq[i],
                cumulative_occurrence_pct: pct(cum_occ as f64, total_occ),
                cumulative_data_bytes: cum_data,
                cumulative_footprint_bytes: cum_data + 4 * (k + 2),
            }
        })
        .collect();

    let window = (dict.len() / 100).max(1);
    let mut running = 0i64;
    let smoothed_gain = (0..dict.len())
        .map(|i| {
            running += gains[i];
            if i >= window {
                running -= gains[i - window];
            }
            let n = (i + 1).min(window);
            SmoothedGain {
                token_id: i as u32,
                token_length: dict.entry_len(i),
                occurrences: freq[i],
                gain: gains[i],
                smoothed_gain: running as f64 / n as f64,
            }
        })
        .collect();

    Ok(Diagnostics {
        gain_by_length,
        bucket_sizes,
        token_lengths,
        coverage,
        smoothed_gain,
        smoothing_window: window,
        total_gain,
    })
}

pub const DIAGNOSTIC_FILES: [&str; 5] =
    ["gain_by_length.csv", "bucket_sizes.csv", "token_lengths.csv", "coverage.csv", "smoothed_gain.csv"];

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the diagnostic CSVs into `out_dir` and returns their paths.
pub fn emit_diagnostics(
    dict: &Dictionary,
    column: &CompressedColumn,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let d = compute_diagnostics(dict, column)?;
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = DIAGNOSTIC_FILES.iter().map(|f| dir.join(f)).collect();
    write_csv(&paths[0], &d.gain_by_length)?;
    write_csv(&paths[1], &d.bucket_sizes)?;
    write_csv(&paths[2], &d.token_lengths)?;
    write_csv(&paths[3], &d.coverage)?;
    write_csv(&paths[4], &d.smoothed_gain)?;
    Ok(paths)
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

/// Fixed-width table for terminals.
pub fn format_table(results: &[BenchResult]) -> String {
    let mut s = format!(
        "{:<10} {:>4} {:>4} {:>8} {:>12} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>9}\n",
        "variant",
        "bits",
        "thr",
        "ratio",
        "tokens",
        "dict_MiB",
        "train_s",
        "parse_s",
        "comp_MiB/s",
        "dec_MiB/s",
        "access_ns",
        "avg_tok",
        "entries"
    );
    for r in results {
        s.push_str(&format!(
            "{:<10} {:>4} {:>4} {:>8.4} {:>12} {:>10.4} {:>10.4} {:>10.4} {:>10.1} {:>10.1} {:>9} {:>9.3} {:>9}\n",
            r.variant.name(),
            r.bits_per_token,
            r.threshold,
            r.compression_ratio,
            r.token_count,
            r.dict_total_mib,
            r.training_s,
            r.parsing_s,
            r.compress_mib_s,
            r.decompress_mib_s,
            opt(r.access_ns, 1),
            r.avg_token_len,
            r.dict_entries,
        ));
    }
    s
}

/// Most frequent tokens first, for quick inspection.
pub fn top_tokens(dict: &Dictionary, column: &CompressedColumn, n: usize) -> Vec<(TokenId, u64)> {
    let freq = token_frequencies(dict, column);
    let mut ids: Vec<usize> = (0..freq.len()).collect();
    ids.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    ids.into_iter().take(n).map(|i| (TokenId::new(i as u32), freq[i])).collect()
}
