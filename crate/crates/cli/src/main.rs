use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser as ClapParser, Subcommand};
use serde::Serialize;
use ssdc::bench::{self, BenchConfig, BenchResult};
use ssdc::synth;
use ssdc::trainer::{DEFAULT_SAMPLE_CAP_BYTES, MIN_THRESHOLD};
use ssdc::{train, CompressedColumn, Corpus, DecodeBuffer, Dictionary, Parser, TrainerConfig, Variant};

#[derive(ClapParser)]
#[command(name = "ssdc", version, about = "Short-string dictionary compression: train, compress, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a dictionary and write it to a file.
    Train {
        #[command(flatten)]
        common: Common,
        /// Dictionary output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress a corpus with an existing dictionary.
    Compress {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dict: PathBuf,
        /// Column output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompress a column back to LF-delimited text.
    Decompress {
        column: PathBuf,
        #[arg(long)]
        dict: PathBuf,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Decompress only this string.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Train, compress, decompress and run the access workload.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Benchmark every bits-per-token value in a range at threshold 2.
    SweepBits {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
        #[arg(long, default_value_t = 9)]
        min_bits: u8,
        #[arg(long, default_value_t = 21)]
        max_bits: u8,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train at every threshold in a range and report data consumed.
    SweepThreshold {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = MIN_THRESHOLD)]
        min_threshold: u32,
        #[arg(long, default_value_t = 30)]
        max_threshold: u32,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the gain, bucket, token-length and coverage CSVs.
    Diagnostics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "diagnostics")]
        out_dir: PathBuf,
    },
    /// Write a deterministic synthetic title corpus.
    Generate {
        #[arg(long, default_value_t = synth::BUNDLED_BYTES)]
        bytes: usize,
        #[arg(long, default_value_t = synth::BUNDLED_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    /// LF-delimited corpus; the bundled synthetic corpus when omitted.
    input: Option<PathBuf>,
    /// Read only whole lines within the first N bytes.
    #[arg(long)]
    limit_bytes: Option<u64>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "bounded16")]
    variant: Variant,
    #[arg(long, default_value_t = 16)]
    bits: u8,
    /// Pair-frequency threshold; derived from the corpus size when omitted.
    #[arg(long)]
    threshold: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP_BYTES)]
    sample_bytes: u64,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args)]
struct Timing {
    /// Random point queries; 0 skips the access benchmark.
    #[arg(long, default_value_t = bench::DEFAULT_QUERIES)]
    queries: usize,
    #[arg(long, default_value_t = bench::DEFAULT_REPETITIONS)]
    repetitions: usize,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

impl Input {
    fn load(&self) -> CliResult<Corpus> {
        match &self.input {
            Some(path) => Ok(Corpus::load_lines(path, self.limit_bytes)?),
            None => Ok(synth::bundled_corpus()),
        }
    }
}

impl Common {
    fn trainer(&self) -> TrainerConfig {
        TrainerConfig {
            bits_per_token: self.bits,
            variant: self.variant,
            threshold: self.threshold,
            sample_cap_bytes: self.sample_bytes,
            sample_fraction: None,
            seed: self.seed,
        }
    }

    fn bench(&self, timing: &Timing) -> BenchConfig {
        BenchConfig { queries: timing.queries, repetitions: timing.repetitions, ..BenchConfig::new(self.trainer()) }
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_tables<T: Serialize>(out_dir: Option<&Path>, stem: &str, rows: &[T]) -> CliResult<()> {
    let Some(dir) = out_dir else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let jsonl = dir.join(format!("{stem}.jsonl"));
    bench::write_csv(&csv, rows)?;
    write_jsonl(&jsonl, rows)?;
    eprintln!("wrote {} and {}", csv.display(), jsonl.display());
    Ok(())
}

fn print_components(r: &BenchResult) {
    println!(
        "raw_bytes={} token_count={} bytes_per_token={} dict_total_bytes={} dict_data_bytes={} training_s={:.6} parsing_s={:.6} decompress_s={:.6} access_s={} queries={} checksum={}",
        r.raw_bytes,
        r.token_count,
        r.bytes_per_token,
        r.dict_total_bytes,
        r.dict_data_bytes,
        r.training_s,
        r.parsing_s,
        r.decompress_s,
        r.access_s.map_or("-".to_string(), |s| format!("{s:.6}")),
        r.queries,
        r.access_checksum,
    );
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { common, out } => {
            let corpus = common.input.load()?;
            let model = train(&corpus, &common.trainer())?;
            model.dictionary.save(&out)?;
            print!("{}", model.report.to_key_values());
            let fp = model.dictionary.footprint();
            println!("dict_data_bytes={}\ndict_total_bytes={}", fp.data_bytes, fp.total_bytes);
        }
        Command::Compress { input, dict, out } => {
            let corpus = input.load()?;
            let dict = Dictionary::load(&dict)?;
            let parser = Parser::from_dictionary(&dict, 0)?;
            let column = parser.compress_corpus(&dict, &corpus);
            column.save(&out)?;
            println!(
                "strings={} raw_bytes={} token_count={} stream_bytes={}",
                column.len(),
                column.raw_bytes(),
                column.token_count(),
                column.compressed_bytes(dict.bytes_per_token()),
            );
        }
        Command::Decompress { column, dict, out, index } => {
            let dict = Dictionary::load(&dict)?;
            let column = CompressedColumn::load(&column, &dict)?;
            let sink: Box<dyn Write> = match out {
                Some(path) => Box::new(File::create(path)?),
                None => Box::new(std::io::stdout().lock()),
            };
            let mut w = BufWriter::new(sink);
            let mut buf = DecodeBuffer::for_column(&column);
            let range = match index {
                Some(i) => i..i + 1,
                None => 0..column.len(),
            };
            for i in range {
                w.write_all(column.decompress_into(&dict, i, &mut buf)?)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        Command::Bench { common, timing, out_dir } => {
            let corpus = common.input.load()?;
            let result = bench::run_benchmark(&corpus, &common.bench(&timing))?;
            print!("{}", bench::format_table(std::slice::from_ref(&result)));
            print_components(&result);
            write_tables(out_dir.as_deref(), "bench", &[result])?;
        }
        Command::SweepBits { common, timing, min_bits, max_bits, out_dir } => {
            let corpus = common.input.load()?;
            let rows = bench::sweep_bits(&corpus, &common.bench(&timing), min_bits..=max_bits)?;
            print!("{}", bench::format_table(&rows));
            write_tables(out_dir.as_deref(), "sweep_bits", &rows)?;
        }
        Command::SweepThreshold { common, min_threshold, max_threshold, out_dir } => {
            let corpus = common.input.load()?;
            let rows = bench::sweep_threshold(&corpus, &common.trainer(), min_threshold..=max_threshold)?;
            println!(
                "{:>9} {:>14} {:>10} {:>18} {:>8}",
                "threshold", "bytes_consumed", "entries", "stop_reason", "ratio"
            );
            for r in &rows {
                println!(
                    "{:>9} {:>14} {:>10} {:>18} {:>8.4}",
                    r.threshold,
                    r.bytes_consumed,
                    r.entry_count,
                    r.stop_reason.to_string(),
                    r.compression_ratio
                );
            }
            write_tables(out_dir.as_deref(), "sweep_threshold", &rows)?;
        }
        Command::Diagnostics { common, out_dir } => {
            let corpus = common.input.load()?;
            let model = train(&corpus, &common.trainer())?;
            let parser = Parser::new(model.matcher, 0)?;
            let column = parser.compress_corpus(&model.dictionary, &corpus);
            for path in bench::emit_diagnostics(&model.dictionary, &column, &out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Generate { bytes, seed, out } => {
            let corpus = synth::title_corpus(bytes, seed);
            corpus.write_lines(BufWriter::new(File::create(&out)?))?;
            println!("rows={} bytes={}", corpus.len(), corpus.total_bytes());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
