use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dictionary is full ({capacity} entries)")]
    Capacity { capacity: usize },

    #[error("entry of {len} bytes is outside the allowed range 1..={max}")]
    EntryLength { len: usize, max: usize },

    #[error("index {index} out of range (len {len})")]
    Lookup { index: usize, len: usize },

    #[error("packed words hold at most 8 bytes, got {0}")]
    PackLength(usize),

    /// The bucket for this 8-byte prefix already holds the maximum number of suffixes.
    #[error("bucket for prefix {prefix:#018x} is full ({cap} suffixes)")]
    BucketFull { prefix: u64, cap: usize },

    #[error("entry already present in the matcher (token {existing})")]
    Duplicate { existing: u32 },

    #[error("perfect hash construction failed after {attempts} seeds")]
    PerfectHash { attempts: usize },

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("column was built against dictionary {expected:#018x}, got {found:#018x}")]
    DictionaryMismatch { expected: u64, found: u64 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format { what, reason: reason.into() }
    }
}
