//! Field-level compression for short strings.
//!
//! A dictionary of up to `2^bits` tokens is learned in one sequential pass
//! over a shuffled sample: the input is parsed greedily with longest prefix
//! matching, and whenever a pair of adjacent tokens has been seen often
//! enough the pair is merged into a new token. Every string is then encoded
//! on its own as a sequence of 2-byte token IDs, so any single string can be
//! decoded without touching its neighbours.
//!
//! Two variants exist. [`Variant::Unbounded`] lets tokens grow freely;
//! [`Variant::Bounded16`] caps them at 16 bytes, which allows a static
//! perfect-hashed matcher for parsing and a fixed 16-byte copy per token when
//! decoding.

pub mod bench;
pub mod codec;
pub mod corpus;
pub mod dictionary;
pub mod error;
pub mod lpm;
pub mod synth;
pub mod trainer;

pub use codec::{CompressedColumn, DecodeBuffer, Parser, Tokens};
pub use corpus::Corpus;
pub use dictionary::{token_gain, Dictionary, Footprint, TokenId, Variant};
pub use error::{Error, Result};
pub use lpm::{DynamicMatcher, LongestPrefixMatch, PackedWord, StaticMatcher};
pub use trainer::{train, TrainedModel, TrainerConfig, TrainingReport};
