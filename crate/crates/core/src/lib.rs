//! Matching engine for example-based translation archives.
//!
//! Sentences are encoded as alternating function-word slots and content
//! blocks ([`pattern`]), compared with a two-level dynamic-programming
//! similarity ([`metric`]), grouped into medoid clusters while being cut
//! into translatable segments ([`learn`]), and retrieved with
//! cluster-pruned search ([`retrieve`]). [`eval`] measures what pruning
//! loses against exhaustive search.
//!
//! The runnable programs under `examples/` walk through each stage.

pub mod archive_io;
pub mod cli;
pub mod error;
pub mod eval;
pub mod learn;
pub mod lexicon;
pub mod metric;
pub mod pattern;
pub mod retrieve;
pub mod synth;

pub use error::{Error, Result};
pub use lexicon::{Lexicons, Token, TokenKind};
pub use metric::{similarity, similarity_score, MatchResult, MetricWeights};
pub use pattern::{ArchiveEntry, EntryId, Marker, SentencePattern};

/// `Range<usize>` as a two-element JSON array.
pub(crate) mod span_serde {
    use std::ops::Range;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Range<usize>, s: S) -> Result<S::Ok, S::Error> {
        [r.start, r.end].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Range<usize>, D::Error> {
        let [start, end] = <[usize; 2]>::deserialize(d)?;
        if start > end {
            return Err(serde::de::Error::custom(format!("invalid span [{start}, {end}]")));
        }
        Ok(start..end)
    }
}
