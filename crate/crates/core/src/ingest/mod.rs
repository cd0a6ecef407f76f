//! Dump ingest: submission and comment records streamed from
//! newline-delimited JSON, plain or zstd-compressed.
//!
//! Malformed lines are skipped and counted rather than aborting the stream;
//! the stream fails at its end when the skip ratio exceeds the configured
//! ceiling.

mod record;
mod stream;

use std::path::PathBuf;

pub use record::{
    parse_comment, parse_submission, CommentRecord, DumpRecord, Record, RecordKind,
    SubmissionRecord,
};
pub use stream::{open_stream, Compression, DumpChain, DumpReader, IngestOptions, IngestStats};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("read error in {source_name}: {source}")]
    Read {
        source_name: String,
        #[source]
        source: std::io::Error,
    },
    #[error(
        "corrupt compressed data in {source_name} at line {line} \
         (compressed byte offset {compressed_offset}): {message}"
    )]
    CorruptCompression {
        source_name: String,
        line: u64,
        compressed_offset: u64,
        message: String,
    },
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("{source_name}: skipped {skipped} of {lines} lines, above the {max_ratio} ceiling")]
    SkipRatioExceeded {
        source_name: String,
        skipped: u64,
        lines: u64,
        max_ratio: f64,
    },
    #[error("invalid ingest options: {0}")]
    InvalidOptions(String),
}
