use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::record::{CommentRecord, DumpRecord, Record, RecordKind, SubmissionRecord};
use super::IngestError;

const ZSTD_MAGIC: [u8; 4] = [0x28, 0xB5, 0x2F, 0xFD];
const READ_BUFFER_BYTES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compression {
    /// zstd when the file starts with the zstd frame magic, plain otherwise.
    #[default]
    Auto,
    Zstd,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOptions {
    pub compression: Compression,
    /// Abort at end of stream when skipped / read exceeds this ratio.
    pub max_skip_ratio: Option<f64>,
    /// Longer lines are skipped as malformed without being buffered.
    pub max_line_bytes: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            compression: Compression::Auto,
            max_skip_ratio: Some(0.01),
            max_line_bytes: 8 << 20,
        }
    }
}

impl IngestOptions {
    pub fn validate(&self) -> Result<(), String> {
        if let Some(r) = self.max_skip_ratio {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("max_skip_ratio must lie in [0, 1], got {r}"));
            }
        }
        if self.max_line_bytes == 0 {
            return Err("max_line_bytes must be positive".into());
        }
        Ok(())
    }
}

/// Blank lines are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines_read: u64,
    pub records_parsed: u64,
    pub lines_skipped_malformed: u64,
    /// Decompressed bytes consumed, blank lines and newlines included.
    pub bytes_read: u64,
}

impl IngestStats {
    pub fn skip_ratio(&self) -> f64 {
        if self.lines_read == 0 {
            0.0
        } else {
            self.lines_skipped_malformed as f64 / self.lines_read as f64
        }
    }

    pub fn merge(&mut self, other: &IngestStats) {
        self.lines_read += other.lines_read;
        self.records_parsed += other.records_parsed;
        self.lines_skipped_malformed += other.lines_skipped_malformed;
        self.bytes_read += other.bytes_read;
    }
}

struct CountingReader<R> {
    inner: R,
    count: Arc<AtomicU64>,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.count.fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }
}

/// Streaming reader over one dump file. Yields records in file order and
/// skips malformed lines, counting them in [`IngestStats`]. Memory is bounded
/// by the read buffer plus `max_line_bytes`.
pub struct DumpReader<T> {
    source: String,
    reader: Box<dyn BufRead + Send>,
    parse: fn(&[u8]) -> Result<T, IngestError>,
    options: IngestOptions,
    compressed: bool,
    raw_bytes: Arc<AtomicU64>,
    line: Vec<u8>,
    stats: IngestStats,
    finished: bool,
}

impl<T> std::fmt::Debug for DumpReader<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DumpReader")
            .field("source", &self.source)
            .field("compressed", &self.compressed)
            .field("stats", &self.stats)
            .finish()
    }
}

/// Open a dump file as a stream of records of `kind`.
pub fn open_stream(
    path: &Path,
    kind: RecordKind,
    options: &IngestOptions,
) -> Result<DumpReader<Record>, IngestError> {
    let parse: fn(&[u8]) -> Result<Record, IngestError> = match kind {
        RecordKind::Submission => |l| SubmissionRecord::parse_line(l).map(Record::Submission),
        RecordKind::Comment => |l| CommentRecord::parse_line(l).map(Record::Comment),
    };
    DumpReader::open_with(path, parse, options)
}

impl<T: DumpRecord> DumpReader<T> {
    pub fn open(path: &Path, options: &IngestOptions) -> Result<Self, IngestError> {
        Self::open_with(path, T::parse_line, options)
    }

    pub fn from_reader<R: Read + Send + 'static>(
        source: &str,
        reader: R,
        options: &IngestOptions,
    ) -> Result<Self, IngestError> {
        Self::from_reader_with(source, reader, T::parse_line, options)
    }
}

impl<T> DumpReader<T> {
    fn open_with(
        path: &Path,
        parse: fn(&[u8]) -> Result<T, IngestError>,
        options: &IngestOptions,
    ) -> Result<Self, IngestError> {
        let unreadable = |source| IngestError::FileUnreadable {
            path: path.to_path_buf(),
            source,
        };
        if path.is_dir() {
            return Err(unreadable(io::Error::other("is a directory")));
        }
        let file = File::open(path).map_err(unreadable)?;
        Self::from_reader_with(&path.display().to_string(), file, parse, options)
    }

    fn from_reader_with<R: Read + Send + 'static>(
        source: &str,
        reader: R,
        parse: fn(&[u8]) -> Result<T, IngestError>,
        options: &IngestOptions,
    ) -> Result<Self, IngestError> {
        options.validate().map_err(IngestError::InvalidOptions)?;
        let raw_bytes = Arc::new(AtomicU64::new(0));
        let counting = CountingReader {
            inner: reader,
            count: raw_bytes.clone(),
        };
        let mut buffered = BufReader::with_capacity(READ_BUFFER_BYTES, counting);
        let compressed = match options.compression {
            Compression::Zstd => true,
            Compression::None => false,
            Compression::Auto => {
                let head = buffered.fill_buf().map_err(|e| IngestError::FileUnreadable {
                    path: PathBuf::from(source),
                    source: e,
                })?;
                head.starts_with(&ZSTD_MAGIC)
            }
        };
        let reader: Box<dyn BufRead + Send> = if compressed {
            let mut decoder = zstd::stream::read::Decoder::with_buffer(buffered).map_err(|e| {
                IngestError::CorruptCompression {
                    source_name: source.to_string(),
                    line: 0,
                    compressed_offset: 0,
                    message: e.to_string(),
                }
            })?;
            // Archive dumps are written with long-distance windows.
            decoder.window_log_max(31).map_err(|e| IngestError::CorruptCompression {
                source_name: source.to_string(),
                line: 0,
                compressed_offset: 0,
                message: e.to_string(),
            })?;
            Box::new(BufReader::with_capacity(READ_BUFFER_BYTES, decoder))
        } else {
            Box::new(buffered)
        };
        Ok(Self {
            source: source.to_string(),
            reader,
            parse,
            options: options.clone(),
            compressed,
            raw_bytes,
            line: Vec::new(),
            stats: IngestStats::default(),
            finished: false,
        })
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    pub fn is_compressed(&self) -> bool {
        self.compressed
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Read one line into `self.line` without the terminator. Returns false
    /// at end of input. Overlong lines are drained and flagged.
    fn next_line(&mut self) -> io::Result<Option<bool>> {
        self.line.clear();
        let limit = self.options.max_line_bytes as u64 + 1;
        let n = (&mut self.reader).take(limit).read_until(b'\n', &mut self.line)?;
        if n == 0 {
            return Ok(None);
        }
        self.stats.bytes_read += n as u64;
        let terminated = self.line.last() == Some(&b'\n');
        if !terminated && n as u64 == limit {
            loop {
                let buf = self.reader.fill_buf()?;
                if buf.is_empty() {
                    break;
                }
                match buf.iter().position(|&b| b == b'\n') {
                    Some(i) => {
                        self.reader.consume(i + 1);
                        self.stats.bytes_read += i as u64 + 1;
                        break;
                    }
                    None => {
                        let len = buf.len();
                        self.reader.consume(len);
                        self.stats.bytes_read += len as u64;
                    }
                }
            }
            self.line.clear();
            return Ok(Some(false));
        }
        if terminated {
            self.line.pop();
            if self.line.last() == Some(&b'\r') {
                self.line.pop();
            }
        }
        Ok(Some(true))
    }

    fn finish(&mut self) -> Option<Result<T, IngestError>> {
        self.finished = true;
        log::info!(
            "ingest {}: {}",
            self.source,
            serde_json::to_string(&self.stats).unwrap_or_default()
        );
        match self.options.max_skip_ratio {
            Some(max) if self.stats.skip_ratio() > max => Some(Err(IngestError::SkipRatioExceeded {
                source_name: self.source.clone(),
                skipped: self.stats.lines_skipped_malformed,
                lines: self.stats.lines_read,
                max_ratio: max,
            })),
            _ => None,
        }
    }
}

impl<T> Iterator for DumpReader<T> {
    type Item = Result<T, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        loop {
            let within_limit = match self.next_line() {
                Ok(Some(ok)) => ok,
                Ok(None) => return self.finish(),
                Err(e) => {
                    self.finished = true;
                    let err = if self.compressed {
                        IngestError::CorruptCompression {
                            source_name: self.source.clone(),
                            line: self.stats.lines_read + 1,
                            compressed_offset: self.raw_bytes.load(Ordering::Relaxed),
                            message: e.to_string(),
                        }
                    } else {
                        IngestError::Read {
                            source_name: self.source.clone(),
                            source: e,
                        }
                    };
                    return Some(Err(err));
                }
            };
            if within_limit && self.line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            self.stats.lines_read += 1;
            if !within_limit {
                self.stats.lines_skipped_malformed += 1;
                log::debug!("{}: line {} too long", self.source, self.stats.lines_read);
                continue;
            }
            match (self.parse)(&self.line) {
                Ok(record) => {
                    self.stats.records_parsed += 1;
                    return Some(Ok(record));
                }
                Err(e) => {
                    self.stats.lines_skipped_malformed += 1;
                    log::debug!("{}: line {}: {e}", self.source, self.stats.lines_read);
                }
            }
        }
    }
}

/// Several dump files read back to back as one stream. Files are opened
/// lazily, in order.
pub struct DumpChain<T> {
    paths: std::vec::IntoIter<PathBuf>,
    parse: fn(&[u8]) -> Result<T, IngestError>,
    options: IngestOptions,
    current: Option<DumpReader<T>>,
    per_file: Vec<(String, IngestStats)>,
}

impl<T: DumpRecord> DumpChain<T> {
    pub fn new(paths: Vec<PathBuf>, options: &IngestOptions) -> Self {
        Self {
            paths: paths.into_iter(),
            parse: T::parse_line,
            options: options.clone(),
            current: None,
            per_file: Vec::new(),
        }
    }
}

impl<T> DumpChain<T> {
    /// Stats of every file finished so far, in read order.
    pub fn per_file_stats(&self) -> &[(String, IngestStats)] {
        &self.per_file
    }

    pub fn total_stats(&self) -> IngestStats {
        let mut total = IngestStats::default();
        for (_, s) in &self.per_file {
            total.merge(s);
        }
        if let Some(r) = &self.current {
            total.merge(&r.stats());
        }
        total
    }
}

impl<T> Iterator for DumpChain<T> {
    type Item = Result<T, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(reader) = self.current.as_mut() {
                match reader.next() {
                    Some(item) => return Some(item),
                    None => {
                        let done = self.current.take().expect("current reader");
                        self.per_file.push((done.source.clone(), done.stats()));
                    }
                }
            }
            let path = self.paths.next()?;
            match DumpReader::open_with(&path, self.parse, &self.options) {
                Ok(r) => self.current = Some(r),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}
