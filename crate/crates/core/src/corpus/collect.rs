use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use super::{
    AuthorHash, AuthorHasher, CorpusError, SubredditCategory, SubredditLists,
    TitleMatcher, DELETED_AUTHOR,
};
use crate::ingest::{
    CommentRecord, DumpChain, DumpReader, IngestError, IngestOptions, IngestStats, RecordKind,
    SubmissionRecord,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUBMISSIONS_FILE: &str = "submissions.ndjson";
pub const COMMENTS_FILE: &str = "comments.ndjson";

const CROSSPOST_NOTE: &str = "crossposts are not deduplicated";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpInputs {
    pub submissions: Vec<PathBuf>,
    pub comments: Vec<PathBuf>,
}

impl DumpInputs {
    /// Sort dump paths by record kind. Directories contribute their files
    /// (non-recursive, sorted by name). Kind comes from the file name:
    /// `RS_…` or `…submission…` for submissions, `RC_…` or `…comment…` for
    /// comments.
    pub fn discover(paths: &[PathBuf]) -> Result<Self, CorpusError> {
        let mut out = DumpInputs::default();
        for path in paths {
            let meta = fs::metadata(path).map_err(|source| {
                CorpusError::Ingest(IngestError::FileUnreadable {
                    path: path.clone(),
                    source,
                })
            })?;
            let mut files = Vec::new();
            if meta.is_dir() {
                let entries = fs::read_dir(path).map_err(|e| CorpusError::io(path, e))?;
                for entry in entries {
                    let entry = entry.map_err(|e| CorpusError::io(path, e))?;
                    let name = entry.file_name().to_string_lossy().into_owned();
                    if name.starts_with('.') || !entry.file_type().map(|t| t.is_file()).unwrap_or(false) {
                        continue;
                    }
                    files.push(entry.path());
                }
                files.sort();
            } else {
                files.push(path.clone());
            }
            for file in files {
                match dump_kind(&file) {
                    Some(RecordKind::Submission) => out.submissions.push(file),
                    Some(RecordKind::Comment) => out.comments.push(file),
                    None if meta.is_dir() => log::warn!("ignoring {}: unknown dump kind", file.display()),
                    None => return Err(CorpusError::UnknownDumpKind(file)),
                }
            }
        }
        Ok(out)
    }
}

pub fn dump_kind(path: &Path) -> Option<RecordKind> {
    let name = path.file_name()?.to_string_lossy().to_lowercase();
    if name.starts_with("rs_") || name.contains("submission") {
        Some(RecordKind::Submission)
    } else if name.starts_with("rc_") || name.contains("comment") {
        Some(RecordKind::Comment)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Corpus,
    Subset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconRef {
    /// Where the lexicon was read from, when it came from a file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub keywords: usize,
    pub sha256: String,
}

impl LexiconRef {
    pub fn new<S: AsRef<str>>(keywords: &[S], source: Option<String>) -> Self {
        Self {
            source,
            keywords: keywords.len(),
            sha256: lexicon_digest(keywords),
        }
    }
}

/// SHA-256 over the keywords joined by newlines.
pub fn lexicon_digest<S: AsRef<str>>(keywords: &[S]) -> String {
    let mut h = Sha256::new();
    for (i, k) in keywords.iter().enumerate() {
        if i > 0 {
            h.update(b"\n");
        }
        h.update(k.as_ref().as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub centric: u64,
    pub inclusive: u64,
    pub total: u64,
}

impl ClassCounts {
    fn add(&mut self, category: SubredditCategory) {
        match category {
            SubredditCategory::Centric => self.centric += 1,
            SubredditCategory::Inclusive => self.inclusive += 1,
            SubredditCategory::Excluded => {}
        }
        self.total += 1;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub submissions: ClassCounts,
    pub comments: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub first_utc: i64,
    pub last_utc: i64,
    pub first_day: String,
    pub last_day: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub records: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFiles {
    pub submissions: FileRef,
    pub comments: FileRef,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub submissions: IngestStats,
    pub comments: IngestStats,
    /// Submissions whose id had already been collected.
    pub duplicate_submissions_skipped: u64,
}

/// Everything needed to interpret, verify and re-create a corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub kind: CorpusKind,
    pub lexicon: LexiconRef,
    pub centric: Vec<String>,
    pub inclusive: Vec<String>,
    pub match_selftext: bool,
    pub date_range: Option<DateRange>,
    pub files: CorpusFiles,
    pub counts: CorpusCounts,
    pub ingest: IngestSummary,
    /// Hash that `[deleted]` authors map to under this corpus's salt.
    pub deleted_author_hash: AuthorHash,
    /// Dump files for a corpus; the parent directory for a subset.
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_manifest_sha256: Option<String>,
    pub notes: Vec<String>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectOptions {
    /// Also match lexicon keywords against the submission body.
    pub match_selftext: bool,
    pub ingest: IngestOptions,
}

/// Applies the collection policy: centric subreddits are taken whole,
/// inclusive ones only for matching submissions, everything else is
/// dropped; comments follow their submission.
pub struct Collector<'a> {
    pub lists: &'a SubredditLists,
    pub matcher: &'a TitleMatcher,
    pub hasher: &'a AuthorHasher,
    pub options: &'a CollectOptions,
    pub lexicon: LexiconRef,
    /// Embedded verbatim in the manifest.
    pub config: serde_json::Value,
}

impl Collector<'_> {
    pub fn collect(&self, inputs: &DumpInputs, out_dir: &Path) -> Result<CorpusManifest, CorpusError> {
        let classifier = self.lists.classifier()?;
        let mut submissions = DumpChain::<SubmissionRecord>::new(inputs.submissions.clone(), &self.options.ingest);
        let mut comments = DumpChain::<CommentRecord>::new(inputs.comments.clone(), &self.options.ingest);
        let mut writer = CorpusWriter::create(out_dir)?;

        let mut duplicates = 0;
        for record in submissions.by_ref() {
            let mut s = record?;
            let category = classifier.category(&s.subreddit);
            let keep = match category {
                SubredditCategory::Centric => true,
                SubredditCategory::Inclusive => submission_matches(self.matcher, &s, self.options.match_selftext),
                SubredditCategory::Excluded => false,
            };
            if !keep {
                continue;
            }
            if writer.submission_category(&s.id).is_some() {
                duplicates += 1;
                continue;
            }
            s.author = self.hasher.hash(&s.author).into_string();
            writer.submission(&s, category)?;
        }
        for record in comments.by_ref() {
            let mut c = record?;
            let Some(category) = writer.submission_category(link_target(&c.link_id)) else {
                continue;
            };
            c.author = self.hasher.hash(&c.author).into_string();
            writer.comment(&c, category)?;
        }

        let ingest = IngestSummary {
            submissions: submissions.total_stats(),
            comments: comments.total_stats(),
            duplicate_submissions_skipped: duplicates,
        };
        let mut dumps: Vec<String> = inputs.submissions.iter().map(|p| p.display().to_string()).collect();
        dumps.extend(inputs.comments.iter().map(|p| p.display().to_string()));
        writer.finish(ManifestHead {
            kind: CorpusKind::Corpus,
            lexicon: self.lexicon.clone(),
            lists: self.lists.clone(),
            match_selftext: self.options.match_selftext,
            ingest,
            deleted_author_hash: self.hasher.hash(DELETED_AUTHOR),
            inputs: dumps,
            parent_manifest_sha256: None,
            config: self.config.clone(),
        })
    }
}

pub(crate) fn submission_matches(matcher: &TitleMatcher, s: &SubmissionRecord, selftext: bool) -> bool {
    matcher.is_match(&s.title) || (selftext && matcher.is_match(&s.selftext))
}

/// Submission id targeted by a comment's `link_id`, prefix removed.
pub fn link_target(link_id: &str) -> &str {
    link_id.strip_prefix("t3_").unwrap_or(link_id)
}

/// A corpus directory opened for reading.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub dir: PathBuf,
    pub manifest: CorpusManifest,
    manifest_sha256: String,
}

impl Corpus {
    pub fn open(dir: &Path) -> Result<Self, CorpusError> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| CorpusError::io(&path, e))?;
        let manifest: CorpusManifest = serde_json::from_slice(&bytes).map_err(|e| CorpusError::InvalidManifest {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            manifest_sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }

    pub fn manifest_sha256(&self) -> &str {
        &self.manifest_sha256
    }

    /// Corpus files are written by this crate, so any malformed line is an
    /// error.
    fn read_options() -> IngestOptions {
        IngestOptions {
            compression: crate::ingest::Compression::None,
            max_skip_ratio: Some(0.0),
            ..IngestOptions::default()
        }
    }

    pub fn submissions(&self) -> Result<DumpReader<SubmissionRecord>, CorpusError> {
        let path = self.dir.join(&self.manifest.files.submissions.path);
        Ok(DumpReader::open(&path, &Self::read_options())?)
    }

    pub fn comments(&self) -> Result<DumpReader<CommentRecord>, CorpusError> {
        let path = self.dir.join(&self.manifest.files.comments.path);
        Ok(DumpReader::open(&path, &Self::read_options())?)
    }

    pub fn load_submissions(&self) -> Result<Vec<SubmissionRecord>, CorpusError> {
        self.submissions()?.map(|r| r.map_err(CorpusError::from)).collect()
    }

    pub fn load_comments(&self) -> Result<Vec<CommentRecord>, CorpusError> {
        self.comments()?.map(|r| r.map_err(CorpusError::from)).collect()
    }
}

/// Keep the parent's submissions that match `matcher`, plus their comments.
pub fn derive_subset(
    parent: &Corpus,
    matcher: &TitleMatcher,
    lexicon: LexiconRef,
    config: serde_json::Value,
    out_dir: &Path,
) -> Result<CorpusManifest, CorpusError> {
    let pm = &parent.manifest;
    let lists = SubredditLists {
        centric: pm.centric.clone(),
        inclusive: pm.inclusive.clone(),
    };
    let classifier = lists.classifier()?;
    let mut writer = CorpusWriter::create(out_dir)?;
    let mut submissions = parent.submissions()?;
    for record in submissions.by_ref() {
        let s = record?;
        if submission_matches(matcher, &s, pm.match_selftext) && writer.submission_category(&s.id).is_none() {
            writer.submission(&s, classifier.category(&s.subreddit))?;
        }
    }
    let mut comments = parent.comments()?;
    for record in comments.by_ref() {
        let c = record?;
        if let Some(category) = writer.submission_category(link_target(&c.link_id)) {
            writer.comment(&c, category)?;
        }
    }
    writer.finish(ManifestHead {
        kind: CorpusKind::Subset,
        lexicon,
        lists,
        match_selftext: pm.match_selftext,
        ingest: IngestSummary {
            submissions: submissions.stats(),
            comments: comments.stats(),
            duplicate_submissions_skipped: 0,
        },
        deleted_author_hash: pm.deleted_author_hash.clone(),
        inputs: vec![parent.dir.display().to_string()],
        parent_manifest_sha256: Some(parent.manifest_sha256().to_string()),
        config,
    })
}

struct ManifestHead {
    kind: CorpusKind,
    lexicon: LexiconRef,
    lists: SubredditLists,
    match_selftext: bool,
    ingest: IngestSummary,
    deleted_author_hash: AuthorHash,
    inputs: Vec<String>,
    parent_manifest_sha256: Option<String>,
    config: serde_json::Value,
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

struct NdjsonOut {
    name: &'static str,
    writer: BufWriter<HashingWriter<NamedTempFile>>,
    records: u64,
}

impl NdjsonOut {
    fn create(dir: &Path, name: &'static str) -> Result<Self, CorpusError> {
        let tmp = NamedTempFile::new_in(dir).map_err(|e| CorpusError::io(dir, e))?;
        Ok(Self {
            name,
            writer: BufWriter::with_capacity(
                1 << 16,
                HashingWriter {
                    inner: tmp,
                    hasher: Sha256::new(),
                },
            ),
            records: 0,
        })
    }

    fn write<T: Serialize>(&mut self, dir: &Path, record: &T) -> Result<(), CorpusError> {
        let path = dir.join(self.name);
        serde_json::to_writer(&mut self.writer, record).map_err(|e| CorpusError::io(&path, e.into()))?;
        self.writer.write_all(b"\n").map_err(|e| CorpusError::io(&path, e))?;
        self.records += 1;
        Ok(())
    }

    fn persist(self, dir: &Path) -> Result<FileRef, CorpusError> {
        let path = dir.join(self.name);
        let inner = self.writer.into_inner().map_err(|e| CorpusError::io(&path, e.into_error()))?;
        let sha256 = hex::encode(inner.hasher.finalize());
        inner.inner.as_file().sync_all().map_err(|e| CorpusError::io(&path, e))?;
        inner.inner.persist(&path).map_err(|e| CorpusError::io(&path, e.error))?;
        Ok(FileRef {
            path: self.name.to_string(),
            records: self.records,
            sha256,
        })
    }
}

/// Writes both record files to temporaries and moves them into place, with
/// the manifest last, only when every record has been written.
struct CorpusWriter {
    dir: PathBuf,
    submissions: NdjsonOut,
    comments: NdjsonOut,
    counts: CorpusCounts,
    first_utc: Option<i64>,
    last_utc: Option<i64>,
    submission_categories: HashMap<String, SubredditCategory>,
}

impl CorpusWriter {
    fn create(dir: &Path) -> Result<Self, CorpusError> {
        fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            submissions: NdjsonOut::create(dir, SUBMISSIONS_FILE)?,
            comments: NdjsonOut::create(dir, COMMENTS_FILE)?,
            counts: CorpusCounts::default(),
            first_utc: None,
            last_utc: None,
            submission_categories: HashMap::new(),
        })
    }

    fn see_time(&mut self, t: i64) {
        self.first_utc = Some(self.first_utc.map_or(t, |f| f.min(t)));
        self.last_utc = Some(self.last_utc.map_or(t, |l| l.max(t)));
    }

    fn submission(&mut self, s: &SubmissionRecord, category: SubredditCategory) -> Result<(), CorpusError> {
        self.submissions.write(&self.dir, s)?;
        self.counts.submissions.add(category);
        self.submission_categories.insert(s.id.clone(), category);
        self.see_time(s.created_utc);
        Ok(())
    }

    fn submission_category(&self, id: &str) -> Option<SubredditCategory> {
        self.submission_categories.get(id).copied()
    }

    fn comment(&mut self, c: &CommentRecord, category: SubredditCategory) -> Result<(), CorpusError> {
        self.comments.write(&self.dir, c)?;
        self.counts.comments.add(category);
        self.see_time(c.created_utc);
        Ok(())
    }

    fn finish(self, head: ManifestHead) -> Result<CorpusManifest, CorpusError> {
        let dir = self.dir;
        let files = CorpusFiles {
            submissions: self.submissions.persist(&dir)?,
            comments: self.comments.persist(&dir)?,
        };
        let date_range = match (self.first_utc, self.last_utc) {
            (Some(first), Some(last)) => Some(DateRange {
                first_utc: first,
                last_utc: last,
                first_day: utc_day(first),
                last_day: utc_day(last),
            }),
            _ => None,
        };
        let manifest = CorpusManifest {
            kind: head.kind,
            lexicon: head.lexicon,
            centric: head.lists.centric,
            inclusive: head.lists.inclusive,
            match_selftext: head.match_selftext,
            date_range,
            files,
            counts: self.counts,
            ingest: head.ingest,
            deleted_author_hash: head.deleted_author_hash,
            inputs: head.inputs,
            parent_manifest_sha256: head.parent_manifest_sha256,
            notes: vec![CROSSPOST_NOTE.to_string()],
            config: head.config,
        };
        let path = dir.join(MANIFEST_FILE);
        crate::lexicon::write_json_atomic(&path, &manifest).map_err(|e| CorpusError::io(&path, e))?;
        Ok(manifest)
    }
}

/// `YYYY-MM-DD` of a Unix timestamp, in UTC.
pub fn utc_day(t: i64) -> String {
    chrono::DateTime::from_timestamp(t, 0)
        .map(|d| d.date_naive().to_string())
        .unwrap_or_else(|| format!("@{t}"))
}
