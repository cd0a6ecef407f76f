use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::adapter::{ClassificationSummary, ClassifierAdapter, ClassifierCache, ClassifyRequest};
use super::series::{
    controversy_daily, daily_counts, label_daily_mean, popularity_series, subreddit_controversy, top_subreddits,
    unique_authors_daily, DailySeries, LabelMeans, SubredditControversy, TopSubreddits,
};
use super::AnalyticsError;
use crate::corpus::{link_target, Corpus, CorpusCounts, CorpusKind, DELETED_AUTHOR};
use crate::ingest::{CommentRecord, SubmissionRecord};
use crate::lexicon::write_json_atomic;
use crate::threads::{assemble, length_histogram, write_histogram_csv, AssemblyStats, Bucketing, HistogramBucket};

pub const ANALYSIS_FILE: &str = "analysis.json";
pub const REPORT_MANIFEST_FILE: &str = "report_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeOptions {
    pub top_n: usize,
    pub batch_size: usize,
    pub in_flight: usize,
    pub bucketing: Bucketing,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            top_n: 20,
            batch_size: 256,
            in_flight: 4,
            bucketing: Bucketing::Log10,
        }
    }
}

impl AnalyzeOptions {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.top_n == 0 {
            return Err(AnalyticsError::InvalidConfig("top_n must be at least 1".into()));
        }
        if self.batch_size == 0 || self.in_flight == 0 {
            return Err(AnalyticsError::InvalidConfig("batch_size and in_flight must be at least 1".into()));
        }
        if matches!(self.bucketing, Bucketing::Linear { width: 0 }) {
            return Err(AnalyticsError::InvalidConfig("linear bucket width must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRef {
    pub dir: String,
    pub kind: CorpusKind,
    pub manifest_sha256: String,
    pub counts: CorpusCounts,
}

/// Everything `report` needs, as written to `analysis.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub corpus: Option<CorpusRef>,
    pub adapter: String,
    pub classification: ClassificationSummary,
    /// Comments by the `[deleted]` sentinel count as one author in
    /// `unique_authors`.
    pub deleted_author_hash: Option<String>,
    pub deleted_author_comments: u64,
    pub daily_submissions: DailySeries,
    pub daily_comments: DailySeries,
    pub popularity_sum: DailySeries,
    pub popularity_mean: DailySeries,
    pub unique_authors: DailySeries,
    pub controversy_daily: DailySeries,
    pub subreddit_controversy: Vec<SubredditControversy>,
    pub top_subreddits: TopSubreddits,
    pub label_means: LabelMeans,
    pub conversation_lengths: Vec<HistogramBucket>,
    pub conversations: AssemblyStats,
    pub options: AnalyzeOptions,
    pub config: serde_json::Value,
}

/// Analyze records held in memory. `deleted_author_hash` is the hash the
/// `[deleted]` sentinel maps to, when known.
pub fn analyze_records(
    submissions: Vec<SubmissionRecord>,
    comments: Vec<CommentRecord>,
    adapter: &dyn ClassifierAdapter,
    options: &AnalyzeOptions,
    deleted_author_hash: Option<&str>,
    config: serde_json::Value,
) -> Result<AnalysisBundle, AnalyticsError> {
    options.validate()?;

    let mut sub_subreddit: HashMap<&str, &str> = HashMap::new();
    for s in &submissions {
        let e = sub_subreddit.entry(s.id.as_str()).or_insert(s.subreddit.as_str());
        if s.subreddit.as_str() < *e {
            *e = s.subreddit.as_str();
        }
    }
    // Comments without a subreddit inherit their submission's.
    let mut comments = comments;
    for c in comments.iter_mut().filter(|c| c.subreddit.is_empty()) {
        if let Some(sr) = sub_subreddit.get(link_target(&c.link_id)) {
            c.subreddit = sr.to_string();
        }
    }
    drop(sub_subreddit);

    let requests: Vec<ClassifyRequest> = comments
        .iter()
        .map(|c| ClassifyRequest {
            id: c.id.clone(),
            text: c.body.clone(),
        })
        .collect();
    let cache = ClassifierCache::new(adapter, options.batch_size, options.in_flight);
    let classification = cache.classify_all(&requests)?;
    let vectors = cache.into_map();

    let (popularity_sum, popularity_mean) = popularity_series(&comments);
    let deleted_author_comments = match deleted_author_hash {
        Some(h) => comments.iter().filter(|c| c.author == h || c.author == DELETED_AUTHOR).count() as u64,
        None => comments.iter().filter(|c| c.author == DELETED_AUTHOR).count() as u64,
    };

    let subreddit_controversy = subreddit_controversy(&comments, |c| c.subreddit.as_str());
    let top_subreddits = top_subreddits(&submissions, &comments, |c| c.subreddit.as_str(), options.top_n);

    let mut bundle = AnalysisBundle {
        corpus: None,
        adapter: adapter.name().to_string(),
        classification,
        deleted_author_hash: deleted_author_hash.map(str::to_string),
        deleted_author_comments,
        daily_submissions: daily_counts("daily_submissions", submissions.iter().map(|s| s.created_utc)),
        daily_comments: daily_counts("daily_comments", comments.iter().map(|c| c.created_utc)),
        popularity_sum,
        popularity_mean,
        unique_authors: unique_authors_daily(comments.iter().map(|c| (c.created_utc, c.author.as_str()))),
        controversy_daily: controversy_daily(&comments),
        subreddit_controversy,
        top_subreddits,
        label_means: label_daily_mean(&comments, &vectors),
        conversation_lengths: Vec::new(),
        conversations: AssemblyStats::default(),
        options: options.clone(),
        config,
    };
    let (conversations, stats) = assemble(submissions, comments);
    bundle.conversation_lengths = length_histogram(conversations.iter().map(|c| c.length), options.bucketing);
    bundle.conversations = stats;
    Ok(bundle)
}

/// Analyze a corpus directory and check that daily counts add up to the
/// manifest's totals.
pub fn analyze_corpus(
    corpus: &Corpus,
    adapter: &dyn ClassifierAdapter,
    options: &AnalyzeOptions,
    config: serde_json::Value,
) -> Result<AnalysisBundle, AnalyticsError> {
    let submissions = corpus.load_submissions()?;
    let comments = corpus.load_comments()?;
    let m = &corpus.manifest;
    let mut bundle = analyze_records(
        submissions,
        comments,
        adapter,
        options,
        Some(m.deleted_author_hash.as_str()),
        config,
    )?;
    for (kind, series, expected) in [
        ("submission", &bundle.daily_submissions, m.counts.submissions.total),
        ("comment", &bundle.daily_comments, m.counts.comments.total),
    ] {
        let total = series.total() as u64;
        if total != expected {
            return Err(AnalyticsError::Conservation {
                kind,
                series_total: total,
                manifest_total: expected,
            });
        }
    }
    bundle.corpus = Some(CorpusRef {
        dir: corpus.dir.display().to_string(),
        kind: m.kind,
        manifest_sha256: corpus.manifest_sha256().to_string(),
        counts: m.counts,
    });
    Ok(bundle)
}

pub fn write_bundle(out_dir: &Path, bundle: &AnalysisBundle) -> Result<PathBuf, AnalyticsError> {
    fs::create_dir_all(out_dir).map_err(|e| AnalyticsError::io(out_dir, e))?;
    let path = out_dir.join(ANALYSIS_FILE);
    write_json_atomic(&path, bundle).map_err(|e| AnalyticsError::io(&path, e))?;
    Ok(path)
}

/// Accepts the bundle file or the directory holding it.
pub fn read_bundle(path: &Path) -> Result<AnalysisBundle, AnalyticsError> {
    let path = if path.is_dir() { path.join(ANALYSIS_FILE) } else { path.to_path_buf() };
    let bytes = fs::read(&path).map_err(|e| AnalyticsError::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| AnalyticsError::InvalidBundle {
        path: path.clone(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct ReportManifest<'a> {
    format: ReportFormat,
    analysis: &'a str,
    analysis_sha256: String,
    files: Vec<String>,
}

fn csv_err(path: &Path, e: csv::Error) -> AnalyticsError {
    AnalyticsError::io(path, std::io::Error::other(e))
}

fn write_csv<F>(path: &Path, header: &[&str], rows: F) -> Result<(), AnalyticsError>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| csv_err(path, e))?;
        rows(&mut w).map_err(|e| csv_err(path, e))?;
        w.flush().map_err(|e| AnalyticsError::io(path, e))?;
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| AnalyticsError::io(dir, e))?;
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AnalyticsError::io(dir, e))?;
    std::io::Write::write_all(&mut tmp, &buf).map_err(|e| AnalyticsError::io(path, e))?;
    tmp.persist(path).map_err(|e| AnalyticsError::io(path, e.error))?;
    Ok(())
}

fn write_series(path: &Path, series: &DailySeries) -> Result<(), AnalyticsError> {
    write_csv(path, &["date", "value"], |w| {
        for p in &series.points {
            w.write_record([p.date.to_string(), p.value.to_string()])?;
        }
        Ok(())
    })
}

/// Write plot-ready files for `bundle` into `out_dir` and return their paths
/// relative to it. CSV: one file per series; JSON: a single `report.json`.
/// A `report_manifest.json` naming the source bundle is written last.
pub fn write_report(
    bundle: &AnalysisBundle,
    analysis_path: &Path,
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<String>, AnalyticsError> {
    fs::create_dir_all(out_dir).map_err(|e| AnalyticsError::io(out_dir, e))?;
    let mut files = Vec::new();
    match format {
        ReportFormat::Json => {
            let path = out_dir.join("report.json");
            write_json_atomic(&path, bundle).map_err(|e| AnalyticsError::io(&path, e))?;
            files.push("report.json".to_string());
        }
        ReportFormat::Csv => {
            for series in [
                &bundle.daily_submissions,
                &bundle.daily_comments,
                &bundle.popularity_sum,
                &bundle.popularity_mean,
                &bundle.unique_authors,
                &bundle.controversy_daily,
            ] {
                let name = format!("{}.csv", series.metric_name);
                write_series(&out_dir.join(&name), series)?;
                files.push(name);
            }

            let name = "subreddit_controversy.csv";
            write_csv(
                &out_dir.join(name),
                &["subreddit", "total_comments", "controversial_comments", "ratio"],
                |w| {
                    for s in &bundle.subreddit_controversy {
                        w.write_record([
                            s.name.clone(),
                            s.total_comments.to_string(),
                            s.controversial_comments.to_string(),
                            s.ratio.to_string(),
                        ])?;
                    }
                    Ok(())
                },
            )?;
            files.push(name.to_string());

            let name = "top_subreddits.csv";
            write_csv(&out_dir.join(name), &["kind", "rank", "subreddit", "count"], |w| {
                for (kind, list) in [
                    ("submissions", &bundle.top_subreddits.by_submissions),
                    ("comments", &bundle.top_subreddits.by_comments),
                ] {
                    for (i, s) in list.iter().enumerate() {
                        w.write_record([kind.to_string(), (i + 1).to_string(), s.name.clone(), s.count.to_string()])?;
                    }
                }
                Ok(())
            })?;
            files.push(name.to_string());

            for (label, series) in &bundle.label_means.series {
                let name = format!("label_means/{label}.csv");
                write_series(&out_dir.join(&name), series)?;
                files.push(name);
            }

            let name = "conversation_lengths.csv";
            let path = out_dir.join(name);
            let mut buf = Vec::new();
            write_histogram_csv(&mut buf, &bundle.conversation_lengths).map_err(|e| {
                AnalyticsError::io(&path, std::io::Error::other(e))
            })?;
            let mut tmp = tempfile::NamedTempFile::new_in(out_dir).map_err(|e| AnalyticsError::io(out_dir, e))?;
            std::io::Write::write_all(&mut tmp, &buf).map_err(|e| AnalyticsError::io(&path, e))?;
            tmp.persist(&path).map_err(|e| AnalyticsError::io(&path, e.error))?;
            files.push(name.to_string());
        }
    }
    let analysis_bytes = fs::read(analysis_path).map_err(|e| AnalyticsError::io(analysis_path, e))?;
    let manifest = ReportManifest {
        format,
        analysis: &analysis_path.display().to_string(),
        analysis_sha256: hex::encode(<sha2::Sha256 as sha2::Digest>::digest(&analysis_bytes)),
        files: files.clone(),
    };
    let path = out_dir.join(REPORT_MANIFEST_FILE);
    write_json_atomic(&path, &manifest).map_err(|e| AnalyticsError::io(&path, e))?;
    Ok(files)
}
