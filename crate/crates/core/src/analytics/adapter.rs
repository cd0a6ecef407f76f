use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::labels::LabelVector;
use super::AnalyticsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub id: String,
    pub text: String,
}

/// One entry per request, in request order; a failed comment does not fail
/// its batch.
pub type BatchResult = Vec<Result<LabelVector, String>>;

/// Boundary to an external moral-foundation / emotion classifier.
pub trait ClassifierAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn classify_batch(&self, batch: &[ClassifyRequest]) -> Result<BatchResult, AnalyticsError>;
}

/// Confidences derived from SHA-256 of the text: reproducible, and
/// meaningless.
#[derive(Debug, Default, Clone)]
pub struct StubAdapter;

impl StubAdapter {
    pub fn vector_for(text: &str) -> LabelVector {
        let digest = Sha256::digest(text.as_bytes());
        let mut values = [0.0; 15];
        for (v, b) in values.iter_mut().zip(digest.iter()) {
            *v = f64::from(*b) / 255.0;
        }
        LabelVector::from_values(values).expect("stub confidences lie in [0, 1]")
    }
}

impl ClassifierAdapter for StubAdapter {
    fn name(&self) -> &str {
        "stub"
    }

    fn classify_batch(&self, batch: &[ClassifyRequest]) -> Result<BatchResult, AnalyticsError> {
        Ok(batch.iter().map(|r| Ok(Self::vector_for(&r.text))).collect())
    }
}

/// Response line of the file exchange. A line carries either both label
/// maps or an `error`.
#[derive(Debug, Deserialize)]
struct ExchangeResponse {
    id: String,
    #[serde(default)]
    moral: Option<serde_json::Value>,
    #[serde(default)]
    emotion: Option<serde_json::Value>,
    #[serde(default)]
    error: Option<String>,
}

/// Hands texts to an external model runner through files.
///
/// Each batch is written as `requests-<n>.ndjson` (`{id, text}` lines). With
/// a command, the command runs with the request and response paths appended
/// to its arguments and must write `responses-<n>.ndjson`
/// (`{id, moral, emotion}` lines). Without one, vectors are looked up in a
/// prepared `responses.ndjson` in the exchange directory.
#[derive(Debug)]
pub struct FileExchangeAdapter {
    dir: PathBuf,
    command: Option<Vec<String>>,
    prepared: Option<HashMap<String, Result<LabelVector, String>>>,
    counter: std::sync::atomic::AtomicU64,
}

pub const PREPARED_RESPONSES: &str = "responses.ndjson";

impl FileExchangeAdapter {
    pub fn new(dir: &Path, command: Option<Vec<String>>) -> Result<Self, AnalyticsError> {
        fs::create_dir_all(dir).map_err(|e| AnalyticsError::io(dir, e))?;
        if matches!(&command, Some(c) if c.is_empty()) {
            return Err(AnalyticsError::InvalidConfig("adapter command is empty".into()));
        }
        let prepared = if command.is_none() {
            let path = dir.join(PREPARED_RESPONSES);
            if !path.exists() {
                return Err(AnalyticsError::AdapterUnavailable(format!(
                    "no command configured and {} is missing",
                    path.display()
                )));
            }
            Some(read_responses(&path)?)
        } else {
            None
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            prepared,
            counter: Default::default(),
        })
    }
}

fn parse_response_line(line: &str) -> Result<(String, Result<LabelVector, String>), String> {
    let r: ExchangeResponse = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if let Some(err) = r.error {
        return Ok((r.id, Err(err)));
    }
    let vector = match (r.moral, r.emotion) {
        (Some(moral), Some(emotion)) => {
            serde_json::from_value::<LabelVector>(serde_json::json!({"moral": moral, "emotion": emotion}))
                .map_err(|e| e.to_string())
        }
        _ => Err("response lacks moral or emotion map".to_string()),
    };
    Ok((r.id, vector))
}

fn read_responses(path: &Path) -> Result<HashMap<String, Result<LabelVector, String>>, AnalyticsError> {
    let file = fs::File::open(path).map_err(|e| AnalyticsError::AdapterUnavailable(format!("{}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AnalyticsError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_response_line(&line) {
            Ok((id, v)) => {
                out.entry(id).or_insert(v);
            }
            Err(e) => log::warn!("{}:{}: unreadable response: {e}", path.display(), n + 1),
        }
    }
    Ok(out)
}

impl ClassifierAdapter for FileExchangeAdapter {
    fn name(&self) -> &str {
        "file_exchange"
    }

    fn classify_batch(&self, batch: &[ClassifyRequest]) -> Result<BatchResult, AnalyticsError> {
        let responses = match (&self.command, &self.prepared) {
            (_, Some(prepared)) => {
                return Ok(batch
                    .iter()
                    .map(|r| prepared.get(&r.id).cloned().unwrap_or_else(|| Err("no response".into())))
                    .collect())
            }
            (Some(command), None) => {
                let n = self.counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let request = self.dir.join(format!("requests-{n:06}.ndjson"));
                let response = self.dir.join(format!("responses-{n:06}.ndjson"));
                let mut w = BufWriter::new(fs::File::create(&request).map_err(|e| AnalyticsError::io(&request, e))?);
                for r in batch {
                    serde_json::to_writer(&mut w, r).map_err(|e| AnalyticsError::io(&request, e.into()))?;
                    w.write_all(b"\n").map_err(|e| AnalyticsError::io(&request, e))?;
                }
                w.flush().map_err(|e| AnalyticsError::io(&request, e))?;
                drop(w);
                let status = Command::new(&command[0])
                    .args(&command[1..])
                    .arg(&request)
                    .arg(&response)
                    .status()
                    .map_err(|e| AnalyticsError::AdapterUnavailable(format!("{}: {e}", command[0])))?;
                if !status.success() {
                    return Err(AnalyticsError::AdapterUnavailable(format!("{} exited with {status}", command[0])));
                }
                read_responses(&response)?
            }
            (None, None) => unreachable!("constructor requires a command or prepared responses"),
        };
        Ok(batch
            .iter()
            .map(|r| responses.get(&r.id).cloned().unwrap_or_else(|| Err("no response".into())))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterSettings {
    Stub,
    FileExchange {
        dir: PathBuf,
        #[serde(default)]
        command: Option<Vec<String>>,
    },
}

impl Default for AdapterSettings {
    fn default() -> Self {
        AdapterSettings::Stub
    }
}

impl AdapterSettings {
    pub fn build(&self) -> Result<Box<dyn ClassifierAdapter>, AnalyticsError> {
        Ok(match self {
            AdapterSettings::Stub => Box::new(StubAdapter),
            AdapterSettings::FileExchange { dir, command } => Box::new(FileExchangeAdapter::new(dir, command.clone())?),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub requested: u64,
    pub classified: u64,
    pub failed: u64,
    /// Up to 20 failures, by comment id.
    pub sample_failures: Vec<(String, String)>,
}

/// Id-keyed cache in front of an adapter. Batches run concurrently up to
/// `in_flight`; readers share the cache, inserts are exclusive.
pub struct ClassifierCache<'a> {
    adapter: &'a dyn ClassifierAdapter,
    cache: RwLock<HashMap<String, LabelVector>>,
    batch_size: usize,
    in_flight: usize,
}

impl<'a> ClassifierCache<'a> {
    pub fn new(adapter: &'a dyn ClassifierAdapter, batch_size: usize, in_flight: usize) -> Self {
        Self {
            adapter,
            cache: RwLock::new(HashMap::new()),
            batch_size: batch_size.max(1),
            in_flight: in_flight.max(1),
        }
    }

    pub fn get(&self, id: &str) -> Option<LabelVector> {
        self.cache.read().expect("cache lock").get(id).cloned()
    }

    /// Classify every request not already cached. Requests are
    /// de-duplicated by id (first in id order wins) and batched in id order,
    /// so results do not depend on input order.
    pub fn classify_all(&self, requests: &[ClassifyRequest]) -> Result<ClassificationSummary, AnalyticsError> {
        let mut pending: Vec<&ClassifyRequest> = {
            let cache = self.cache.read().expect("cache lock");
            requests.iter().filter(|r| !cache.contains_key(&r.id)).collect()
        };
        pending.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.text.cmp(&b.text)));
        pending.dedup_by(|a, b| a.id == b.id);
        let batches: Vec<Vec<ClassifyRequest>> = pending
            .chunks(self.batch_size)
            .map(|c| c.iter().map(|r| (*r).clone()).collect())
            .collect();

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.in_flight)
            .build()
            .map_err(|e| AnalyticsError::InvalidConfig(e.to_string()))?;
        let results: Vec<Result<(Vec<ClassifyRequest>, BatchResult), AnalyticsError>> = pool.install(|| {
            batches
                .into_par_iter()
                .map(|batch| {
                    let out = self.adapter.classify_batch(&batch)?;
                    if out.len() != batch.len() {
                        return Err(AnalyticsError::Schema(format!(
                            "adapter returned {} results for {} requests",
                            out.len(),
                            batch.len()
                        )));
                    }
                    Ok((batch, out))
                })
                .collect()
        });

        let mut summary = ClassificationSummary {
            requested: pending.len() as u64,
            ..Default::default()
        };
        let mut failures = Vec::new();
        for r in results {
            let (batch, out) = r?;
            let mut cache = self.cache.write().expect("cache lock");
            for (req, res) in batch.into_iter().zip(out) {
                match res {
                    Ok(v) => {
                        summary.classified += 1;
                        cache.insert(req.id, v);
                    }
                    Err(e) => {
                        summary.failed += 1;
                        failures.push((req.id, e));
                    }
                }
            }
        }
        failures.sort();
        failures.truncate(20);
        summary.sample_failures = failures;
        Ok(summary)
    }

    pub fn into_map(self) -> HashMap<String, LabelVector> {
        self.cache.into_inner().expect("cache lock")
    }
}
