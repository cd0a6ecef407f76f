use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    aggregate_corpus, containment_filter_by, keyword_key, merge_page_keywords, split_page,
    sum_across_pages, CorpusKeyword, KeywordLexicon, LexiconConfig, LexiconError, PageKeyword,
    Stage, TextChunk,
};
use crate::llm_gateway::{
    parse_keyword_list, parse_scored_keywords, parse_yes_no, CompletionRequest, Gateway,
    GatewayError, ParseError, TemplateId,
};
use crate::page_source::{first_n_words, PageError, PageSource, SourcePage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Kept,
    Rejected,
    /// Neither YES nor NO; treated as rejected.
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageFilterOutcome {
    pub title: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageExtraction {
    pub page_title: String,
    pub chunks: usize,
    pub keywords: Vec<PageKeyword>,
    /// Malformed `keyword: score` pairs dropped across all chunks.
    pub parse_skips: usize,
    /// Chunks whose response held no usable pair.
    pub empty_results: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub searched_titles: usize,
    pub fetched_pages: usize,
    pub missing_pages: usize,
    pub stub_pages: usize,
    pub kept_pages: usize,
    pub rejected_pages: usize,
    pub unparseable_verdicts: usize,
    pub chunks: usize,
    pub empty_results: usize,
    pub parse_skips: usize,
    pub page_keywords: usize,
    pub corpus_keywords: usize,
    pub after_top_n: usize,
    pub after_containment: usize,
    pub after_generic_filter: usize,
}

/// Everything needed to reproduce or audit a run. Holds no timestamps so
/// identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub topic: String,
    pub seed_terms: Vec<String>,
    pub config: LexiconConfig,
    pub provider: String,
    /// Sampling temperature sent to the provider; `None` for the stub.
    pub temperature: Option<f64>,
    pub counts: StageCounts,
    pub kept_pages: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub lexicon: KeywordLexicon,
    pub metadata: RunMetadata,
}

impl PipelineOutput {
    /// Write `lexicon.json` and `run_metadata.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        write_lexicon(&dir.join("lexicon.json"), &self.lexicon.entries)?;
        write_json_atomic(&dir.join("run_metadata.json"), &self.metadata)
    }
}

pub struct PipelineContext<'a> {
    pub gateway: &'a Gateway,
    pub pages: &'a PageSource,
    /// Where per-stage results are persisted; `None` disables resumption.
    pub work_dir: Option<PathBuf>,
    /// Upper bound on concurrent provider calls.
    pub jobs: usize,
    /// Identifies the provider configuration, so stage files written under
    /// another provider are not reused.
    pub provider_label: String,
    pub temperature: Option<f64>,
}

fn provider_err(stage: Stage) -> impl Fn(GatewayError) -> LexiconError {
    move |source| LexiconError::Provider { stage, source }
}

fn page_err(stage: Stage) -> impl Fn(PageError) -> LexiconError {
    move |source| LexiconError::Pages { stage, source }
}

/// Ask the provider whether each page is on topic, judging by its title and
/// first `n_words` words. Unparseable answers count as NO and are logged.
pub fn filter_pages(
    pages: Vec<SourcePage>,
    topic: &str,
    n_words: usize,
    gateway: &Gateway,
) -> Result<(Vec<SourcePage>, Vec<PageFilterOutcome>), LexiconError> {
    let verdicts: Vec<Verdict> = pages
        .par_iter()
        .map(|page| {
            let lead = first_n_words(page, n_words).map_err(page_err(Stage::FilterPages))?;
            let request = CompletionRequest::new(
                TemplateId::PageFilter,
                [("page_name", page.title.as_str()), ("topic", topic), ("first_100_words", &lead)],
                16,
            )
            .map_err(provider_err(Stage::FilterPages))?;
            let response = gateway.complete(&request).map_err(provider_err(Stage::FilterPages))?;
            Ok(match parse_yes_no(&response) {
                Ok(true) => Verdict::Kept,
                Ok(false) => Verdict::Rejected,
                Err(e) => {
                    log::warn!("page filter for {:?}: {e}; treating as NO", page.title);
                    Verdict::Unparseable
                }
            })
        })
        .collect::<Result<_, LexiconError>>()?;

    let outcomes = pages
        .iter()
        .zip(&verdicts)
        .map(|(p, v)| PageFilterOutcome { title: p.title.clone(), verdict: *v })
        .collect();
    let kept = pages
        .into_iter()
        .zip(verdicts)
        .filter_map(|(p, v)| (v == Verdict::Kept).then_some(p))
        .collect();
    Ok((kept, outcomes))
}

/// Score keywords in every chunk of one page and average per keyword.
/// A chunk whose response yields nothing usable is logged and skipped.
pub fn extract_page_keywords(
    page_title: &str,
    chunks: &[TextChunk],
    topic: &str,
    max_response_tokens: u32,
    gateway: &Gateway,
) -> Result<PageExtraction, LexiconError> {
    let parsed: Vec<Option<_>> = chunks
        .par_iter()
        .filter(|c| c.token_count > 0)
        .map(|chunk| {
            let request = CompletionRequest::new(
                TemplateId::KeywordExtract,
                [("topic", topic), ("text", chunk.text.as_str())],
                max_response_tokens,
            )
            .map_err(provider_err(Stage::Extraction))?;
            let response = gateway.complete(&request).map_err(provider_err(Stage::Extraction))?;
            match parse_scored_keywords(&response) {
                Ok(p) => Ok(Some(p)),
                Err(ParseError::EmptyResult) => {
                    log::warn!("{page_title:?} chunk {}: no keywords recovered", chunk.index);
                    Ok(None)
                }
                Err(e) => unreachable!("keyword parsing only fails with EmptyResult: {e}"),
            }
        })
        .collect::<Result<_, LexiconError>>()?;

    let empty_results = parsed.iter().filter(|p| p.is_none()).count();
    let parse_skips = parsed.iter().flatten().map(|p| p.skipped).sum();
    let lists: Vec<_> = parsed.into_iter().flatten().map(|p| p.list).collect();
    let keywords = merge_page_keywords(page_title, &lists);
    if keywords.is_empty() && !chunks.is_empty() {
        log::warn!("{page_title:?}: no keywords extracted from any chunk");
    }
    Ok(PageExtraction {
        page_title: page_title.to_string(),
        chunks: chunks.len(),
        keywords,
        parse_skips,
        empty_results,
    })
}

/// Ask the provider to drop generic keywords (countries, heads of state,
/// news outlets, platforms). Survivors keep their importance and order.
pub fn generic_filter(
    entries: Vec<CorpusKeyword>,
    max_response_tokens: u32,
    gateway: &Gateway,
) -> Result<Vec<CorpusKeyword>, LexiconError> {
    let list = entries
        .iter()
        .map(|e| e.keyword.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    let request =
        CompletionRequest::new(TemplateId::KeywordFilter, [("keyword_list", list)], max_response_tokens)
            .map_err(provider_err(Stage::GenericFilter))?;
    let response = gateway.complete(&request).map_err(provider_err(Stage::GenericFilter))?;
    let returned: HashSet<String> = parse_keyword_list(&response)
        .map_err(|_| LexiconError::LexiconEmpty)?
        .iter()
        .map(|k| keyword_key(k))
        .collect();
    let survivors: Vec<CorpusKeyword> = entries
        .into_iter()
        .filter(|e| returned.contains(&keyword_key(&e.keyword)))
        .collect();
    if survivors.is_empty() {
        return Err(LexiconError::LexiconEmpty);
    }
    Ok(survivors)
}

#[derive(Serialize, Deserialize)]
struct StageFile<T> {
    fingerprint: String,
    data: T,
}

struct StageStore {
    dir: Option<PathBuf>,
    fingerprint: String,
}

impl StageStore {
    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{name}.json")))
    }

    fn load<T: DeserializeOwned>(&self, name: &str) -> Option<T> {
        let bytes = fs::read(self.path(name)?).ok()?;
        let file: StageFile<T> = serde_json::from_slice(&bytes).ok()?;
        if file.fingerprint == self.fingerprint {
            log::info!("resuming stage {name} from disk");
            Some(file.data)
        } else {
            None
        }
    }

    fn save<T: Serialize>(&self, name: &str, data: &T) -> Result<(), LexiconError> {
        let Some(path) = self.path(name) else {
            return Ok(());
        };
        let file = StageFile { fingerprint: self.fingerprint.clone(), data };
        write_json_atomic(&path, &file).map_err(|e| LexiconError::Persist(format!("{}: {e}", path.display())))
    }
}

/// Run every stage and return the lexicon plus run metadata.
pub fn run_pipeline(config: &LexiconConfig, ctx: &PipelineContext<'_>) -> Result<PipelineOutput, LexiconError> {
    config.validate()?;
    let jobs = ctx.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LexiconError::InvalidConfig(format!("thread pool: {e}")))?;
    let store = StageStore {
        dir: ctx.work_dir.clone(),
        fingerprint: fingerprint(config, &ctx.provider_label),
    };
    if let Some(dir) = &store.dir {
        fs::create_dir_all(dir.join("extraction"))
            .map_err(|e| LexiconError::Persist(format!("{}: {e}", dir.display())))?;
    }
    pool.install(|| run_stages(config, ctx, &store))
}

fn run_stages(
    config: &LexiconConfig,
    ctx: &PipelineContext<'_>,
    store: &StageStore,
) -> Result<PipelineOutput, LexiconError> {
    let mut counts = StageCounts::default();
    let seeds: Vec<&str> = config
        .seed_terms
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();

    // search
    let found: Vec<(String, String)> = match store.load("search") {
        Some(found) => found,
        None => {
            let mut seen = HashSet::new();
            let mut found = Vec::new();
            for seed in &seeds {
                for title in ctx
                    .pages
                    .search(seed, config.per_seed_search_limit)
                    .map_err(page_err(Stage::Search))?
                {
                    if seen.insert(title.clone()) {
                        found.push((title, seed.to_string()));
                    }
                }
            }
            store.save("search", &found)?;
            found
        }
    };
    counts.searched_titles = found.len();

    // fetch
    let fetched: Vec<Option<SourcePage>> = found
        .par_iter()
        .map(|(title, seed)| match ctx.pages.fetch(title) {
            Ok(mut page) => {
                page.retrieved_for = Some(seed.clone());
                Ok(Some(page))
            }
            Err(PageError::PageNotFound(t)) => {
                log::warn!("search result {t:?} could not be fetched; skipping");
                Ok(None)
            }
            Err(e) => Err(page_err(Stage::Fetch)(e)),
        })
        .collect::<Result<_, _>>()?;
    counts.missing_pages = fetched.iter().filter(|p| p.is_none()).count();
    let pages: Vec<SourcePage> = fetched.into_iter().flatten().collect();
    counts.fetched_pages = pages.len();
    counts.stub_pages = pages.iter().filter(|p| p.is_stub).count();

    // filter_pages
    let kept: Vec<SourcePage> = match store.load::<Vec<PageFilterOutcome>>("filter_pages") {
        Some(outcomes) => {
            tally_verdicts(&mut counts, &outcomes);
            let keep: HashSet<&str> = outcomes
                .iter()
                .filter(|o| o.verdict == Verdict::Kept)
                .map(|o| o.title.as_str())
                .collect();
            pages.into_iter().filter(|p| keep.contains(p.title.as_str())).collect()
        }
        None => {
            let (kept, outcomes) = filter_pages(pages, &config.topic, config.page_filter_words, ctx.gateway)?;
            tally_verdicts(&mut counts, &outcomes);
            store.save("filter_pages", &outcomes)?;
            kept
        }
    };

    // split_page + extraction, persisted per page
    let extractions: Vec<PageExtraction> = kept
        .par_iter()
        .map(|page| {
            let name = format!("extraction/{}", hex::encode(Sha256::digest(page.title.as_bytes())));
            if let Some(done) = store.load::<PageExtraction>(&name) {
                return Ok(done);
            }
            let chunks = split_page(&page.title, &page.body, config.max_chunk_tokens);
            let extraction = extract_page_keywords(
                &page.title,
                &chunks,
                &config.topic,
                config.extract_response_tokens,
                ctx.gateway,
            )?;
            store.save(&name, &extraction)?;
            Ok(extraction)
        })
        .collect::<Result<_, LexiconError>>()?;
    for e in &extractions {
        counts.chunks += e.chunks;
        counts.empty_results += e.empty_results;
        counts.parse_skips += e.parse_skips;
        counts.page_keywords += e.keywords.len();
    }
    let page_keywords: Vec<PageKeyword> = extractions.into_iter().flat_map(|e| e.keywords).collect();

    // aggregate
    counts.corpus_keywords = sum_across_pages(&page_keywords).len();
    let top = aggregate_corpus(&page_keywords, config.top_n);
    counts.after_top_n = top.len();
    store.save("aggregate", &top)?;

    // containment
    let contained = containment_filter_by(top, |k| k.keyword.as_str());
    counts.after_containment = contained.len();
    store.save("containment", &contained)?;

    // generic filter
    let entries = match store.load::<Vec<CorpusKeyword>>("generic_filter") {
        Some(entries) => entries,
        None => {
            if contained.is_empty() {
                return Err(LexiconError::LexiconEmpty);
            }
            let entries = generic_filter(contained, config.filter_response_tokens, ctx.gateway)?;
            store.save("generic_filter", &entries)?;
            entries
        }
    };
    counts.after_generic_filter = entries.len();

    let kept_pages = kept.iter().map(|p| p.title.clone()).collect();
    Ok(PipelineOutput {
        lexicon: KeywordLexicon {
            topic: config.topic.clone(),
            entries,
            config_snapshot: config.clone(),
        },
        metadata: RunMetadata {
            topic: config.topic.clone(),
            seed_terms: config.seed_terms.clone(),
            config: config.clone(),
            provider: ctx.provider_label.clone(),
            temperature: ctx.temperature,
            counts,
            kept_pages,
        },
    })
}

fn tally_verdicts(counts: &mut StageCounts, outcomes: &[PageFilterOutcome]) {
    for o in outcomes {
        match o.verdict {
            Verdict::Kept => counts.kept_pages += 1,
            Verdict::Rejected => counts.rejected_pages += 1,
            Verdict::Unparseable => {
                counts.rejected_pages += 1;
                counts.unparseable_verdicts += 1;
            }
        }
    }
}

fn fingerprint(config: &LexiconConfig, provider_label: &str) -> String {
    let mut substance = config.clone();
    substance.retry = Default::default();
    let json = serde_json::to_string(&(substance, provider_label)).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn write_json_atomic<T: Serialize + ?Sized>(path: &Path, value: &T) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Lexicon file: a JSON array of `{keyword, importance, pages}`.
pub fn write_lexicon(path: &Path, entries: &[CorpusKeyword]) -> std::io::Result<()> {
    write_json_atomic(path, entries)
}

/// Read a lexicon file. A plain array of keyword strings is also accepted,
/// for hand-curated lists.
pub fn read_lexicon(path: &Path) -> std::io::Result<Vec<CorpusKeyword>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Full(CorpusKeyword),
        Bare(String),
    }
    let bytes = fs::read(path)?;
    let entries: Vec<Entry> = serde_json::from_slice(&bytes)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            Entry::Full(k) => k,
            Entry::Bare(keyword) => CorpusKeyword { keyword, importance: 0.0, pages: Default::default() },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_gateway::StubProvider;
    use crate::page_source::FixtureBackend;

    fn page(title: &str, body: &str) -> SourcePage {
        SourcePage {
            title: title.into(),
            page_id: title.into(),
            body: body.into(),
            retrieved_for: None,
            fetch_time: 0,
            is_stub: false,
        }
    }

    fn filter_prompt(title: &str, topic: &str, body: &str) -> String {
        CompletionRequest::new(
            TemplateId::PageFilter,
            [("page_name", title), ("topic", topic), ("first_100_words", body)],
            16,
        )
        .unwrap()
        .render()
        .unwrap()
    }

    #[test]
    fn yes_for_all_is_identity() {
        let pages = vec![page("A", "a"), page("B", "b")];
        let (kept, outcomes) = filter_pages(pages.clone(), "t", 100, &Gateway::stub()).unwrap();
        assert_eq!(kept, pages);
        assert!(outcomes.iter().all(|o| o.verdict == Verdict::Kept));
    }

    #[test]
    fn fixture_verdicts() {
        let mut stub = StubProvider::new();
        stub.insert_fixture(&filter_prompt("A", "t", "alpha"), "YES");
        stub.insert_fixture(&filter_prompt("B", "t", "beta"), "NO");
        stub.insert_fixture(&filter_prompt("C", "t", "gamma"), "Maybe");
        let gateway = Gateway::new(Box::new(stub), Default::default());
        let (kept, outcomes) =
            filter_pages(vec![page("A", "alpha"), page("B", "beta"), page("C", "gamma")], "t", 100, &gateway)
                .unwrap();
        assert_eq!(kept.iter().map(|p| p.title.as_str()).collect::<Vec<_>>(), vec!["A"]);
        assert_eq!(outcomes[2].verdict, Verdict::Unparseable);
    }

    #[test]
    fn extraction_averages_chunks() {
        let chunks = split_page("P", "one two\n\nthree four", 2);
        assert_eq!(chunks.len(), 2);
        let mut stub = StubProvider::new();
        for (chunk, response) in chunks.iter().zip(["hamas: 5, gaza: 2", "Hamas: 4, bad: x"]) {
            let prompt = CompletionRequest::new(
                TemplateId::KeywordExtract,
                [("topic", "t"), ("text", chunk.text.as_str())],
                64,
            )
            .unwrap()
            .render()
            .unwrap();
            stub.insert_fixture(&prompt, response);
        }
        let gateway = Gateway::new(Box::new(stub), Default::default());
        let out = extract_page_keywords("P", &chunks, "t", 64, &gateway).unwrap();
        assert_eq!(out.keywords[0].importance, 4.5);
        assert_eq!(out.keywords[0].chunk_hits, 2);
        assert_eq!(out.keywords[1].keyword, "gaza");
        assert_eq!(out.parse_skips, 1);
    }

    #[test]
    fn pages_with_no_keywords_yield_empty_list() {
        let chunks = split_page("P", "only lowercase prose here", 100);
        let out = extract_page_keywords("P", &chunks, "t", 64, &Gateway::stub()).unwrap();
        assert!(out.keywords.is_empty());
        assert_eq!(out.empty_results, 1);
    }

    fn corpus(keyword: &str, importance: f64) -> CorpusKeyword {
        CorpusKeyword { keyword: keyword.into(), importance, pages: Default::default() }
    }

    fn filter_gateway(input: &str, response: &str) -> Gateway {
        let prompt = CompletionRequest::new(TemplateId::KeywordFilter, [("keyword_list", input)], 64)
            .unwrap()
            .render()
            .unwrap();
        let mut stub = StubProvider::new();
        stub.insert_fixture(&prompt, response);
        Gateway::new(Box::new(stub), Default::default())
    }

    #[test]
    fn generic_filter_echo_is_identity() {
        let entries = vec![corpus("Hamas", 9.0), corpus("Gaza", 8.0)];
        let out = generic_filter(entries.clone(), 64, &Gateway::stub()).unwrap();
        assert_eq!(out, entries);
    }

    #[test]
    fn generic_filter_removes_returned_absentees() {
        let entries = vec![corpus("Hamas", 9.0), corpus("BBC", 8.5), corpus("Gaza", 8.0), corpus("TikTok", 1.0)];
        let gateway = filter_gateway("Hamas, BBC, Gaza, TikTok", "- gaza\n- Hamas");
        let out = generic_filter(entries, 64, &gateway).unwrap();
        let names: Vec<_> = out.iter().map(|k| k.keyword.as_str()).collect();
        assert_eq!(names, vec!["Hamas", "Gaza"]);
    }

    #[test]
    fn generic_filter_empty_response() {
        let gateway = filter_gateway("Hamas", "");
        assert!(matches!(generic_filter(vec![corpus("Hamas", 1.0)], 64, &gateway), Err(LexiconError::LexiconEmpty)));
    }

    fn fixture_pages() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("Gaza Strip.txt"),
            "The Gaza Strip lies on the coast. Gaza City is its largest city.\n\nThe Rafah Crossing links Gaza Strip to Egypt.",
        )
        .unwrap();
        fs::write(
            dir.path().join("West Bank.txt"),
            "The West Bank is landlocked. East Jerusalem is nearby.\n\nThe West Bank borders Jordan.",
        )
        .unwrap();
        fs::write(dir.path().join("index.json"), r#"{"gaza": ["Gaza Strip", "West Bank"], "bank": ["West Bank"]}"#)
            .unwrap();
        dir
    }

    fn config() -> LexiconConfig {
        LexiconConfig {
            seed_terms: vec!["gaza".into(), "bank".into()],
            topic: "test topic".into(),
            ..Default::default()
        }
    }

    struct Down;

    impl crate::llm_gateway::CompletionProvider for Down {
        fn name(&self) -> &str {
            "down"
        }
        fn complete(
            &self,
            _: &str,
            _: &CompletionRequest,
        ) -> Result<crate::llm_gateway::Completion, crate::llm_gateway::ProviderError> {
            Err(crate::llm_gateway::ProviderError::Transient("connection refused".into()))
        }
    }

    fn run(dir: &Path, work: Option<PathBuf>, jobs: usize) -> PipelineOutput {
        run_with(Gateway::stub(), dir, work, jobs).unwrap()
    }

    fn run_with(
        gateway: Gateway,
        dir: &Path,
        work: Option<PathBuf>,
        jobs: usize,
    ) -> Result<PipelineOutput, LexiconError> {
        let pages = PageSource::new(Box::new(FixtureBackend::new(dir.into())), None);
        let ctx = PipelineContext {
            gateway: &gateway,
            pages: &pages,
            work_dir: work,
            jobs,
            provider_label: "stub".into(),
            temperature: None,
        };
        run_pipeline(&config(), &ctx)
    }

    #[test]
    fn end_to_end_stub_is_stable_across_jobs() {
        let dir = fixture_pages();
        let one = run(dir.path(), None, 1);
        let four = run(dir.path(), None, 4);
        assert_eq!(one.lexicon, four.lexicon);
        assert_eq!(one.metadata, four.metadata);
        assert_eq!(one.metadata.counts.searched_titles, 2);
        assert_eq!(one.metadata.counts.kept_pages, 2);
        assert!(one.lexicon.keywords().any(|k| k == "Gaza Strip"));
        // ranked
        let imps: Vec<f64> = one.lexicon.entries.iter().map(|e| e.importance).collect();
        assert!(imps.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn resumes_from_stage_files() {
        let dir = fixture_pages();
        let work = tempfile::tempdir().unwrap();
        let first = run(dir.path(), Some(work.path().into()), 2);
        assert!(work.path().join("generic_filter.json").exists());
        // Every provider-backed stage is on disk, so a dead provider is fine.
        let down = || {
            Gateway::new(
                Box::new(Down),
                crate::llm_gateway::RetryPolicy { max_retries: 0, base_delay_ms: 0, max_delay_ms: 0 },
            )
        };
        let second = run_with(down(), dir.path(), Some(work.path().into()), 2).unwrap();
        assert_eq!(first.lexicon, second.lexicon);
        assert_eq!(first.metadata, second.metadata);

        let err = run_with(down(), dir.path(), None, 2).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::FilterPages));
    }

    #[test]
    fn lexicon_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.json");
        let mut k = corpus("Hamas", 7.5);
        k.pages.insert("A".into());
        write_lexicon(&path, &[k.clone()]).unwrap();
        assert_eq!(read_lexicon(&path).unwrap(), vec![k]);
        fs::write(&path, r#"["Zionism", "antisemitism"]"#).unwrap();
        assert_eq!(read_lexicon(&path).unwrap()[1].keyword, "antisemitism");
    }
}
