//! Keyword score aggregation: mean across the chunks of a page, sum across
//! pages, then rank.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::llm_gateway::ScoredKeywordList;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageKeyword {
    pub keyword: String,
    pub page_title: String,
    /// Mean of this keyword's chunk-level scores on the page.
    pub importance: f64,
    pub chunk_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusKeyword {
    pub keyword: String,
    /// Sum of the per-page importances.
    pub importance: f64,
    pub pages: BTreeSet<String>,
}

/// Keywords are identified case-insensitively.
pub fn keyword_key(keyword: &str) -> String {
    keyword.trim().to_lowercase()
}

/// Merge chunk-level scores for one page. A keyword listed twice in the
/// same chunk counts once, with its first score. The surface form of the
/// first occurrence is kept, and output follows first-occurrence order.
pub fn merge_page_keywords(page_title: &str, chunks: &[ScoredKeywordList]) -> Vec<PageKeyword> {
    struct Acc {
        surface: String,
        sum: f64,
        hits: usize,
    }
    let mut order: Vec<String> = Vec::new();
    let mut accs: HashMap<String, Acc> = HashMap::new();
    for chunk in chunks {
        let mut seen_in_chunk = BTreeSet::new();
        for entry in chunk.iter() {
            let key = keyword_key(&entry.keyword);
            if !seen_in_chunk.insert(key.clone()) {
                continue;
            }
            let acc = accs.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                Acc { surface: entry.keyword.trim().to_string(), sum: 0.0, hits: 0 }
            });
            acc.sum += entry.importance;
            acc.hits += 1;
        }
    }
    order
        .into_iter()
        .map(|key| {
            let acc = &accs[&key];
            PageKeyword {
                keyword: acc.surface.clone(),
                page_title: page_title.to_string(),
                importance: acc.sum / acc.hits as f64,
                chunk_hits: acc.hits,
            }
        })
        .collect()
}

/// Sum page importances per keyword and keep the `top_n` largest.
///
/// Inputs are processed in (page title, keyword) order, so the result does
/// not depend on how pages were ordered or which worker finished first.
/// The display form comes from the first page in that order. Ties on
/// importance are broken by the lowercase keyword.
pub fn aggregate_corpus(page_keywords: &[PageKeyword], top_n: usize) -> Vec<CorpusKeyword> {
    let mut ranked = sum_across_pages(page_keywords);
    ranked.sort_by(rank_order);
    ranked.truncate(top_n);
    ranked
}

/// All corpus keywords, unranked and uncut.
pub fn sum_across_pages(page_keywords: &[PageKeyword]) -> Vec<CorpusKeyword> {
    let mut canonical: Vec<&PageKeyword> = page_keywords.iter().collect();
    canonical.sort_by(|a, b| {
        a.page_title
            .cmp(&b.page_title)
            .then_with(|| keyword_key(&a.keyword).cmp(&keyword_key(&b.keyword)))
            .then_with(|| a.keyword.cmp(&b.keyword))
            .then_with(|| a.importance.total_cmp(&b.importance))
    });
    let mut by_key: BTreeMap<String, CorpusKeyword> = BTreeMap::new();
    for pk in canonical {
        let entry = by_key.entry(keyword_key(&pk.keyword)).or_insert_with(|| CorpusKeyword {
            keyword: pk.keyword.trim().to_string(),
            importance: 0.0,
            pages: BTreeSet::new(),
        });
        entry.importance += pk.importance;
        entry.pages.insert(pk.page_title.clone());
    }
    by_key.into_values().collect()
}

/// Importance descending, then lowercase keyword, then surface form.
pub fn rank_order(a: &CorpusKeyword, b: &CorpusKeyword) -> Ordering {
    b.importance
        .total_cmp(&a.importance)
        .then_with(|| keyword_key(&a.keyword).cmp(&keyword_key(&b.keyword)))
        .then_with(|| a.keyword.cmp(&b.keyword))
}
