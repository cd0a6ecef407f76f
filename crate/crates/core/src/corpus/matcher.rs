use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};

use super::CorpusError;
use crate::text::{contains_token_run, normalize_tokens, padded_normal_form};

/// Single-pass multi-keyword title matcher.
///
/// Keywords and titles are reduced to padded normal form (`" gaza strip "`),
/// so one automaton scan over the title finds every keyword occurring as a
/// contiguous token run. "Hamas" does not fire inside "Bahamas".
#[derive(Debug, Clone)]
pub struct TitleMatcher {
    automaton: AhoCorasick,
    keywords: Vec<String>,
}

impl TitleMatcher {
    /// Keywords without alphanumeric tokens are ignored; at least one must
    /// remain.
    pub fn new<I, S>(keywords: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut patterns: Vec<String> = Vec::new();
        let mut surfaces: Vec<String> = Vec::new();
        for k in keywords {
            let k = k.as_ref();
            let padded = padded_normal_form(k);
            if padded.trim().is_empty() || patterns.contains(&padded) {
                continue;
            }
            patterns.push(padded);
            surfaces.push(k.to_string());
        }
        if patterns.is_empty() {
            return Err(CorpusError::EmptyLexicon);
        }
        let automaton = AhoCorasickBuilder::new()
            .match_kind(MatchKind::Standard)
            .build(&patterns)
            .map_err(|e| CorpusError::InvalidConfig(format!("keyword automaton: {e}")))?;
        Ok(Self {
            automaton,
            keywords: surfaces,
        })
    }

    /// Distinct keywords, in first-seen order.
    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn is_match(&self, title: &str) -> bool {
        self.automaton.is_match(&padded_normal_form(title))
    }

    /// Every keyword occurring in `title`, in keyword order.
    pub fn matched_keywords(&self, title: &str) -> Vec<&str> {
        let hay = padded_normal_form(title);
        let mut hit = vec![false; self.keywords.len()];
        for m in self.automaton.find_overlapping_iter(&hay) {
            hit[m.pattern().as_usize()] = true;
        }
        self.keywords
            .iter()
            .zip(hit)
            .filter_map(|(k, h)| h.then_some(k.as_str()))
            .collect()
    }
}

/// Reference matcher: one token-run scan per keyword.
pub fn naive_title_match<S: AsRef<str>>(title: &str, keywords: &[S]) -> bool {
    let title = normalize_tokens(title);
    keywords.iter().any(|k| contains_token_run(&title, &normalize_tokens(k.as_ref())))
}
