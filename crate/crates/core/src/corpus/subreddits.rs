use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{CorpusError, TitleMatcher};
use crate::ingest::SubmissionRecord;

/// Communities primarily devoted to the conflict; collected wholesale.
pub const REFERENCE_CENTRIC_SUBREDDITS: [&str; 25] = [
    "Palestine",
    "IsraelPalestine",
    "AskMiddleEast",
    "IsraelHamasWar",
    "islam",
    "israelexposed",
    "exmuslim",
    "Jewish",
    "Judaism",
    "IsraelCrimes",
    "Palestinian_Violence",
    "AntiSemitismInReddit",
    "IsraelWarVideoReport",
    "IsraelUnderAttack",
    "Israel_Palestine",
    "IsraelICYMI",
    "IsraelWar",
    "IsrealPalestineWar_23",
    "MuslimLounge",
    "Muslim",
    "Gaza",
    "MuslimCorner",
    "IsraelVsHamas",
    "Israel",
    "PalestinianvsIsrael",
];

/// General communities with frequent topical content; only matching
/// submissions are collected. Includes "Judaism", which also appears in the
/// centric table.
pub const REFERENCE_INCLUSIVE_SUBREDDITS: [&str; 75] = [
    "AutoNewspaper",
    "worldnews",
    "news",
    "brasilnoticias",
    "AskReddit",
    "Destiny",
    "2ndYomKippurWar",
    "CombatFootage",
    "DisneyNewsfeed",
    "TrendingQuickTVnews",
    "Conservative",
    "BreakingNews24hr",
    "conspiracy",
    "EndlessWar",
    "PublicFreakout",
    "politics",
    "NoStupidQuestions",
    "SeenOnNews_longtail",
    "NBCauto",
    "raceplay",
    "FreeKarma4You",
    "europe",
    "NoFilterNews",
    "worldnewsvideo",
    "TheDeprogram",
    "Mexico_Videos",
    "dirtyr4r",
    "FRANCE24auto",
    "Ernesto_it",
    "honestheadlinenews",
    "conservatives",
    "N_N_N",
    "Judaism",
    "socialism",
    "Hasan_Piker",
    "TrendsNewsWorld",
    "NewsWhatever",
    "ItaliaBox",
    "VaushV",
    "theworldnews",
    "TopMindsOfReddit",
    "TIMESINDIAauto",
    "NonCredibleDefense",
    "rustjob",
    "CNNauto",
    "explainlikeimfive",
    "NewsOfTheStupid",
    "ReactJSJobs",
    "anime_titties",
    "therewasanattempt",
    "ukpolitics",
    "lebanon",
    "ALJAZEERAauto",
    "NYTauto",
    "BBCauto",
    "golangjob",
    "TWTauto",
    "geopolitics",
    "h3h3productions",
    "redscarepod",
    "GUARDIANauto",
    "TheMajorityReport",
    "worldpolitics2",
    "FOXauto",
    "war",
    "NewIran",
    "LabourUK",
    "canada",
    "JavaScriptJob",
    "telaviv",
    "Britain",
    "india",
    "neoliberal",
    "chomsky",
    "infomoney",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubredditCategory {
    Centric,
    Inclusive,
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubredditProfile {
    pub name: String,
    pub matched_submissions: u64,
    pub total_submissions_seen: u64,
    /// Unset until [`classify_subreddits`] runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<SubredditCategory>,
}

impl SubredditProfile {
    pub fn match_ratio(&self) -> f64 {
        if self.total_submissions_seen == 0 {
            0.0
        } else {
            self.matched_submissions as f64 / self.total_submissions_seen as f64
        }
    }
}

/// The two-list subreddit configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubredditLists {
    pub centric: Vec<String>,
    pub inclusive: Vec<String>,
}

impl Default for SubredditLists {
    /// The reference tables, with names already listed as centric removed
    /// from the inclusive list so the two lists are disjoint.
    fn default() -> Self {
        let centric: Vec<String> = REFERENCE_CENTRIC_SUBREDDITS.iter().map(|s| s.to_string()).collect();
        let inclusive = REFERENCE_INCLUSIVE_SUBREDDITS
            .iter()
            .filter(|s| !centric.iter().any(|c| c.eq_ignore_ascii_case(s)))
            .map(|s| s.to_string())
            .collect();
        Self { centric, inclusive }
    }
}

impl SubredditLists {
    /// Case-insensitive name → category lookup. Fails when a name appears in
    /// both lists.
    pub fn classifier(&self) -> Result<SubredditClassifier, CorpusError> {
        let mut map = HashMap::new();
        for name in &self.centric {
            map.insert(name.to_lowercase(), SubredditCategory::Centric);
        }
        let mut overlap: Vec<String> = self
            .inclusive
            .iter()
            .filter(|n| map.get(&n.to_lowercase()) == Some(&SubredditCategory::Centric))
            .cloned()
            .collect();
        if !overlap.is_empty() {
            overlap.sort();
            overlap.dedup();
            return Err(CorpusError::OverlappingLists(overlap));
        }
        for name in &self.inclusive {
            map.insert(name.to_lowercase(), SubredditCategory::Inclusive);
        }
        Ok(SubredditClassifier { map })
    }
}

#[derive(Debug, Clone)]
pub struct SubredditClassifier {
    map: HashMap<String, SubredditCategory>,
}

impl SubredditClassifier {
    pub fn category(&self, subreddit: &str) -> SubredditCategory {
        if let Some(c) = self.map.get(subreddit) {
            return *c;
        }
        self.map
            .get(&subreddit.to_lowercase())
            .copied()
            .unwrap_or(SubredditCategory::Excluded)
    }
}

/// Per-subreddit match tallies, sorted by matched count descending with
/// ties broken by name.
#[derive(Debug, Clone, Default)]
pub struct SubredditTally {
    counts: HashMap<String, (u64, u64)>,
}

impl SubredditTally {
    pub fn add(&mut self, subreddit: &str, matched: bool) {
        let entry = match self.counts.get_mut(subreddit) {
            Some(e) => e,
            None => self.counts.entry(subreddit.to_string()).or_default(),
        };
        entry.0 += matched as u64;
        entry.1 += 1;
    }

    pub fn merge(&mut self, other: SubredditTally) {
        for (name, (m, t)) in other.counts {
            let e = self.counts.entry(name).or_default();
            e.0 += m;
            e.1 += t;
        }
    }

    pub fn into_profiles(self) -> Vec<SubredditProfile> {
        let mut out: Vec<SubredditProfile> = self
            .counts
            .into_iter()
            .map(|(name, (matched, total))| SubredditProfile {
                name,
                matched_submissions: matched,
                total_submissions_seen: total,
                category: None,
            })
            .collect();
        sort_profiles(&mut out);
        out
    }
}

fn sort_profiles(profiles: &mut [SubredditProfile]) {
    profiles.sort_by(|a, b| {
        b.matched_submissions
            .cmp(&a.matched_submissions)
            .then_with(|| a.name.cmp(&b.name))
    });
}

pub fn rank_subreddits<I>(submissions: I, matcher: &TitleMatcher) -> Vec<SubredditProfile>
where
    I: IntoIterator<Item = SubmissionRecord>,
{
    let mut tally = SubredditTally::default();
    for s in submissions {
        tally.add(&s.subreddit, matcher.is_match(&s.title));
    }
    tally.into_profiles()
}

/// Assign each profile its configured category; unknown names are excluded.
pub fn classify_subreddits(
    mut profiles: Vec<SubredditProfile>,
    lists: &SubredditLists,
) -> Result<Vec<SubredditProfile>, CorpusError> {
    let classifier = lists.classifier()?;
    for p in &mut profiles {
        p.category = Some(classifier.category(&p.name));
    }
    Ok(profiles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuggestOptions {
    /// Match ratio at or above which a subreddit is proposed as centric.
    pub centric_ratio: f64,
    /// Subreddits with fewer matches are not proposed at all.
    pub min_matched: u64,
    pub max_centric: usize,
    pub max_inclusive: usize,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        Self {
            centric_ratio: 0.5,
            min_matched: 10,
            max_centric: 25,
            max_inclusive: 75,
        }
    }
}

/// Draft lists for human review: high-ratio subreddits as centric, the
/// remaining top matchers as inclusive. Never applied automatically.
pub fn suggest_lists(profiles: &[SubredditProfile], options: &SuggestOptions) -> SubredditLists {
    let mut ranked: Vec<&SubredditProfile> = profiles
        .iter()
        .filter(|p| p.matched_submissions >= options.min_matched.max(1))
        .collect();
    ranked.sort_by(|a, b| {
        b.matched_submissions
            .cmp(&a.matched_submissions)
            .then_with(|| a.name.cmp(&b.name))
    });
    let mut centric = Vec::new();
    let mut inclusive = Vec::new();
    for p in ranked {
        if p.match_ratio() >= options.centric_ratio && centric.len() < options.max_centric {
            centric.push(p.name.clone());
        } else if inclusive.len() < options.max_inclusive {
            inclusive.push(p.name.clone());
        }
    }
    SubredditLists { centric, inclusive }
}

/// Category totals across profiles, for reporting.
pub fn category_totals(profiles: &[SubredditProfile]) -> BTreeMap<SubredditCategory, u64> {
    let mut out = BTreeMap::new();
    for p in profiles {
        if let Some(c) = p.category {
            *out.entry(c).or_default() += p.total_submissions_seen;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(id: &str, subreddit: &str, title: &str) -> SubmissionRecord {
        SubmissionRecord {
            id: id.into(),
            subreddit: subreddit.into(),
            title: title.into(),
            selftext: String::new(),
            author: String::new(),
            created_utc: 1,
            score: 0,
            num_comments: 0,
        }
    }

    #[test]
    fn tallies_and_order() {
        let m = TitleMatcher::new(["Gaza"]).unwrap();
        let subs = vec![
            sub("1", "news", "Gaza update"),
            sub("2", "news", "weather"),
            sub("3", "news", "sports"),
            sub("4", "Palestine", "Gaza aid"),
            sub("5", "Palestine", "Gaza map"),
            sub("6", "Palestine", "Gaza photo"),
        ];
        let p = rank_subreddits(subs, &m);
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].name.as_str(), p[0].matched_submissions, p[0].total_submissions_seen), ("Palestine", 3, 3));
        assert_eq!((p[1].name.as_str(), p[1].matched_submissions, p[1].total_submissions_seen), ("news", 1, 3));
        assert_eq!(p.iter().map(|x| x.matched_submissions).sum::<u64>(), 4);
    }

    #[test]
    fn empty_stream() {
        let m = TitleMatcher::new(["Gaza"]).unwrap();
        assert!(rank_subreddits(Vec::new(), &m).is_empty());
    }

    #[test]
    fn ties_by_name() {
        let m = TitleMatcher::new(["x"]).unwrap();
        let p = rank_subreddits(vec![sub("1", "b", "x"), sub("2", "a", "x")], &m);
        assert_eq!(p[0].name, "a");
    }

    #[test]
    fn default_lists() {
        assert_eq!(REFERENCE_CENTRIC_SUBREDDITS.len(), 25);
        assert_eq!(REFERENCE_INCLUSIVE_SUBREDDITS.len(), 75);
        let lists = SubredditLists::default();
        assert_eq!(lists.centric.len(), 25);
        assert_eq!(lists.inclusive.len(), 74);
        let c = lists.classifier().unwrap();
        assert_eq!(c.category("IsraelPalestine"), SubredditCategory::Centric);
        assert_eq!(c.category("worldnews"), SubredditCategory::Inclusive);
        assert_eq!(c.category("WorldNews"), SubredditCategory::Inclusive);
        assert_eq!(c.category("gardening"), SubredditCategory::Excluded);
        assert_eq!(c.category("Judaism"), SubredditCategory::Centric);
    }

    #[test]
    fn overlapping_lists_rejected() {
        let lists = SubredditLists {
            centric: vec!["Gaza".into()],
            inclusive: vec!["news".into(), "gaza".into()],
        };
        match lists.classifier() {
            Err(CorpusError::OverlappingLists(names)) => assert_eq!(names, vec!["gaza".to_string()]),
            other => panic!("{other:?}"),
        }
        let verbatim = SubredditLists {
            centric: REFERENCE_CENTRIC_SUBREDDITS.iter().map(|s| s.to_string()).collect(),
            inclusive: REFERENCE_INCLUSIVE_SUBREDDITS.iter().map(|s| s.to_string()).collect(),
        };
        assert!(matches!(verbatim.classifier(), Err(CorpusError::OverlappingLists(n)) if n == ["Judaism"]));
    }

    #[test]
    fn classify_sets_every_category() {
        let profiles = vec![
            SubredditProfile { name: "IsraelPalestine".into(), matched_submissions: 5, total_submissions_seen: 5, category: None },
            SubredditProfile { name: "worldnews".into(), matched_submissions: 4, total_submissions_seen: 90, category: None },
            SubredditProfile { name: "gardening".into(), matched_submissions: 0, total_submissions_seen: 9, category: None },
        ];
        let out = classify_subreddits(profiles, &SubredditLists::default()).unwrap();
        let cats: Vec<_> = out.iter().map(|p| p.category.unwrap()).collect();
        assert_eq!(cats, [SubredditCategory::Centric, SubredditCategory::Inclusive, SubredditCategory::Excluded]);
        let totals = category_totals(&out);
        assert_eq!(totals[&SubredditCategory::Inclusive], 90);
    }

    #[test]
    fn suggester_drafts() {
        let profiles = vec![
            SubredditProfile { name: "a".into(), matched_submissions: 50, total_submissions_seen: 60, category: None },
            SubredditProfile { name: "b".into(), matched_submissions: 80, total_submissions_seen: 1000, category: None },
            SubredditProfile { name: "c".into(), matched_submissions: 2, total_submissions_seen: 2, category: None },
        ];
        let draft = suggest_lists(&profiles, &SuggestOptions::default());
        assert_eq!(draft.centric, vec!["a"]);
        assert_eq!(draft.inclusive, vec!["b"]);
    }
}
