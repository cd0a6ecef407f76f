//! Parsers for the three response shapes: a YES/NO verdict, a
//! `keyword: score` list, and a plain keyword list.

use serde::{Deserialize, Serialize};

use super::ParseError;

pub const MIN_SCORE: f64 = 0.0;
pub const MAX_SCORE: f64 = 5.0;
pub const MAX_KEYWORD_TOKENS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredKeyword {
    pub keyword: String,
    pub importance: f64,
}

/// Ordered `(keyword, importance)` pairs with importance in `[0, 5]` and
/// keywords of one to three whitespace tokens.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoredKeywordList {
    pub entries: Vec<ScoredKeyword>,
}

impl ScoredKeywordList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredKeyword> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedKeywords {
    pub list: ScoredKeywordList,
    /// Pairs dropped because the score was not a finite number, the colon
    /// was missing, or the keyword was empty or longer than three tokens.
    pub skipped: usize,
}

/// The first alphabetic token decides: `yes` is true, `no` is false.
pub fn parse_yes_no(text: &str) -> Result<bool, ParseError> {
    let token: String = text
        .chars()
        .skip_while(|c| !c.is_alphabetic())
        .take_while(|c| c.is_alphabetic())
        .collect::<String>()
        .to_lowercase();
    match token.as_str() {
        "yes" => Ok(true),
        "no" => Ok(false),
        _ => Err(ParseError::UnparseableVerdict(snippet(text))),
    }
}

pub fn parse_scored_keywords(text: &str) -> Result<ParsedKeywords, ParseError> {
    let mut entries = Vec::new();
    let mut skipped = 0;
    for piece in text.split([',', '\n']) {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let Some((keyword, score)) = piece.rsplit_once(':') else {
            skipped += 1;
            continue;
        };
        let keyword = trim_quotes(keyword.trim());
        let score = match trim_quotes(score.trim()).parse::<f64>() {
            Ok(s) if s.is_finite() => s,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let tokens = keyword.split_whitespace().count();
        if tokens == 0 || tokens > MAX_KEYWORD_TOKENS {
            skipped += 1;
            continue;
        }
        entries.push(ScoredKeyword {
            keyword: keyword.to_string(),
            importance: score.clamp(MIN_SCORE, MAX_SCORE),
        });
    }
    if entries.is_empty() {
        return Err(ParseError::EmptyResult);
    }
    Ok(ParsedKeywords {
        list: ScoredKeywordList { entries },
        skipped,
    })
}

/// Inverse of [`parse_scored_keywords`] for well-formed lists.
pub fn format_scored_keywords(list: &ScoredKeywordList) -> String {
    list.entries
        .iter()
        .map(|e| format!("{}: {}", e.keyword, e.importance))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Comma- or line-separated keywords, with bullets and numbering removed.
/// Case is preserved.
pub fn parse_keyword_list(text: &str) -> Result<Vec<String>, ParseError> {
    let keywords: Vec<String> = text
        .split([',', '\n'])
        .map(|item| trim_quotes(strip_list_marker(item.trim())).trim().to_string())
        .filter(|item| !item.is_empty())
        .collect();
    if keywords.is_empty() {
        return Err(ParseError::EmptyResult);
    }
    Ok(keywords)
}

fn strip_list_marker(item: &str) -> &str {
    let item = item.trim_start_matches(['-', '*', '•', '+', '–']).trim_start();
    let digits = item.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &item[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                return rest.trim_start();
            }
        }
    }
    item
}

fn trim_quotes(s: &str) -> &str {
    s.trim_matches(|c| c == '"' || c == '\'' || c == '`')
}

fn snippet(text: &str) -> String {
    text.chars().take(80).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn verdicts() {
        assert!(parse_yes_no("YES").unwrap());
        assert!(!parse_yes_no("no.").unwrap());
        assert!(parse_yes_no("  **Yes**, it is").unwrap());
        assert!(matches!(
            parse_yes_no("The page is related"),
            Err(ParseError::UnparseableVerdict(_))
        ));
        assert!(parse_yes_no("").is_err());
        assert!(parse_yes_no("nope").is_err());
    }

    #[test]
    fn scored_pairs_in_order() {
        let parsed = parse_scored_keywords("hamas: 5, gaza strip: 4").unwrap();
        assert_eq!(
            parsed.list.entries,
            vec![
                ScoredKeyword { keyword: "hamas".into(), importance: 5.0 },
                ScoredKeyword { keyword: "gaza strip".into(), importance: 4.0 },
            ]
        );
        assert_eq!(parsed.skipped, 0);
    }

    #[test]
    fn empty_input_is_empty_result() {
        assert_eq!(parse_scored_keywords(""), Err(ParseError::EmptyResult));
        assert_eq!(parse_scored_keywords("x: high"), Err(ParseError::EmptyResult));
    }

    #[test]
    fn scores_are_clamped() {
        let parsed = parse_scored_keywords("a: 9, b: 3, c: -1").unwrap();
        let scores: Vec<f64> = parsed.list.iter().map(|e| e.importance).collect();
        assert_eq!(scores, vec![5.0, 3.0, 0.0]);
    }

    #[test]
    fn malformed_pairs_are_counted() {
        let parsed =
            parse_scored_keywords("ok: 2, bad: lots, nocolon, : 3, one two three four: 1, x: NaN")
                .unwrap();
        assert_eq!(parsed.list.len(), 1);
        assert_eq!(parsed.skipped, 5);
    }

    #[test]
    fn splits_on_last_colon() {
        let parsed = parse_scored_keywords("Operation: Iron: 3").unwrap();
        assert_eq!(parsed.list.entries[0].keyword, "Operation: Iron");
        assert_eq!(parsed.list.entries[0].importance, 3.0);
    }

    #[test]
    fn fractional_scores_accepted() {
        let parsed = parse_scored_keywords("ceasefire: 3.5").unwrap();
        assert_eq!(parsed.list.entries[0].importance, 3.5);
    }

    #[test]
    fn keyword_lists() {
        assert_eq!(parse_keyword_list("Hamas, Gaza, IDF").unwrap(), vec!["Hamas", "Gaza", "IDF"]);
        assert_eq!(parse_keyword_list("- Hamas\n- Gaza").unwrap(), vec!["Hamas", "Gaza"]);
        assert_eq!(
            parse_keyword_list("1. Hamas\n2) West Bank\n* 9/11\n").unwrap(),
            vec!["Hamas", "West Bank", "9/11"]
        );
        assert_eq!(
            parse_keyword_list("2023 Israel-Hamas war").unwrap(),
            vec!["2023 Israel-Hamas war"]
        );
        assert_eq!(parse_keyword_list(""), Err(ParseError::EmptyResult));
        assert_eq!(parse_keyword_list(" \n - \n"), Err(ParseError::EmptyResult));
    }

    fn keyword_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec("[A-Za-z0-9]([A-Za-z0-9'\\-:]{0,6}[A-Za-z0-9])?", 1..=3).prop_map(|t| t.join(" "))
    }

    fn list_strategy() -> impl Strategy<Value = ScoredKeywordList> {
        proptest::collection::vec((keyword_strategy(), 0.0f64..=5.0), 1..12).prop_map(|v| {
            ScoredKeywordList {
                entries: v
                    .into_iter()
                    .map(|(keyword, importance)| ScoredKeyword { keyword, importance })
                    .collect(),
            }
        })
    }

    proptest! {
        #[test]
        fn format_then_parse_round_trips(list in list_strategy()) {
            let parsed = parse_scored_keywords(&format_scored_keywords(&list)).unwrap();
            prop_assert_eq!(parsed.list, list);
            prop_assert_eq!(parsed.skipped, 0);
        }

        #[test]
        fn parsed_scores_always_bounded(text in ".{0,200}") {
            if let Ok(parsed) = parse_scored_keywords(&text) {
                for e in parsed.list.iter() {
                    prop_assert!((MIN_SCORE..=MAX_SCORE).contains(&e.importance));
                    prop_assert!(!e.keyword.trim().is_empty());
                    prop_assert!(e.keyword.split_whitespace().count() <= MAX_KEYWORD_TOKENS);
                }
            }
        }
    }
}
