//! Token normalization shared by keyword containment and title matching.
//!
//! A keyword or title is lowercased and split on runs of non-alphanumeric
//! characters, so `"2023 Israel-Hamas war"` becomes
//! `["2023", "israel", "hamas", "war"]`.

/// Lowercase `text` and split it on runs of non-alphanumeric characters.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalized tokens joined with single spaces and padded with a leading and
/// trailing space, so that substring search over two such strings is the
/// same as contiguous token-subsequence search.
pub fn padded_normal_form(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push(' ');
    let mut in_token = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
            in_token = true;
        } else if in_token {
            out.push(' ');
            in_token = false;
        }
    }
    if in_token {
        out.push(' ');
    }
    out
}

/// True iff `needle` occurs as a contiguous run inside `haystack`.
/// An empty needle is never contained.
pub fn contains_token_run(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Number of whitespace-delimited words.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(
            normalize_tokens("2023 Israel-Hamas war"),
            vec!["2023", "israel", "hamas", "war"]
        );
        assert_eq!(normalize_tokens("  --  "), Vec::<String>::new());
        assert_eq!(normalize_tokens("Re'im"), vec!["re", "im"]);
    }

    #[test]
    fn padded_form_agrees_with_tokens() {
        for s in ["UN debates west bank policy", "", "!!", "Gaza", "a-b  c."] {
            let toks = normalize_tokens(s);
            let expected = if toks.is_empty() {
                " ".to_string()
            } else {
                format!(" {} ", toks.join(" "))
            };
            assert_eq!(padded_normal_form(s), expected, "input {s:?}");
        }
    }

    #[test]
    fn token_runs() {
        let hay = normalize_tokens("a b c");
        assert!(contains_token_run(&hay, &normalize_tokens("b c")));
        assert!(!contains_token_run(&hay, &normalize_tokens("a c")));
        assert!(!contains_token_run(&hay, &[]));
    }
}
