use serde::{Deserialize, Serialize};

use crate::text::word_count;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextChunk {
    pub page_title: String,
    pub index: usize,
    pub text: String,
    /// Whitespace-delimited words in `text`.
    pub token_count: usize,
}

/// Split a page body into chunks of at most `max_chunk_tokens` words.
///
/// Paragraphs (runs of lines separated by blank lines, each keeping its
/// trailing blank lines) are packed greedily; a paragraph larger than the
/// budget is cut at word boundaries. Chunks concatenate back to `body`
/// byte-for-byte.
pub fn split_page(page_title: &str, body: &str, max_chunk_tokens: usize) -> Vec<TextChunk> {
    assert!(max_chunk_tokens >= 1, "max_chunk_tokens must be at least 1");
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    let mut cur_start = 0;
    let mut cur_end = 0;
    let mut cur_tokens = 0;

    for (seg_start, seg_end) in paragraphs(body) {
        let seg = &body[seg_start..seg_end];
        let tokens = word_count(seg);
        if cur_tokens + tokens <= max_chunk_tokens {
            cur_end = seg_end;
            cur_tokens += tokens;
            continue;
        }
        if cur_tokens > 0 {
            spans.push((cur_start, cur_end, cur_tokens));
            cur_start = cur_end;
        }
        if tokens <= max_chunk_tokens {
            cur_end = seg_end;
            cur_tokens = tokens;
            continue;
        }
        let starts = word_starts(seg);
        let mut k = max_chunk_tokens;
        while k < tokens {
            let cut = seg_start + starts[k];
            spans.push((cur_start, cut, max_chunk_tokens));
            cur_start = cut;
            k += max_chunk_tokens;
        }
        cur_end = seg_end;
        cur_tokens = tokens - (k - max_chunk_tokens);
    }
    if cur_end > cur_start {
        spans.push((cur_start, cur_end, cur_tokens));
    }

    spans
        .into_iter()
        .enumerate()
        .map(|(index, (start, end, token_count))| TextChunk {
            page_title: page_title.to_string(),
            index,
            text: body[start..end].to_string(),
            token_count,
        })
        .collect()
}

/// Byte ranges of paragraphs covering `body` exactly.
fn paragraphs(body: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut pos = 0;
    let mut has_content = false;
    let mut seen_blank = false;
    for line in body.split_inclusive('\n') {
        let blank = line.trim().is_empty();
        if !blank {
            if has_content && seen_blank {
                out.push((start, pos));
                start = pos;
                seen_blank = false;
            }
            has_content = true;
        } else if has_content {
            seen_blank = true;
        }
        pos += line.len();
    }
    if pos > start {
        out.push((start, pos));
    }
    out
}

fn word_starts(s: &str) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut prev_ws = true;
    for (i, ch) in s.char_indices() {
        let ws = ch.is_whitespace();
        if !ws && prev_ws {
            starts.push(i);
        }
        prev_ws = ws;
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(n: usize, prefix: &str) -> String {
        (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(" ")
    }

    fn concat(chunks: &[TextChunk]) -> String {
        chunks.iter().map(|c| c.text.as_str()).collect()
    }

    #[test]
    fn fits_in_one_chunk() {
        let body = words(2999, "w");
        let chunks = split_page("P", &body, 3000);
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 2999);
    }

    #[test]
    fn six_thousand_tokens() {
        // 12 paragraphs of 500 words
        let body: String = (0..12).map(|p| format!("{}\n\n", words(500, &format!("p{p}w")))).collect();
        let chunks = split_page("P", &body, 3000);
        assert!((2..=3).contains(&chunks.len()), "{} chunks", chunks.len());
        assert!(chunks.iter().all(|c| c.token_count <= 3000));
        assert_eq!(concat(&chunks), body);
        assert_eq!(chunks.iter().map(|c| c.token_count).sum::<usize>(), 6000);
    }

    #[test]
    fn single_long_paragraph_hard_split() {
        let body = words(6000, "w");
        let chunks = split_page("P", &body, 3000);
        assert_eq!(chunks.len(), 2);
        assert_eq!(concat(&chunks), body);
        assert!(chunks[1].text.starts_with("w3000"));
    }

    #[test]
    fn empty_page() {
        assert!(split_page("P", "", 3000).is_empty());
    }

    #[test]
    fn prefers_paragraph_boundaries() {
        let body = format!("{}\n\n{}\n", words(3, "a"), words(3, "b"));
        let chunks = split_page("P", &body, 4);
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].text, "a0 a1 a2\n\n");
        assert_eq!(chunks[1].text, "b0 b1 b2\n");
        assert_eq!(chunks[1].index, 1);
    }

    #[test]
    fn chunk_counts_match_text() {
        let body = "  lead\n\n\n x y z w v\nq r\n\n \n tail words here ";
        for max in 1..6 {
            let chunks = split_page("P", body, max);
            assert_eq!(concat(&chunks), body);
            for c in &chunks {
                assert_eq!(word_count(&c.text), c.token_count);
                assert!(c.token_count <= max);
            }
        }
    }

    proptest! {
        #[test]
        fn reconstruction_and_budget(
            body in "([a-z]{1,5}|[ \t]{1,2}|\n|\n\n|é){0,400}",
            max in 1usize..40,
        ) {
            let chunks = split_page("P", &body, max);
            prop_assert_eq!(concat(&chunks), body.clone());
            for (i, c) in chunks.iter().enumerate() {
                prop_assert_eq!(c.index, i);
                prop_assert!(c.token_count <= max);
                prop_assert_eq!(word_count(&c.text), c.token_count);
            }
            prop_assert_eq!(chunks.is_empty(), body.is_empty());
        }
    }
}
