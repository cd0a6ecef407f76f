//! Prompt templates for page filtering, keyword extraction and keyword
//! filtering. Placeholders are written `[name]`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    PageFilter,
    KeywordExtract,
    KeywordFilter,
}

impl TemplateId {
    pub const ALL: [TemplateId; 3] = [
        TemplateId::PageFilter,
        TemplateId::KeywordExtract,
        TemplateId::KeywordFilter,
    ];

    pub fn template(self) -> &'static PromptTemplate {
        match self {
            TemplateId::PageFilter => &PAGE_FILTER,
            TemplateId::KeywordExtract => &KEYWORD_EXTRACT,
            TemplateId::KeywordFilter => &KEYWORD_FILTER,
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TemplateId::PageFilter => "page_filter",
            TemplateId::KeywordExtract => "keyword_extract",
            TemplateId::KeywordFilter => "keyword_filter",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: &'static str,
    /// Placeholder names in order of first appearance in `body`.
    pub placeholders: &'static [&'static str],
}

pub static PAGE_FILTER: PromptTemplate = PromptTemplate {
    id: TemplateId::PageFilter,
    body: "Evaluate the content of the Wikipedia page titled [page_name] to determine if it is \
related to [topic]. Consider the page name and the first 100 words of the content. Output only \
YES if the content is related to the war; otherwise, output NO.\n\
First 100 words: [first_100_words]",
    placeholders: &["page_name", "topic", "first_100_words"],
};

pub static KEYWORD_EXTRACT: PromptTemplate = PromptTemplate {
    id: TemplateId::KeywordExtract,
    body: "Please analyze the provided text chunk from the Wikipedia page about [topic]. Your task \
is to extract keywords that are directly related to this topic. Each keyword should be no longer \
than three tokens. After identifying these keywords, evaluate their importance for the purpose of \
social media message filtration. Rate each keyword's importance on a scale from 0 to 5, where 0 \
means the keyword is least important and 5 means it is extremely important for filtering \
messages. Present the output as a list of keyword-importance pairs, separated by commas. Format \
each pair with the keyword followed by a colon and its importance rating. For example, \
\"keyword1: 4, keyword2: 2\". The output should be a continuous string text without any line \
breaks or bullet points.\n\
Text: [text]",
    placeholders: &["topic", "text"],
};

pub static KEYWORD_FILTER: PromptTemplate = PromptTemplate {
    id: TemplateId::KeywordFilter,
    body: "Please filter the provided list of keywords based on the following criteria:\n\
1. Exclude any keywords that are names of countries or presidents.\n\
2. Exclude any keywords that are names of news organizations or social media platforms, such as \
\"TikTok\" or \"BBC\".\n\
3. In the list, if a keyword contains another keyword, remove the longer keyword. For example, if \
the list includes both \"2023 Israel-Hamas war\" and \"Hamas\", remove \"2023 Israel-Hamas war\".\n\
Your task is to process the list and return a filtered set of keywords that meet these criteria. \
Please present the filtered keywords in a list format.\n\
Keyword list: [keyword_list]",
    placeholders: &["keyword_list"],
};

impl PromptTemplate {
    /// Substitute every placeholder with its value in a single left-to-right
    /// pass, so values that happen to contain `[...]` are never re-expanded.
    pub fn render(&self, variables: &BTreeMap<String, String>) -> Result<String, GatewayError> {
        if let Some(missing) = self
            .placeholders
            .iter()
            .find(|name| !variables.contains_key(**name))
        {
            return Err(GatewayError::MissingVariable(missing.to_string()));
        }

        let mut out = String::with_capacity(self.body.len() + 256);
        let mut rest = self.body;
        while let Some(open) = rest.find('[') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match after.find(']') {
                Some(close) if self.placeholders.contains(&&after[..close]) => {
                    out.push_str(&variables[&after[..close]]);
                    rest = &after[close + 1..];
                }
                _ => {
                    out.push('[');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Render a template by id.
pub fn render(id: TemplateId, variables: &BTreeMap<String, String>) -> Result<String, GatewayError> {
    id.template().render(variables)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn page_filter_contains_verdict_instruction() {
        let text = render(
            TemplateId::PageFilter,
            &vars(&[
                ("page_name", "Gaza War"),
                ("topic", "Israel-Hamas war"),
                ("first_100_words", "..."),
            ]),
        )
        .unwrap();
        assert!(text.contains("Output only YES"));
        assert!(text.contains("titled Gaza War to determine"));
        assert!(text.ends_with("First 100 words: ..."));
    }

    #[test]
    fn empty_text_section() {
        let text = render(TemplateId::KeywordExtract, &vars(&[("topic", "X"), ("text", "")])).unwrap();
        assert!(text.ends_with("\nText: "));
        assert!(text.contains("Wikipedia page about X."));
    }

    #[test]
    fn incomplete_map_names_first_missing() {
        let err = render(TemplateId::PageFilter, &vars(&[("page_name", "A")])).unwrap_err();
        assert!(matches!(err, GatewayError::MissingVariable(ref n) if n == "topic"));
    }

    #[test]
    fn no_unresolved_markers_after_render() {
        for id in TemplateId::ALL {
            let t = id.template();
            let v: BTreeMap<_, _> = t
                .placeholders
                .iter()
                .map(|p| (p.to_string(), "[page_name] value".to_string()))
                .collect();
            let text = t.render(&v).unwrap();
            for p in t.placeholders {
                // Only the injected value text may mention a marker.
                let expected = text.matches("[page_name] value").count();
                let markers = text.matches(&format!("[{p}]")).count();
                assert!(markers <= expected, "{id}: unresolved [{p}]");
            }
        }
    }

    #[test]
    fn placeholders_listed_in_body_order() {
        for id in TemplateId::ALL {
            let t = id.template();
            let mut last = 0;
            for p in t.placeholders {
                let pos = t.body.find(&format!("[{p}]")).expect("placeholder in body");
                assert!(pos >= last);
                last = pos;
            }
        }
    }

    #[test]
    fn filter_prompt_names_the_containment_rule() {
        assert!(KEYWORD_FILTER
            .body
            .contains("remove \"2023 Israel-Hamas war\"."));
        assert!(KEYWORD_EXTRACT.body.contains("no longer than three tokens"));
    }
}
