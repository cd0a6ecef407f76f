use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Submission,
    Comment,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Submission => "submission",
            RecordKind::Comment => "comment",
        })
    }
}

/// A submission as it appears in the dump. Field names follow the dump
/// vocabulary, so serializing a record writes a valid dump line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSubmission")]
pub struct SubmissionRecord {
    pub id: String,
    pub subreddit: String,
    pub title: String,
    pub selftext: String,
    pub author: String,
    pub created_utc: i64,
    pub score: i64,
    pub num_comments: i64,
}

/// A comment as it appears in the dump. `link_id` and `parent_id` keep
/// their `t3_`/`t1_` prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawComment")]
pub struct CommentRecord {
    pub id: String,
    pub link_id: String,
    pub parent_id: String,
    pub body: String,
    pub author: String,
    pub created_utc: i64,
    pub score: i64,
    /// 0 or 1.
    pub controversiality: u8,
    /// Empty when the dump line carries no subreddit.
    pub subreddit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Record {
    Submission(SubmissionRecord),
    Comment(CommentRecord),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Submission(_) => RecordKind::Submission,
            Record::Comment(_) => RecordKind::Comment,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Record::Submission(s) => &s.id,
            Record::Comment(c) => &c.id,
        }
    }
}

/// Records that can be parsed from one dump line.
pub trait DumpRecord: Sized + Send {
    const KIND: RecordKind;
    fn parse_line(line: &[u8]) -> Result<Self, IngestError>;
}

impl DumpRecord for SubmissionRecord {
    const KIND: RecordKind = RecordKind::Submission;
    fn parse_line(line: &[u8]) -> Result<Self, IngestError> {
        serde_json::from_slice(line).map_err(malformed)
    }
}

impl DumpRecord for CommentRecord {
    const KIND: RecordKind = RecordKind::Comment;
    fn parse_line(line: &[u8]) -> Result<Self, IngestError> {
        serde_json::from_slice(line).map_err(malformed)
    }
}

pub fn parse_submission(line: &str) -> Result<SubmissionRecord, IngestError> {
    SubmissionRecord::parse_line(line.as_bytes())
}

pub fn parse_comment(line: &str) -> Result<CommentRecord, IngestError> {
    CommentRecord::parse_line(line.as_bytes())
}

fn malformed(e: serde_json::Error) -> IngestError {
    IngestError::MalformedRecord(e.to_string())
}

#[derive(Deserialize)]
struct RawSubmission {
    id: Option<String>,
    subreddit: Option<String>,
    title: Option<String>,
    selftext: Option<String>,
    author: Option<String>,
    #[serde(default, deserialize_with = "flexible_int")]
    created_utc: Option<i64>,
    #[serde(default, deserialize_with = "flexible_int")]
    score: Option<i64>,
    #[serde(default, deserialize_with = "flexible_int")]
    num_comments: Option<i64>,
}

impl TryFrom<RawSubmission> for SubmissionRecord {
    type Error = String;

    fn try_from(raw: RawSubmission) -> Result<Self, String> {
        Ok(SubmissionRecord {
            id: required_text(raw.id, "id")?,
            subreddit: required_text(raw.subreddit, "subreddit")?,
            title: raw.title.ok_or("missing title")?,
            selftext: raw.selftext.unwrap_or_default(),
            author: raw.author.unwrap_or_default(),
            created_utc: required_time(raw.created_utc)?,
            score: raw.score.unwrap_or(0),
            num_comments: raw.num_comments.unwrap_or(0),
        })
    }
}

#[derive(Deserialize)]
struct RawComment {
    id: Option<String>,
    link_id: Option<String>,
    parent_id: Option<String>,
    body: Option<String>,
    author: Option<String>,
    #[serde(default, deserialize_with = "flexible_int")]
    created_utc: Option<i64>,
    #[serde(default, deserialize_with = "flexible_int")]
    score: Option<i64>,
    #[serde(default, deserialize_with = "flexible_int")]
    controversiality: Option<i64>,
    subreddit: Option<String>,
}

impl TryFrom<RawComment> for CommentRecord {
    type Error = String;

    fn try_from(raw: RawComment) -> Result<Self, String> {
        let id = required_text(raw.id, "id")?;
        let link_id = required_text(raw.link_id, "link_id")?;
        let parent_id = required_text(raw.parent_id, "parent_id")?;
        let created_utc = required_time(raw.created_utc)?;
        let controversiality = match raw.controversiality.unwrap_or(0) {
            0 => 0,
            1 => 1,
            other => return Err(format!("controversiality must be 0 or 1, got {other}")),
        };
        Ok(CommentRecord {
            id,
            link_id,
            parent_id,
            body: raw.body.unwrap_or_default(),
            author: raw.author.unwrap_or_default(),
            created_utc,
            score: raw.score.unwrap_or(0),
            controversiality,
            subreddit: raw.subreddit.unwrap_or_default(),
        })
    }
}

fn required_text(value: Option<String>, field: &str) -> Result<String, String> {
    match value {
        Some(v) if !v.is_empty() => Ok(v),
        Some(_) => Err(format!("empty {field}")),
        None => Err(format!("missing {field}")),
    }
}

fn required_time(value: Option<i64>) -> Result<i64, String> {
    match value {
        Some(t) if t > 0 => Ok(t),
        Some(t) => Err(format!("created_utc must be positive, got {t}")),
        None => Err("missing created_utc".to_string()),
    }
}

/// Integers arrive as JSON integers, floats, or decimal strings depending on
/// the dump vintage. Floats are truncated toward zero; null reads as absent.
fn flexible_int<'de, D: Deserializer<'de>>(d: D) -> Result<Option<i64>, D::Error> {
    struct FlexVisitor;

    impl<'de> Visitor<'de> for FlexVisitor {
        type Value = Option<i64>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an integer, a float, or a numeric string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
            Ok(Some(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
            i64::try_from(v).map(Some).map_err(|_| E::custom("integer out of range"))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
            if v.is_finite() && v.abs() < 9.2e18 {
                Ok(Some(v.trunc() as i64))
            } else {
                Err(E::custom("number out of range"))
            }
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
            let v = v.trim();
            if let Ok(i) = v.parse::<i64>() {
                return Ok(Some(i));
            }
            match v.parse::<f64>() {
                Ok(f) => self.visit_f64(f),
                Err(_) => Err(E::custom(format!("not a number: {v:?}"))),
            }
        }

        fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_some<D2: Deserializer<'de>>(self, d: D2) -> Result<Self::Value, D2::Error> {
            d.deserialize_any(FlexVisitor)
        }
    }

    d.deserialize_option(FlexVisitor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reason(e: IngestError) -> String {
        match e {
            IngestError::MalformedRecord(r) => r,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn submission_defaults() {
        let s = parse_submission(
            r#"{"id":"x1","subreddit":"worldnews","title":"T","created_utc":1696600000}"#,
        )
        .unwrap();
        assert_eq!(s.score, 0);
        assert_eq!(s.selftext, "");
        assert_eq!(s.author, "");
        assert_eq!(s.num_comments, 0);
        assert_eq!(s.created_utc, 1_696_600_000);
    }

    #[test]
    fn submission_missing_id() {
        let r = reason(parse_submission(r#"{"title":"T"}"#).unwrap_err());
        assert!(r.contains("missing id"), "{r}");
    }

    #[test]
    fn submission_requires_each_field() {
        let full = serde_json::json!({
            "id": "a", "subreddit": "s", "title": "t", "created_utc": 5
        });
        for field in ["id", "subreddit", "title", "created_utc"] {
            let mut v = full.clone();
            v.as_object_mut().unwrap().remove(field);
            let r = reason(parse_submission(&v.to_string()).unwrap_err());
            assert!(r.contains(&format!("missing {field}")), "{r}");
        }
    }

    #[test]
    fn submission_all_fields_verbatim() {
        let line = r#"{"id":"17abc","subreddit":"IsraelPalestine","title":"Ceasefire talks resume","selftext":"Body text","author":"someone","created_utc":1697000000,"score":42,"num_comments":7,"over_18":false,"url":"https://example.org"}"#;
        let s = parse_submission(line).unwrap();
        assert_eq!(
            s,
            SubmissionRecord {
                id: "17abc".into(),
                subreddit: "IsraelPalestine".into(),
                title: "Ceasefire talks resume".into(),
                selftext: "Body text".into(),
                author: "someone".into(),
                created_utc: 1_697_000_000,
                score: 42,
                num_comments: 7,
            }
        );
        let again = parse_submission(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn created_utc_variants() {
        for raw in [r#""1697000000""#, "1697000000.0", "1697000000"] {
            let line = format!(r#"{{"id":"a","subreddit":"s","title":"t","created_utc":{raw}}}"#);
            assert_eq!(parse_submission(&line).unwrap().created_utc, 1_697_000_000);
        }
        let zero = r#"{"id":"a","subreddit":"s","title":"t","created_utc":0}"#;
        assert!(parse_submission(zero).is_err());
        let junk = r#"{"id":"a","subreddit":"s","title":"t","created_utc":"soon"}"#;
        assert!(parse_submission(junk).is_err());
    }

    #[test]
    fn null_optional_fields_default() {
        let line = r#"{"id":"a","subreddit":"s","title":"t","created_utc":9,"score":null,"author":null}"#;
        let s = parse_submission(line).unwrap();
        assert_eq!((s.score, s.author.as_str()), (0, ""));
    }

    #[test]
    fn comment_flag() {
        let c = parse_comment(
            r#"{"id":"c1","link_id":"t3_x1","parent_id":"t3_x1","created_utc":1,"controversiality":1}"#,
        )
        .unwrap();
        assert_eq!(c.controversiality, 1);
        assert_eq!(c.link_id, "t3_x1");
        assert_eq!(c.subreddit, "");
    }

    #[test]
    fn comment_flag_defaults_to_zero() {
        let c = parse_comment(r#"{"id":"c1","link_id":"t3_x1","parent_id":"t1_c0","created_utc":1}"#)
            .unwrap();
        assert_eq!(c.controversiality, 0);
        assert_eq!(c.parent_id, "t1_c0");
    }

    #[test]
    fn comment_missing_link_id() {
        let r = reason(parse_comment(r#"{"id":"c2","parent_id":"t1_c1"}"#).unwrap_err());
        assert!(r.contains("missing link_id"), "{r}");
    }

    #[test]
    fn comment_bad_flag() {
        let line = r#"{"id":"c","link_id":"t3_x","parent_id":"t3_x","created_utc":1,"controversiality":2}"#;
        assert!(parse_comment(line).is_err());
    }

    #[test]
    fn not_json() {
        assert!(parse_comment("not json").is_err());
        assert!(parse_submission("[1,2]").is_err());
        assert!(SubmissionRecord::parse_line(b"{\"id\":\"\xff\"}").is_err());
    }
}
