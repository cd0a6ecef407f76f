use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::labels::{all_labels, LabelVector};
use crate::ingest::{CommentRecord, SubmissionRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPoint {
    pub date: NaiveDate,
    pub value: f64,
}

/// One value per UTC day that has data, in date order, plus the empty days
/// between the first and last point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub metric_name: String,
    pub points: Vec<DailyPoint>,
    pub gaps: Vec<NaiveDate>,
}

impl DailySeries {
    pub fn from_days(metric_name: &str, values: BTreeMap<NaiveDate, f64>) -> Self {
        let mut gaps = Vec::new();
        let mut prev: Option<NaiveDate> = None;
        for day in values.keys() {
            if let Some(p) = prev {
                let mut d = p.succ_opt();
                while let Some(g) = d.filter(|g| g < day) {
                    gaps.push(g);
                    d = g.succ_opt();
                }
            }
            prev = Some(*day);
        }
        Self {
            metric_name: metric_name.to_string(),
            points: values.into_iter().map(|(date, value)| DailyPoint { date, value }).collect(),
            gaps,
        }
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by(|p| p.date.cmp(&date))
            .ok()
            .map(|i| self.points[i].value)
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.value).sum()
    }
}

/// UTC calendar day of a Unix timestamp.
pub fn utc_date(t: i64) -> NaiveDate {
    chrono::DateTime::from_timestamp(t, 0)
        .map(|d| d.date_naive())
        .unwrap_or(NaiveDate::MIN)
}

pub fn daily_counts<I: IntoIterator<Item = i64>>(metric_name: &str, timestamps: I) -> DailySeries {
    let mut days: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for t in timestamps {
        *days.entry(utc_date(t)).or_default() += 1;
    }
    DailySeries::from_days(metric_name, days.into_iter().map(|(d, n)| (d, n as f64)).collect())
}

/// Per-day sum and mean of comment scores.
pub fn popularity_series(comments: &[CommentRecord]) -> (DailySeries, DailySeries) {
    let mut days: BTreeMap<NaiveDate, (i64, u64)> = BTreeMap::new();
    for c in comments {
        let e = days.entry(utc_date(c.created_utc)).or_default();
        e.0 += c.score;
        e.1 += 1;
    }
    let sum = days.iter().map(|(d, (s, _))| (*d, *s as f64)).collect();
    let mean = days.iter().map(|(d, (s, n))| (*d, *s as f64 / *n as f64)).collect();
    (
        DailySeries::from_days("popularity_sum", sum),
        DailySeries::from_days("popularity_mean", mean),
    )
}

/// Per-day count of distinct author hashes.
pub fn unique_authors_daily<'a, I>(records: I) -> DailySeries
where
    I: IntoIterator<Item = (i64, &'a str)>,
{
    let mut days: BTreeMap<NaiveDate, HashSet<&'a str>> = BTreeMap::new();
    for (t, author) in records {
        days.entry(utc_date(t)).or_default().insert(author);
    }
    DailySeries::from_days(
        "unique_authors",
        days.into_iter().map(|(d, s)| (d, s.len() as f64)).collect(),
    )
}

/// Per-day count of comments flagged controversial; zero on days with
/// comments but no flags.
pub fn controversy_daily(comments: &[CommentRecord]) -> DailySeries {
    let mut days: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for c in comments {
        *days.entry(utc_date(c.created_utc)).or_default() += c.controversiality as u64;
    }
    DailySeries::from_days(
        "controversy_daily",
        days.into_iter().map(|(d, n)| (d, n as f64)).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubredditControversy {
    pub name: String,
    pub total_comments: u64,
    pub controversial_comments: u64,
    pub ratio: f64,
}

/// Sorted by total descending, then name. `subreddit_of` maps each comment
/// to its subreddit.
pub fn subreddit_controversy<'a, F>(comments: &'a [CommentRecord], subreddit_of: F) -> Vec<SubredditControversy>
where
    F: Fn(&'a CommentRecord) -> &'a str,
{
    let mut counts: HashMap<&str, (u64, u64)> = HashMap::new();
    for c in comments {
        let e = counts.entry(subreddit_of(c)).or_default();
        e.0 += 1;
        e.1 += c.controversiality as u64;
    }
    let mut out: Vec<SubredditControversy> = counts
        .into_iter()
        .filter(|(_, (total, _))| *total > 0)
        .map(|(name, (total, flagged))| SubredditControversy {
            name: name.to_string(),
            total_comments: total,
            controversial_comments: flagged,
            ratio: flagged as f64 / total as f64,
        })
        .collect();
    out.sort_by(|a, b| b.total_comments.cmp(&a.total_comments).then_with(|| a.name.cmp(&b.name)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubredditCount {
    pub name: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopSubreddits {
    pub by_submissions: Vec<SubredditCount>,
    pub by_comments: Vec<SubredditCount>,
}

/// The `n` largest names by count, ties by name.
pub fn top_counts<'a, I: IntoIterator<Item = &'a str>>(names: I, n: usize) -> Vec<SubredditCount> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for name in names {
        *counts.entry(name).or_default() += 1;
    }
    let mut out: Vec<SubredditCount> = counts
        .into_iter()
        .map(|(name, count)| SubredditCount { name: name.to_string(), count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    out.truncate(n);
    out
}

pub fn top_subreddits<'a, F>(
    submissions: &'a [SubmissionRecord],
    comments: &'a [CommentRecord],
    subreddit_of: F,
    n: usize,
) -> TopSubreddits
where
    F: Fn(&'a CommentRecord) -> &'a str,
{
    TopSubreddits {
        by_submissions: top_counts(submissions.iter().map(|s| s.subreddit.as_str()), n),
        by_comments: top_counts(comments.iter().map(subreddit_of), n),
    }
}

/// Fixed-point scale for confidence sums, so that the mean does not depend
/// on summation order.
const CONFIDENCE_SCALE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMeans {
    pub series: BTreeMap<String, DailySeries>,
    /// Comments left out because no vector was available.
    pub excluded_comments: u64,
}

/// Per-day mean confidence of each label over comments that have a vector.
pub fn label_daily_mean(comments: &[CommentRecord], vectors: &HashMap<String, LabelVector>) -> LabelMeans {
    let labels: Vec<&str> = all_labels().collect();
    let mut days: BTreeMap<NaiveDate, (Vec<u128>, u64)> = BTreeMap::new();
    let mut excluded = 0;
    for c in comments {
        let Some(v) = vectors.get(&c.id) else {
            excluded += 1;
            continue;
        };
        let e = days
            .entry(utc_date(c.created_utc))
            .or_insert_with(|| (vec![0; labels.len()], 0));
        for (slot, label) in e.0.iter_mut().zip(&labels) {
            let conf = v.get(label).unwrap_or(0.0);
            *slot += (conf * CONFIDENCE_SCALE).round() as u128;
        }
        e.1 += 1;
    }
    let series = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let values = days
                .iter()
                .map(|(d, (sums, n))| (*d, sums[i] as f64 / *n as f64 / CONFIDENCE_SCALE))
                .collect();
            (label.to_string(), DailySeries::from_days(label, values))
        })
        .collect();
    LabelMeans {
        series,
        excluded_comments: excluded,
    }
}
