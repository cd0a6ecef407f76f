use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

pub const MORAL_LABELS: [&str; 10] = [
    "care",
    "harm",
    "fairness",
    "cheating",
    "loyalty",
    "betrayal",
    "authority",
    "subversion",
    "purity",
    "degradation",
];

pub const EMOTION_LABELS: [&str; 5] = ["fear", "anger", "enjoyment", "sadness", "disgust_contempt"];

/// Per-comment confidences, one per label, each in `[0, 1]`. Labels are
/// independent: nothing sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLabelVector")]
pub struct LabelVector {
    pub moral: BTreeMap<String, f64>,
    pub emotion: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct RawLabelVector {
    moral: BTreeMap<String, f64>,
    emotion: BTreeMap<String, f64>,
}

impl TryFrom<RawLabelVector> for LabelVector {
    type Error = AnalyticsError;

    fn try_from(raw: RawLabelVector) -> Result<Self, AnalyticsError> {
        LabelVector::new(raw.moral, raw.emotion)
    }
}

fn check_map(kind: &str, map: &BTreeMap<String, f64>, expected: &[&str]) -> Result<(), AnalyticsError> {
    if map.len() != expected.len() || expected.iter().any(|l| !map.contains_key(*l)) {
        let got: Vec<&str> = map.keys().map(String::as_str).collect();
        return Err(AnalyticsError::Schema(format!(
            "{kind} labels must be exactly {expected:?}, got {got:?}"
        )));
    }
    for (label, v) in map {
        if !(0.0..=1.0).contains(v) {
            return Err(AnalyticsError::Schema(format!(
                "{kind} confidence for {label} is {v}, outside [0, 1]"
            )));
        }
    }
    Ok(())
}

impl LabelVector {
    pub fn new(moral: BTreeMap<String, f64>, emotion: BTreeMap<String, f64>) -> Result<Self, AnalyticsError> {
        check_map("moral", &moral, &MORAL_LABELS)?;
        check_map("emotion", &emotion, &EMOTION_LABELS)?;
        Ok(Self { moral, emotion })
    }

    /// Confidences in label order: the ten moral labels, then the five
    /// emotions.
    pub fn from_values(values: [f64; 15]) -> Result<Self, AnalyticsError> {
        let moral = MORAL_LABELS.iter().zip(&values[..10]).map(|(l, v)| (l.to_string(), *v)).collect();
        let emotion = EMOTION_LABELS.iter().zip(&values[10..]).map(|(l, v)| (l.to_string(), *v)).collect();
        Self::new(moral, emotion)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.moral.get(label).or_else(|| self.emotion.get(label)).copied()
    }
}

/// All fifteen labels, moral first.
pub fn all_labels() -> impl Iterator<Item = &'static str> {
    MORAL_LABELS.iter().chain(EMOTION_LABELS.iter()).copied()
}
