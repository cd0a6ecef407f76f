use crate::text::{contains_token_run, normalize_tokens};

/// Drop every keyword that contains another keyword as a contiguous,
/// case-insensitive token run ("2023 Israel-Hamas war" goes when "Hamas" is
/// present). Keywords with identical token sequences keep only the first;
/// keywords with no alphanumeric tokens are dropped. Input order is kept.
///
/// Containment is transitive, so the shortest keyword of every chain
/// survives and a single sweep already reaches the fixpoint.
pub fn containment_filter_by<T>(items: Vec<T>, key: impl Fn(&T) -> &str) -> Vec<T> {
    let mut tokenized: Vec<(Vec<String>, T)> = Vec::with_capacity(items.len());
    for item in items {
        let tokens = normalize_tokens(key(&item));
        if tokens.is_empty() || tokenized.iter().any(|(t, _)| *t == tokens) {
            continue;
        }
        tokenized.push((tokens, item));
    }
    let keep: Vec<bool> = tokenized
        .iter()
        .enumerate()
        .map(|(i, (longer, _))| {
            !tokenized
                .iter()
                .enumerate()
                .any(|(j, (shorter, _))| i != j && contains_token_run(longer, shorter))
        })
        .collect();
    tokenized
        .into_iter()
        .zip(keep)
        .filter_map(|((_, item), keep)| keep.then_some(item))
        .collect()
}

pub fn containment_filter(keywords: &[String]) -> Vec<String> {
    containment_filter_by(keywords.to_vec(), |k| k.as_str())
}
