//! Conversation trees: a submission plus its comments nested by `parent_id`.
//!
//! Comments whose parent is missing attach to the root with an orphan flag.
//! A parent chain that loops is cut at the comment with the smallest id in
//! the loop, which then attaches to the root as an orphan. Conversation
//! length counts comments only.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::link_target;
use crate::ingest::{CommentRecord, SubmissionRecord};

#[derive(Debug, thiserror::Error)]
pub enum ThreadError {
    #[error("comment {comment_id} belongs to {link_id}, not submission {submission_id}")]
    CrossThreadComment {
        comment_id: String,
        link_id: String,
        submission_id: String,
    },
    #[error("histogram output: {0}")]
    Output(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentNode {
    pub comment: CommentRecord,
    /// Attached to the root because its parent was absent or its parent
    /// chain looped.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub orphan: bool,
    pub children: Vec<CommentNode>,
}

// Iterative teardown; deep reply chains would otherwise overflow the stack.
impl Drop for CommentNode {
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.children);
        while let Some(mut node) = stack.pop() {
            stack.append(&mut node.children);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub root: SubmissionRecord,
    /// Top-level comments, ordered by `created_utc` then id.
    pub nodes: Vec<CommentNode>,
    pub orphan_count: usize,
    /// Orphans created by cutting a parent loop; included in `orphan_count`.
    pub cycle_breaks: usize,
    /// Number of comments in the tree.
    pub length: usize,
    /// Deepest comment level; top-level comments are depth 1.
    pub max_depth: usize,
    pub is_controversial: bool,
}

fn cmp_comments(a: &CommentRecord, b: &CommentRecord) -> Ordering {
    a.created_utc
        .cmp(&b.created_utc)
        .then_with(|| a.id.cmp(&b.id))
        .then_with(|| a.parent_id.cmp(&b.parent_id))
        .then_with(|| a.body.cmp(&b.body))
        .then_with(|| a.author.cmp(&b.author))
        .then_with(|| a.score.cmp(&b.score))
        .then_with(|| a.controversiality.cmp(&b.controversiality))
        .then_with(|| a.subreddit.cmp(&b.subreddit))
        .then_with(|| a.link_id.cmp(&b.link_id))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parent {
    Root,
    Orphan,
    Comment(usize),
}

/// Build the tree for one submission. The result does not depend on the
/// order of `comments`.
pub fn build(submission: SubmissionRecord, mut comments: Vec<CommentRecord>) -> Result<Conversation, ThreadError> {
    if let Some(c) = comments.iter().find(|c| link_target(&c.link_id) != submission.id) {
        return Err(ThreadError::CrossThreadComment {
            comment_id: c.id.clone(),
            link_id: c.link_id.clone(),
            submission_id: submission.id.clone(),
        });
    }
    comments.sort_by(cmp_comments);
    let n = comments.len();

    let mut index: HashMap<&str, usize> = HashMap::with_capacity(n);
    for (i, c) in comments.iter().enumerate() {
        index.entry(c.id.as_str()).or_insert(i);
    }
    let mut parent: Vec<Parent> = comments
        .iter()
        .map(|c| resolve_parent(&c.parent_id, &submission.id, &index))
        .collect();

    let cycle_breaks = break_cycles(&comments, &mut parent);

    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut top: Vec<usize> = Vec::new();
    for (i, p) in parent.iter().enumerate() {
        match p {
            Parent::Comment(j) => kids[*j].push(i),
            Parent::Root | Parent::Orphan => top.push(i),
        }
    }

    // Breadth-first order, then assemble bottom-up so deep chains need no
    // recursion.
    let mut order = Vec::with_capacity(n);
    let mut depth = vec![0usize; n];
    for &t in &top {
        depth[t] = 1;
        order.push(t);
    }
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        for &k in &kids[i] {
            depth[k] = depth[i] + 1;
            order.push(k);
        }
    }
    debug_assert_eq!(order.len(), n);

    let orphan_count = parent.iter().filter(|p| **p == Parent::Orphan).count();
    let is_controversial = comments.iter().any(|c| c.controversiality == 1);
    let max_depth = depth.iter().copied().max().unwrap_or(0);

    let mut slots: Vec<Option<CommentRecord>> = comments.into_iter().map(Some).collect();
    let mut built: Vec<Option<CommentNode>> = vec![None; n];
    for &i in order.iter().rev() {
        let children = kids[i].iter().map(|&k| built[k].take().expect("child built")).collect();
        built[i] = Some(CommentNode {
            comment: slots[i].take().expect("comment present"),
            orphan: parent[i] == Parent::Orphan,
            children,
        });
    }
    let nodes = top.iter().map(|&t| built[t].take().expect("top-level built")).collect();

    Ok(Conversation {
        root: submission,
        nodes,
        orphan_count,
        cycle_breaks,
        length: n,
        max_depth,
        is_controversial,
    })
}

fn resolve_parent(parent_id: &str, submission_id: &str, index: &HashMap<&str, usize>) -> Parent {
    if let Some(id) = parent_id.strip_prefix("t3_") {
        return if id == submission_id { Parent::Root } else { Parent::Orphan };
    }
    let id = parent_id.strip_prefix("t1_").unwrap_or(parent_id);
    if let Some(&j) = index.get(id) {
        Parent::Comment(j)
    } else if id == submission_id {
        Parent::Root
    } else {
        Parent::Orphan
    }
}

/// Cut every parent loop at its smallest-id member. Returns the number of
/// cuts.
fn break_cycles(comments: &[CommentRecord], parent: &mut [Parent]) -> usize {
    const UNSEEN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![UNSEEN; comments.len()];
    let mut cuts = 0;
    for start in 0..comments.len() {
        if state[start] != UNSEEN {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            state[cur] = ACTIVE;
            path.push(cur);
            match parent[cur] {
                Parent::Comment(next) if state[next] == UNSEEN => cur = next,
                Parent::Comment(next) if state[next] == ACTIVE => {
                    let pos = path.iter().position(|&p| p == next).expect("loop start on path");
                    let cut = *path[pos..]
                        .iter()
                        .min_by(|&&a, &&b| comments[a].id.cmp(&comments[b].id).then(a.cmp(&b)))
                        .expect("non-empty loop");
                    parent[cut] = Parent::Orphan;
                    cuts += 1;
                    break;
                }
                _ => break,
            }
        }
        for p in path {
            state[p] = DONE;
        }
    }
    cuts
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyStats {
    pub conversations: usize,
    pub comments_attached: usize,
    /// Comments whose submission is not in the input.
    pub comments_unattached: usize,
    pub duplicate_submissions: usize,
}

/// Group comments by submission and build every conversation, in parallel.
/// Conversations are ordered by submission time then id.
pub fn assemble(
    submissions: Vec<SubmissionRecord>,
    comments: Vec<CommentRecord>,
) -> (Vec<Conversation>, AssemblyStats) {
    let mut stats = AssemblyStats::default();
    let mut roots: BTreeMap<String, SubmissionRecord> = BTreeMap::new();
    let mut sorted = submissions;
    sorted.sort_by(|a, b| {
        a.id.cmp(&b.id)
            .then(a.created_utc.cmp(&b.created_utc))
            .then_with(|| serde_json::to_string(a).ok().cmp(&serde_json::to_string(b).ok()))
    });
    for s in sorted {
        if roots.contains_key(&s.id) {
            stats.duplicate_submissions += 1;
        } else {
            roots.insert(s.id.clone(), s);
        }
    }
    let mut groups: HashMap<String, Vec<CommentRecord>> = HashMap::new();
    for c in comments {
        let target = link_target(&c.link_id);
        if roots.contains_key(target) {
            stats.comments_attached += 1;
            groups.entry(target.to_string()).or_default().push(c);
        } else {
            stats.comments_unattached += 1;
        }
    }
    let jobs: Vec<(SubmissionRecord, Vec<CommentRecord>)> = roots
        .into_values()
        .map(|s| {
            let cs = groups.remove(&s.id).unwrap_or_default();
            (s, cs)
        })
        .collect();
    let mut conversations: Vec<Conversation> = jobs
        .into_par_iter()
        .map(|(s, cs)| build(s, cs).expect("comments grouped by link target"))
        .collect();
    conversations.sort_by(|a, b| a.root.created_utc.cmp(&b.root.created_utc).then_with(|| a.root.id.cmp(&b.root.id)));
    stats.conversations = conversations.len();
    (conversations, stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bucketing {
    /// Exact lengths 0–10, then 11–100, 101–1000, and so on.
    #[default]
    Log10,
    Exact,
    Linear { width: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub label: String,
    pub lower: u64,
    pub upper: u64,
    pub count: u64,
}

fn bucket_bounds(length: u64, bucketing: Bucketing) -> (u64, u64) {
    match bucketing {
        Bucketing::Exact => (length, length),
        Bucketing::Linear { width } => {
            let w = width.max(1);
            let lo = length / w * w;
            (lo, lo + w - 1)
        }
        Bucketing::Log10 => {
            if length <= 10 {
                return (length, length);
            }
            let mut upper = 100u64;
            while length > upper {
                upper = upper.saturating_mul(10);
            }
            (upper / 10 + 1, upper)
        }
    }
}

/// Non-empty buckets in ascending order.
pub fn length_histogram<I: IntoIterator<Item = usize>>(lengths: I, bucketing: Bucketing) -> Vec<HistogramBucket> {
    let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for len in lengths {
        *counts.entry(bucket_bounds(len as u64, bucketing)).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((lower, upper), count)| HistogramBucket {
            label: if lower == upper { lower.to_string() } else { format!("{lower}-{upper}") },
            lower,
            upper,
            count,
        })
        .collect()
}

/// `bucket,count` CSV.
pub fn write_histogram_csv<W: Write>(out: W, buckets: &[HistogramBucket]) -> Result<(), ThreadError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bucket", "count"])?;
    for b in buckets {
        w.write_record([b.label.as_str(), &b.count.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

impl Conversation {
    /// Every comment node, depth-first in child order.
    pub fn iter_nodes(&self) -> impl Iterator<Item = &CommentNode> {
        let mut stack: Vec<&CommentNode> = self.nodes.iter().rev().collect();
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(id: &str) -> SubmissionRecord {
        SubmissionRecord {
            id: id.into(),
            subreddit: "r".into(),
            title: "t".into(),
            selftext: String::new(),
            author: String::new(),
            created_utc: 100,
            score: 0,
            num_comments: 0,
        }
    }

    fn com(id: &str, parent: &str, t: i64, flag: u8) -> CommentRecord {
        CommentRecord {
            id: id.into(),
            link_id: "t3_s".into(),
            parent_id: parent.into(),
            body: String::new(),
            author: String::new(),
            created_utc: t,
            score: 0,
            controversiality: flag,
            subreddit: String::new(),
        }
    }

    #[test]
    fn chain() {
        let c = build(sub("s"), vec![com("c2", "t1_c1", 2, 0), com("c1", "t3_s", 1, 0)]).unwrap();
        assert_eq!(c.length, 2);
        assert_eq!(c.max_depth, 2);
        assert_eq!(c.nodes.len(), 1);
        assert_eq!(c.nodes[0].children[0].comment.id, "c2");
        assert_eq!(c.orphan_count, 0);
    }

    #[test]
    fn missing_parent_is_orphan() {
        let c = build(sub("s"), vec![com("c1", "t3_s", 1, 0), com("c2", "t1_c9", 2, 0)]).unwrap();
        assert_eq!(c.orphan_count, 1);
        assert_eq!(c.length, 2);
        assert_eq!(c.nodes.len(), 2);
        assert!(c.nodes[1].orphan);
    }

    #[test]
    fn controversy_flag() {
        let c = build(
            sub("s"),
            vec![com("a", "t3_s", 1, 0), com("b", "t3_s", 2, 1), com("c", "t3_s", 3, 0)],
        )
        .unwrap();
        assert!(c.is_controversial);
        let c = build(sub("s"), vec![com("a", "t3_s", 1, 0)]).unwrap();
        assert!(!c.is_controversial);
    }

    #[test]
    fn cross_thread_rejected() {
        let mut x = com("a", "t3_s", 1, 0);
        x.link_id = "t3_other".into();
        assert!(matches!(build(sub("s"), vec![x]), Err(ThreadError::CrossThreadComment { .. })));
    }

    #[test]
    fn children_ordered_by_time_then_id() {
        let c = build(
            sub("s"),
            vec![com("b", "t3_s", 5, 0), com("a", "t3_s", 5, 0), com("z", "t3_s", 1, 0)],
        )
        .unwrap();
        let ids: Vec<_> = c.nodes.iter().map(|n| n.comment.id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "b"]);
    }

    #[test]
    fn loops_cut_at_smallest_id() {
        let c = build(
            sub("s"),
            vec![com("b", "t1_c", 1, 0), com("c", "t1_a", 2, 0), com("a", "t1_b", 3, 0), com("d", "t1_d", 4, 0)],
        )
        .unwrap();
        assert_eq!(c.length, 4);
        assert_eq!(c.cycle_breaks, 2);
        assert_eq!(c.orphan_count, 2);
        let top: Vec<_> = c.nodes.iter().map(|n| n.comment.id.as_str()).collect();
        assert_eq!(top, ["a", "d"]);
        assert_eq!(c.nodes[0].children[0].comment.id, "c");
        assert_eq!(c.nodes[0].children[0].children[0].comment.id, "b");
        assert_eq!(c.iter_nodes().count(), 4);
    }

    #[test]
    fn deep_chain_no_recursion() {
        let mut cs = vec![com("c0", "t3_s", 0, 0)];
        for i in 1..50_000 {
            cs.push(com(&format!("c{i}"), &format!("t1_c{}", i - 1), i, 0));
        }
        let c = build(sub("s"), cs).unwrap();
        assert_eq!(c.max_depth, 50_000);
        assert_eq!(c.iter_nodes().count(), 50_000);
    }

    #[test]
    fn histogram_default_buckets() {
        let h = length_histogram([1, 1, 2, 150], Bucketing::default());
        let got: Vec<_> = h.iter().map(|b| (b.label.as_str(), b.count)).collect();
        assert_eq!(got, [("1", 2), ("2", 1), ("101-1000", 1)]);
        assert!(length_histogram(Vec::<usize>::new(), Bucketing::default()).is_empty());
        let same = length_histogram([7, 7, 7], Bucketing::default());
        assert_eq!(same.len(), 1);
        assert_eq!(same[0].count, 3);
        let b = length_histogram([10, 11, 100, 101], Bucketing::Log10);
        let labels: Vec<_> = b.iter().map(|x| x.label.as_str()).collect();
        assert_eq!(labels, ["10", "11-100", "101-1000"]);
        let lin = length_histogram([0, 4, 5, 12], Bucketing::Linear { width: 5 });
        let labels: Vec<_> = lin.iter().map(|x| (x.label.as_str(), x.count)).collect();
        assert_eq!(labels, [("0-4", 2), ("5-9", 1), ("10-14", 1)]);
    }

    #[test]
    fn histogram_csv() {
        let mut out = Vec::new();
        write_histogram_csv(&mut out, &length_histogram([1, 150], Bucketing::default())).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "bucket,count\n1,1\n101-1000,1\n");
    }
}
