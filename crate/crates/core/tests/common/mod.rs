//! Fixture generators and naive reference implementations shared by the
//! integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};

use topicorpus::corpus::{naive_title_match, SubredditLists};
use topicorpus::ingest::{CommentRecord, SubmissionRecord};

pub const DAY0: i64 = 1_696_118_400; // 2023-10-01T00:00:00Z

pub const CENTRIC: &[&str] = &["IsraelPalestine", "Gaza"];
pub const INCLUSIVE: &[&str] = &["worldnews", "news"];
pub const EXCLUDED: &[&str] = &["gardening", "cooking"];
pub const LEXICON: &[&str] = &["Gaza", "West Bank", "Hamas", "IDF", "ceasefire"];
const WORDS: &[&str] = &[
    "gaza", "west", "bank", "Bahamas", "hamas", "idf", "ceasefire", "local", "bake", "sale", "garden",
    "tomato", "recipe", "debate", "policy", "news", "war", "Israel-Hamas", "West-Bank", "cease", "fire",
];

pub fn planted_authors() -> Vec<String> {
    (0..50).map(|i| format!("planted_user_{i:02}")).collect()
}

pub fn lists() -> SubredditLists {
    SubredditLists {
        centric: CENTRIC.iter().map(|s| s.to_string()).collect(),
        inclusive: INCLUSIVE.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn lexicon() -> Vec<String> {
    LEXICON.iter().map(|s| s.to_string()).collect()
}

pub struct DumpFixture {
    pub submissions: Vec<SubmissionRecord>,
    pub comments: Vec<CommentRecord>,
    pub submission_files: Vec<PathBuf>,
    pub comment_files: Vec<PathBuf>,
    pub junk_lines: usize,
}

fn title(rng: &mut StdRng) -> String {
    let n = rng.gen_range(2..8);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Mixed dump of about `n_records` records: submissions across centric,
/// inclusive and excluded subreddits, comments with replies, orphans,
/// dangling link ids, duplicate submission ids and a few junk lines. Written
/// as two submission files (one zstd) and one comment file.
pub fn generate_dumps(seed: u64, n_records: usize, dir: &Path) -> DumpFixture {
    let mut rng = StdRng::seed_from_u64(seed);
    let authors = planted_authors();
    let subreddits: Vec<&str> = CENTRIC.iter().chain(INCLUSIVE).chain(EXCLUDED).copied().collect();
    let n_subs = (n_records / 5).max(1);
    let mut submissions: Vec<SubmissionRecord> = Vec::with_capacity(n_subs);
    for i in 0..n_subs {
        if i > 10 && rng.gen_bool(0.02) {
            let earlier = submissions[rng.gen_range(0..i)].clone();
            submissions.push(earlier);
            continue;
        }
        let id = format!("s{i:05x}");
        let author = if rng.gen_bool(0.05) { "[deleted]".to_string() } else { authors.choose(&mut rng).unwrap().clone() };
        submissions.push(SubmissionRecord {
            id,
            subreddit: subreddits.choose(&mut rng).unwrap().to_string(),
            title: title(&mut rng),
            selftext: if rng.gen_bool(0.3) { title(&mut rng) } else { String::new() },
            author,
            created_utc: DAY0 + rng.gen_range(0..40 * 86_400),
            score: rng.gen_range(-5..500),
            num_comments: rng.gen_range(0..50),
        });
    }
    let n_comments = n_records.saturating_sub(n_subs);
    let mut comments: Vec<CommentRecord> = Vec::with_capacity(n_comments);
    let mut by_link: HashMap<String, Vec<String>> = HashMap::new();
    for i in 0..n_comments {
        let link = if rng.gen_bool(0.02) {
            format!("t3_missing{}", rng.gen_range(0..100))
        } else {
            format!("t3_{}", submissions.choose(&mut rng).unwrap().id)
        };
        let siblings = by_link.entry(link.clone()).or_default();
        let parent = match rng.gen_range(0..10) {
            0 => format!("t1_gone{}", rng.gen_range(0..1000)),
            1..=4 if !siblings.is_empty() => format!("t1_{}", siblings.choose(&mut rng).unwrap()),
            _ => link.clone(),
        };
        let id = format!("c{i:06x}");
        siblings.push(id.clone());
        let author = if rng.gen_bool(0.05) { "[deleted]".to_string() } else { authors.choose(&mut rng).unwrap().clone() };
        comments.push(CommentRecord {
            id,
            link_id: link,
            parent_id: parent,
            body: title(&mut rng),
            author,
            created_utc: DAY0 + rng.gen_range(0..40 * 86_400),
            score: rng.gen_range(-20..200),
            controversiality: rng.gen_bool(0.1) as u8,
            subreddit: subreddits.choose(&mut rng).unwrap().to_string(),
        });
    }

    let junk_every = 2000;
    let mut junk_lines = 0;
    let write_lines = |lines: Vec<String>, junk: &mut usize| -> Vec<u8> {
        let mut out = Vec::new();
        for (i, l) in lines.into_iter().enumerate() {
            if i > 0 && i % junk_every == 0 {
                out.extend_from_slice(b"{\"id\": \"truncated\n");
                *junk += 1;
            }
            out.extend_from_slice(l.as_bytes());
            out.push(b'\n');
        }
        out
    };
    let half = submissions.len() / 2;
    let s1: Vec<String> = submissions[..half].iter().map(|s| serde_json::to_string(s).unwrap()).collect();
    let s2: Vec<String> = submissions[half..].iter().map(|s| serde_json::to_string(s).unwrap()).collect();
    let cs: Vec<String> = comments.iter().map(|c| serde_json::to_string(c).unwrap()).collect();
    let p1 = dir.join("RS_part1.ndjson");
    let p2 = dir.join("RS_part2.zst");
    let pc = dir.join("RC_all.ndjson");
    std::fs::write(&p1, write_lines(s1, &mut junk_lines)).unwrap();
    let packed = zstd::encode_all(&write_lines(s2, &mut junk_lines)[..], 3).unwrap();
    std::fs::write(&p2, packed).unwrap();
    std::fs::write(&pc, write_lines(cs, &mut junk_lines)).unwrap();
    DumpFixture {
        submissions,
        comments,
        submission_files: vec![p1, p2],
        comment_files: vec![pc],
        junk_lines,
    }
}

pub fn sha256_hex(salt: &str, author: &str) -> String {
    hex::encode(Sha256::digest(format!("{salt}{author}").as_bytes()))
}

/// In-memory reference for the collection policy.
pub fn naive_collect(
    fx: &DumpFixture,
    lists: &SubredditLists,
    lexicon: &[String],
    salt: &str,
) -> (Vec<SubmissionRecord>, Vec<CommentRecord>) {
    let lower = |v: &[String]| v.iter().map(|s| s.to_lowercase()).collect::<HashSet<_>>();
    let centric = lower(&lists.centric);
    let inclusive = lower(&lists.inclusive);
    let mut seen = HashSet::new();
    let mut subs = Vec::new();
    for s in &fx.submissions {
        let name = s.subreddit.to_lowercase();
        let keep = centric.contains(&name) || (inclusive.contains(&name) && naive_title_match(&s.title, lexicon));
        if keep && seen.insert(s.id.clone()) {
            let mut s = s.clone();
            s.author = sha256_hex(salt, &s.author);
            subs.push(s);
        }
    }
    let comments = fx
        .comments
        .iter()
        .filter(|c| seen.contains(c.link_id.trim_start_matches("t3_")))
        .map(|c| {
            let mut c = c.clone();
            c.author = sha256_hex(salt, &c.author);
            c
        })
        .collect();
    (subs, comments)
}

pub fn read_ndjson<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn write_ndjson<T: serde::Serialize>(path: &Path, records: &[T]) {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    for r in records {
        serde_json::to_writer(&mut f, r).unwrap();
        f.write_all(b"\n").unwrap();
    }
}
