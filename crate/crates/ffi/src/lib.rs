//! C ABI over the topicorpus toolkit.
//!
//! Conventions:
//! - Every fallible function returns a [`TcStatus`]; results go through out
//!   pointers, which are written only on `TC_STATUS_OK`.
//! - On failure, [`tc_last_error_message`] describes the error. The message
//!   is per thread and valid until the next call on that thread.
//! - Strings returned through out pointers are owned by the caller and must
//!   be released with [`tc_string_free`].
//! - Handles are opaque; release each with its `_free` function. A handle
//!   must not be used from two threads at once.
//! - Structured data crosses the boundary as UTF-8 JSON.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use topicorpus::corpus::{anonymize, TitleMatcher};
use topicorpus::ingest::{open_stream, DumpReader, IngestOptions, Record, RecordKind};
use topicorpus::lexicon::containment_filter;
use topicorpus::llm_gateway::parse_scored_keywords;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    /// The dump reader has no more records.
    EndOfStream = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcRecordKind {
    Submission = 0,
    Comment = 1,
}

/// Keyword matcher over submission titles.
pub struct TcMatcher {
    inner: TitleMatcher,
}

/// Streaming reader over one dump file.
pub struct TcDumpReader {
    inner: DumpReader<Record>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

fn fail(status: TcStatus, message: impl Into<String>) -> TcStatus {
    set_error(message);
    status
}

/// Runs `f`, converting panics into `TC_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> TcStatus) -> TcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TcStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, TcStatus> {
    if p.is_null() {
        return Err(fail(TcStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(TcStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> TcStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            TcStatus::Ok
        }
        Err(_) => fail(TcStatus::InvalidArgument, "result contains a NUL byte"),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! check_out {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TcStatus::NullPointer, concat!("null out pointer: ", stringify!($p)));
        })+
    };
}

fn parse_string_list(json: &str) -> Result<Vec<String>, TcStatus> {
    serde_json::from_str(json).map_err(|e| fail(TcStatus::Parse, format!("expected a JSON array of strings: {e}")))
}

/// Message for the last failed call on this thread, or NULL. Do not free.
#[no_mangle]
pub extern "C" fn tc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a matcher from a JSON array of keywords.
///
/// # Safety
/// `keywords_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_matcher_new(keywords_json: *const c_char, out: *mut *mut TcMatcher) -> TcStatus {
    guard(|| {
        check_out!(out);
        let json = try_ffi!(read_str(keywords_json));
        let keywords = try_ffi!(parse_string_list(json));
        match TitleMatcher::new(&keywords) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TcMatcher { inner }));
                TcStatus::Ok
            }
            Err(e) => fail(TcStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Whether any keyword occurs in `title` as a contiguous token run.
///
/// # Safety
/// `matcher` must be a live handle; `title` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_matcher_is_match(matcher: *const TcMatcher, title: *const c_char, out: *mut bool) -> TcStatus {
    guard(|| {
        check_out!(out);
        if matcher.is_null() {
            return fail(TcStatus::NullPointer, "null matcher");
        }
        let title = try_ffi!(read_str(title));
        *out = (*matcher).inner.is_match(title);
        TcStatus::Ok
    })
}

/// # Safety
/// `matcher` must come from [`tc_matcher_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tc_matcher_free(matcher: *mut TcMatcher) {
    if !matcher.is_null() {
        drop(Box::from_raw(matcher));
    }
}

/// Lowercase hex SHA-256 of salt‖author. An empty salt is rejected.
///
/// # Safety
/// `author` and `salt` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_anonymize(author: *const c_char, salt: *const c_char, out: *mut *mut c_char) -> TcStatus {
    guard(|| {
        check_out!(out);
        let author = try_ffi!(read_str(author));
        let salt = try_ffi!(read_str(salt));
        match anonymize(author, salt) {
            Ok(h) => write_string(out, h.into_string()),
            Err(e) => fail(TcStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parse a `keyword: score, ...` model response into
/// `{"entries": [{"keyword", "importance"}], "skipped": n}`.
///
/// # Safety
/// `text` must be NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_parse_scored_keywords(text: *const c_char, out_json: *mut *mut c_char) -> TcStatus {
    guard(|| {
        check_out!(out_json);
        let text = try_ffi!(read_str(text));
        match parse_scored_keywords(text) {
            Ok(parsed) => {
                let value = serde_json::json!({"entries": parsed.list.entries, "skipped": parsed.skipped});
                write_string(out_json, value.to_string())
            }
            Err(e) => fail(TcStatus::Parse, e.to_string()),
        }
    })
}

/// Drop every keyword that contains another keyword of the set as a
/// contiguous token run. Input and output are JSON arrays of strings.
///
/// # Safety
/// `keywords_json` must be NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_containment_filter(keywords_json: *const c_char, out_json: *mut *mut c_char) -> TcStatus {
    guard(|| {
        check_out!(out_json);
        let json = try_ffi!(read_str(keywords_json));
        let keywords = try_ffi!(parse_string_list(json));
        let kept = containment_filter(&keywords);
        write_string(out_json, serde_json::to_string(&kept).expect("strings serialize"))
    })
}

/// Open a plain or zstd-compressed ndjson dump. `options_json` may be NULL
/// for defaults, or an object such as `{"max_skip_ratio": 0.01}`.
///
/// # Safety
/// `path` must be NUL-terminated; `options_json` NULL or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_dump_reader_open(
    path: *const c_char,
    kind: TcRecordKind,
    options_json: *const c_char,
    out: *mut *mut TcDumpReader,
) -> TcStatus {
    guard(|| {
        check_out!(out);
        let path = try_ffi!(read_str(path));
        let options: IngestOptions = if options_json.is_null() {
            IngestOptions::default()
        } else {
            let json = try_ffi!(read_str(options_json));
            match serde_json::from_str(json) {
                Ok(o) => o,
                Err(e) => return fail(TcStatus::Parse, format!("ingest options: {e}")),
            }
        };
        let kind = match kind {
            TcRecordKind::Submission => RecordKind::Submission,
            TcRecordKind::Comment => RecordKind::Comment,
        };
        match open_stream(Path::new(path), kind, &options) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TcDumpReader { inner }));
                TcStatus::Ok
            }
            Err(e) => fail(TcStatus::Io, e.to_string()),
        }
    })
}

/// Next record as JSON, or `TC_STATUS_END_OF_STREAM`. Malformed lines are
/// skipped; exceeding the skip ratio or a corrupt stream is an error.
///
/// # Safety
/// `reader` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_dump_reader_next(reader: *mut TcDumpReader, out_json: *mut *mut c_char) -> TcStatus {
    guard(|| {
        check_out!(out_json);
        if reader.is_null() {
            return fail(TcStatus::NullPointer, "null reader");
        }
        match (*reader).inner.next() {
            None => TcStatus::EndOfStream,
            Some(Ok(record)) => write_string(out_json, serde_json::to_string(&record).expect("records serialize")),
            Some(Err(e)) => fail(TcStatus::Io, e.to_string()),
        }
    })
}

/// Counters so far: `{lines_read, records_parsed, lines_skipped_malformed,
/// bytes_read}`.
///
/// # Safety
/// `reader` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_dump_reader_stats(reader: *const TcDumpReader, out_json: *mut *mut c_char) -> TcStatus {
    guard(|| {
        check_out!(out_json);
        if reader.is_null() {
            return fail(TcStatus::NullPointer, "null reader");
        }
        write_string(out_json, serde_json::to_string(&(*reader).inner.stats()).expect("stats serialize"))
    })
}

/// # Safety
/// `reader` must come from [`tc_dump_reader_open`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tc_dump_reader_free(reader: *mut TcDumpReader) {
    if !reader.is_null() {
        drop(Box::from_raw(reader));
    }
}
