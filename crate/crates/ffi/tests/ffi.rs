use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use topicorpus_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    tc_string_free(p);
    s
}

fn last_error() -> String {
    let p = tc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn matcher_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(tc_matcher_new(c(r#"["Gaza", "West Bank"]"#).as_ptr(), &mut m), TcStatus::Ok);
        let mut hit = false;
        assert_eq!(tc_matcher_is_match(m, c("Rally in the west bank").as_ptr(), &mut hit), TcStatus::Ok);
        assert!(hit);
        assert_eq!(tc_matcher_is_match(m, c("Bahamas holiday").as_ptr(), &mut hit), TcStatus::Ok);
        assert!(!hit);
        tc_matcher_free(m);
        tc_matcher_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(tc_matcher_new(ptr::null(), &mut m), TcStatus::NullPointer);
        assert_eq!(tc_matcher_new(c("not json").as_ptr(), &mut m), TcStatus::Parse);
        assert!(last_error().contains("JSON array"));
        assert_eq!(tc_matcher_new(c("[]").as_ptr(), &mut m), TcStatus::InvalidArgument);
        assert!(m.is_null());
        let bad = [0xffu8, 0xfe, 0];
        let mut out = ptr::null_mut();
        assert_eq!(tc_anonymize(bad.as_ptr() as *const c_char, c("s").as_ptr(), &mut out), TcStatus::InvalidUtf8);
        assert_eq!(tc_anonymize(c("a").as_ptr(), c("s").as_ptr(), ptr::null_mut()), TcStatus::NullPointer);
    }
}

#[test]
fn anonymize_parse_and_containment() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(tc_anonymize(c("alice").as_ptr(), c("pepper").as_ptr(), &mut out), TcStatus::Ok);
        let h = take(out);
        assert_eq!(h, topicorpus::corpus::anonymize("alice", "pepper").unwrap().into_string());

        assert_eq!(tc_parse_scored_keywords(c("Gaza: 5, Hamas: 4.5, bogus").as_ptr(), &mut out), TcStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["entries"][1]["keyword"], "Hamas");
        assert_eq!(v["entries"][1]["importance"], 4.5);
        assert_eq!(v["skipped"], 1);

        assert_eq!(
            tc_containment_filter(c(r#"["2023 Israel-Hamas war","Hamas"]"#).as_ptr(), &mut out),
            TcStatus::Ok
        );
        assert_eq!(take(out), r#"["Hamas"]"#);
    }
}

fn write_dump(dir: &Path) -> PathBuf {
    let path = dir.join("RS_test.ndjson");
    let lines = [
        r#"{"id":"a","subreddit":"news","title":"one","created_utc":1696118400}"#,
        "garbage",
        r#"{"id":"b","subreddit":"news","title":"two","created_utc":1696118401}"#,
    ];
    std::fs::write(&path, lines.join("\n")).unwrap();
    path
}

#[test]
fn dump_reader_streams() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_dump(dir.path());
    unsafe {
        let mut r = ptr::null_mut();
        let opts = c(r#"{"max_skip_ratio": null}"#);
        assert_eq!(
            tc_dump_reader_open(c(path.to_str().unwrap()).as_ptr(), TcRecordKind::Submission, opts.as_ptr(), &mut r),
            TcStatus::Ok
        );
        let mut ids = Vec::new();
        let mut out = ptr::null_mut();
        loop {
            match tc_dump_reader_next(r, &mut out) {
                TcStatus::Ok => {
                    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
                    ids.push(v["id"].as_str().unwrap().to_string());
                }
                TcStatus::EndOfStream => break,
                other => panic!("{other:?}: {}", last_error()),
            }
        }
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(tc_dump_reader_stats(r, &mut out), TcStatus::Ok);
        let stats: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(stats["lines_skipped_malformed"], 1);
        tc_dump_reader_free(r);

        assert_eq!(
            tc_dump_reader_open(c("/nonexistent/RS.ndjson").as_ptr(), TcRecordKind::Comment, ptr::null(), &mut r),
            TcStatus::Io
        );
    }
}

/// Compiles a C program against the generated header and the static
/// library.
#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/topicorpus.h");
    assert!(header.exists(), "header not generated");
    // The test binary lives in <target>/<profile>/deps.
    let exe_path = std::env::current_exe().unwrap();
    let profile_dir = exe_path.parent().and_then(Path::parent).unwrap();
    // Cargo-provided variables would change build-script fingerprints and
    // force dependency rebuilds.
    let mut build = Command::new(env!("CARGO"));
    for (key, _) in std::env::vars_os() {
        let key = key.to_string_lossy().into_owned();
        if key.starts_with("CARGO_") && key != "CARGO_HOME" || key == "OUT_DIR" || key == "RUST_TEST_THREADS" {
            build.env_remove(key);
        }
    }
    let status = build
        .args(["build", "-p", "topicorpus-ffi", "--lib"])
        .env("CARGO_TARGET_DIR", profile_dir.parent().unwrap())
        .status()
        .unwrap();
    assert!(status.success());
    let lib = profile_dir.join("libtopicorpus_ffi.a");
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dump = write_dump(dir.path());
    let run = Command::new(&exe).arg(&dump).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("records=2") && stdout.contains("ok"), "{stdout}");
}
