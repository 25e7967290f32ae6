//! Exercises the C ABI end to end: load, count, generate, train, evaluate,
//! and the error paths.

use std::ffi::{CStr, CString};
use std::fs;
use std::ptr;

use refgen_capi::{
    refgen_corpus_document_count, refgen_corpus_free, refgen_corpus_load,
    refgen_corpus_slot_count, refgen_edit_distance, refgen_evaluate_to_json,
    refgen_generate_to_file, refgen_last_error, refgen_string_free, refgen_train_to_file,
    RefgenCorpus, RefgenStatus,
};

const CORPUS_JSONL: &str = concat!(
    r#"{"doc_id":"d1","split":"train","sentences":[["Alice_Smith","arrived","."],["Alice_Smith","spoke","."]],"slots":[{"sent":0,"tok":0,"entity_tag":"Alice_Smith","gold_re":["Alice","Smith"],"gold_form":"proper_name","gram_role":"subject","chain_id":"a"},{"sent":1,"tok":0,"entity_tag":"Alice_Smith","gold_re":["She"],"gold_form":"pronoun","gram_role":"subject","chain_id":"a"}]}"#,
    "\n",
    r#"{"doc_id":"d2","split":"test","sentences":[["Alice_Smith","arrived","."],["Alice_Smith","spoke","."]],"slots":[{"sent":0,"tok":0,"entity_tag":"Alice_Smith","gold_re":["Alice","Smith"],"gold_form":"proper_name","gram_role":"subject","chain_id":"a"},{"sent":1,"tok":0,"entity_tag":"Alice_Smith","gold_re":["She"],"gold_form":"pronoun","gram_role":"subject","chain_id":"a"}]}"#,
    "\n"
);

const REGISTRY_JSON: &str =
    r#"{"Alice_Smith": {"type": "PERSON", "gender": "female", "plurality": "singular"}}"#;

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(refgen_last_error()) }
        .to_string_lossy()
        .into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    corpus_path: CString,
    registry_path: CString,
    dir_path: std::path::PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    fs::write(&corpus, CORPUS_JSONL).unwrap();
    let registry = dir.path().join("registry.json");
    fs::write(&registry, REGISTRY_JSON).unwrap();
    Fixture {
        corpus_path: cstring(corpus.to_str().unwrap()),
        registry_path: cstring(registry.to_str().unwrap()),
        dir_path: dir.path().to_owned(),
        _dir: dir,
    }
}

fn load(fixture: &Fixture) -> *mut RefgenCorpus {
    let mut handle: *mut RefgenCorpus = ptr::null_mut();
    let status = unsafe {
        refgen_corpus_load(
            fixture.corpus_path.as_ptr(),
            fixture.registry_path.as_ptr(),
            &mut handle,
        )
    };
    assert_eq!(status, RefgenStatus::Ok, "{}", last_error());
    assert!(!handle.is_null());
    handle
}

#[test]
fn load_count_and_free() {
    let fx = fixture();
    let corpus = load(&fx);

    let mut count = 0usize;
    let status = unsafe { refgen_corpus_document_count(corpus, ptr::null(), &mut count) };
    assert_eq!(status, RefgenStatus::Ok);
    assert_eq!(count, 2);

    let split = cstring("test");
    let status = unsafe { refgen_corpus_document_count(corpus, split.as_ptr(), &mut count) };
    assert_eq!(status, RefgenStatus::Ok);
    assert_eq!(count, 1);

    let status = unsafe { refgen_corpus_slot_count(corpus, split.as_ptr(), &mut count) };
    assert_eq!(status, RefgenStatus::Ok);
    assert_eq!(count, 2);

    unsafe { refgen_corpus_free(corpus) };
}

#[test]
fn null_and_missing_file_errors() {
    let mut handle: *mut RefgenCorpus = ptr::null_mut();
    let status = unsafe { refgen_corpus_load(ptr::null(), ptr::null(), &mut handle) };
    assert_eq!(status, RefgenStatus::NullArgument);
    assert!(last_error().contains("corpus_path"));

    let missing = cstring("/nonexistent/corpus.jsonl");
    let status = unsafe { refgen_corpus_load(missing.as_ptr(), ptr::null(), &mut handle) };
    assert_eq!(status, RefgenStatus::Io);

    let fx = fixture();
    let bad = fx.dir_path.join("bad.jsonl");
    fs::write(&bad, "not json\n").unwrap();
    let bad_c = cstring(bad.to_str().unwrap());
    let status = unsafe { refgen_corpus_load(bad_c.as_ptr(), ptr::null(), &mut handle) };
    assert_eq!(status, RefgenStatus::Parse);
    assert!(last_error().contains("line 1"), "{}", last_error());
}

#[test]
fn edit_distance_matches_library() {
    let a = cstring("kitten");
    let b = cstring("sitting");
    let mut out = 0u64;
    let status = unsafe { refgen_edit_distance(a.as_ptr(), b.as_ptr(), &mut out) };
    assert_eq!(status, RefgenStatus::Ok);
    assert_eq!(out, 3);
}

#[test]
fn generate_train_and_evaluate_through_the_abi() {
    let fx = fixture();
    let corpus = load(&fx);
    let split = cstring("test");

    // Rule-based generation.
    let preds = fx.dir_path.join("preds.jsonl");
    let preds_c = cstring(preds.to_str().unwrap());
    let system = cstring("rreg-s");
    let status = unsafe {
        refgen_generate_to_file(
            corpus,
            split.as_ptr(),
            system.as_ptr(),
            ptr::null(),
            preds_c.as_ptr(),
        )
    };
    assert_eq!(status, RefgenStatus::Ok, "{}", last_error());
    let contents = fs::read_to_string(&preds).unwrap();
    assert_eq!(contents.lines().count(), 2);
    // Second mention: discourse-old, no competitor; female person => "She".
    assert!(contents.contains("\"She\""), "{contents}");

    // Training and ML generation.
    let model = fx.dir_path.join("model.json");
    let model_c = cstring(model.to_str().unwrap());
    let schema = cstring("ml-s");
    let status =
        unsafe { refgen_train_to_file(corpus, schema.as_ptr(), 7, model_c.as_ptr()) };
    assert_eq!(status, RefgenStatus::Ok, "{}", last_error());
    let ml_preds = fx.dir_path.join("ml_preds.jsonl");
    let ml_preds_c = cstring(ml_preds.to_str().unwrap());
    let ml = cstring("ml-s");
    let status = unsafe {
        refgen_generate_to_file(
            corpus,
            split.as_ptr(),
            ml.as_ptr(),
            model_c.as_ptr(),
            ml_preds_c.as_ptr(),
        )
    };
    assert_eq!(status, RefgenStatus::Ok, "{}", last_error());

    // Evaluation returns a JSON report string.
    let mut json: *mut std::os::raw::c_char = ptr::null_mut();
    let status = unsafe {
        refgen_evaluate_to_json(corpus, split.as_ptr(), preds_c.as_ptr(), 0, 0, &mut json)
    };
    assert_eq!(status, RefgenStatus::Ok, "{}", last_error());
    let report = unsafe { CStr::from_ptr(json) }.to_string_lossy().into_owned();
    unsafe { refgen_string_free(json) };
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["overall"]["re_accuracy"], 1.0);
    assert_eq!(parsed["overall"]["bleu"], 100.0);

    // Misaligned predictions are a data error.
    let short = fx.dir_path.join("short.jsonl");
    fs::write(&short, "{\"doc_id\":\"d2\",\"slot_index\":0,\"re\":[\"x\"]}\n").unwrap();
    let short_c = cstring(short.to_str().unwrap());
    let mut json: *mut std::os::raw::c_char = ptr::null_mut();
    let status = unsafe {
        refgen_evaluate_to_json(corpus, split.as_ptr(), short_c.as_ptr(), 0, 0, &mut json)
    };
    assert_eq!(status, RefgenStatus::Data);
    assert!(last_error().contains("predictions"), "{}", last_error());

    unsafe { refgen_corpus_free(corpus) };
}
