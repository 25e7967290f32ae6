//! C ABI for the refgen toolkit.
//!
//! The API hands out opaque corpus handles and reports failures through
//! status codes; a per-thread message with details is available from
//! [`refgen_last_error`]. Strings returned by the API are owned by the
//! caller and must be released with [`refgen_string_free`].
//!
//! The generated header lives in `include/refgen.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use refgen::corpus::{parse_corpus, ContextPolicy, Corpus, EntityRegistry, Split};
use refgen::features::FeatureSchema;
use refgen::metrics::{sed, EvalOptions, SedGranularity};
use refgen::ml::{train, ClassifierConfig, FormModel};
use refgen::pipeline::{evaluate, generate, read_predictions, write_predictions, SystemKind};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefgenStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read or written.
    Io = 3,
    /// Input data failed to parse or validate.
    Parse = 4,
    /// The operation failed on well-formed input (alignment, training, ...).
    Data = 5,
    /// An internal invariant failed.
    Internal = 6,
}

/// Opaque handle to a loaded corpus.
pub struct RefgenCorpus {
    inner: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: RefgenStatus, message: impl AsRef<str>) -> RefgenStatus {
    set_last_error(message.as_ref());
    status
}

/// Message describing the most recent failure on this thread. The pointer is
/// valid until the next API call on the same thread.
#[no_mangle]
pub extern "C" fn refgen_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded(body: impl FnOnce() -> RefgenStatus) -> RefgenStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(RefgenStatus::Internal, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, RefgenStatus> {
    if ptr.is_null() {
        return Err(fail(
            RefgenStatus::NullArgument,
            format!("{name} must not be null"),
        ));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(RefgenStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn optional_str<'a>(ptr: *const c_char, name: &str) -> Result<Option<&'a str>, RefgenStatus> {
    if ptr.is_null() {
        Ok(None)
    } else {
        required_str(ptr, name).map(Some)
    }
}

fn parse_split(value: &str) -> Result<Split, RefgenStatus> {
    value
        .parse::<Split>()
        .map_err(|e| fail(RefgenStatus::Data, e))
}

fn open(path: &str) -> Result<BufReader<File>, RefgenStatus> {
    File::open(Path::new(path))
        .map(BufReader::new)
        .map_err(|e| fail(RefgenStatus::Io, format!("{path}: {e}")))
}

fn create(path: &str) -> Result<BufWriter<File>, RefgenStatus> {
    File::create(Path::new(path))
        .map(BufWriter::new)
        .map_err(|e| fail(RefgenStatus::Io, format!("{path}: {e}")))
}

/// Loads a corpus (JSONL) and optionally an entity registry (JSON).
/// On success stores a handle in `out`; release it with
/// [`refgen_corpus_free`].
///
/// # Safety
/// `corpus_path` must be a valid NUL-terminated path; `registry_path` may be
/// null; `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn refgen_corpus_load(
    corpus_path: *const c_char,
    registry_path: *const c_char,
    out: *mut *mut RefgenCorpus,
) -> RefgenStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RefgenStatus::NullArgument, "out must not be null");
        }
        let corpus_path = match required_str(corpus_path, "corpus_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let registry_path = match optional_str(registry_path, "registry_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let reader = match open(corpus_path) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let mut corpus = match parse_corpus(reader) {
            Ok(c) => c,
            Err(e) => return fail(RefgenStatus::Parse, e.to_string()),
        };
        if let Some(path) = registry_path {
            let reader = match open(path) {
                Ok(r) => r,
                Err(status) => return status,
            };
            corpus.registry = match EntityRegistry::from_json_reader(reader) {
                Ok(r) => r,
                Err(e) => return fail(RefgenStatus::Parse, e.to_string()),
            };
        }
        *out = Box::into_raw(Box::new(RefgenCorpus { inner: corpus }));
        RefgenStatus::Ok
    })
}

/// Releases a corpus handle. Null is a no-op.
///
/// # Safety
/// `corpus` must be null or a pointer returned by [`refgen_corpus_load`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn refgen_corpus_free(corpus: *mut RefgenCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

unsafe fn corpus_ref<'a>(ptr: *const RefgenCorpus) -> Result<&'a Corpus, RefgenStatus> {
    if ptr.is_null() {
        return Err(fail(RefgenStatus::NullArgument, "corpus must not be null"));
    }
    Ok(&(*ptr).inner)
}

fn split_filter(corpus: &Corpus, split: Option<Split>) -> impl Iterator<Item = &refgen::corpus::Document> {
    corpus
        .documents
        .iter()
        .filter(move |d| split.is_none_or(|s| d.split == s))
}

/// Number of documents, optionally restricted to one split
/// (`"train"`/`"dev"`/`"test"`; null counts everything).
///
/// # Safety
/// `corpus` must be a live handle; `split` may be null; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn refgen_corpus_document_count(
    corpus: *const RefgenCorpus,
    split: *const c_char,
    out: *mut usize,
) -> RefgenStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RefgenStatus::NullArgument, "out must not be null");
        }
        let corpus = match corpus_ref(corpus) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let split = match optional_str(split, "split") {
            Ok(None) => None,
            Ok(Some(s)) => match parse_split(s) {
                Ok(split) => Some(split),
                Err(status) => return status,
            },
            Err(status) => return status,
        };
        *out = split_filter(corpus, split).count();
        RefgenStatus::Ok
    })
}

/// Number of slots, optionally restricted to one split.
///
/// # Safety
/// As for [`refgen_corpus_document_count`].
#[no_mangle]
pub unsafe extern "C" fn refgen_corpus_slot_count(
    corpus: *const RefgenCorpus,
    split: *const c_char,
    out: *mut usize,
) -> RefgenStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RefgenStatus::NullArgument, "out must not be null");
        }
        let corpus = match corpus_ref(corpus) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let split = match optional_str(split, "split") {
            Ok(None) => None,
            Ok(Some(s)) => match parse_split(s) {
                Ok(split) => Some(split),
                Err(status) => return status,
            },
            Err(status) => return status,
        };
        *out = split_filter(corpus, split).map(|d| d.slots.len()).sum();
        RefgenStatus::Ok
    })
}

/// Character-level edit distance between two strings after lowercasing and
/// whitespace normalization.
///
/// # Safety
/// `a` and `b` must be valid NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn refgen_edit_distance(
    a: *const c_char,
    b: *const c_char,
    out: *mut u64,
) -> RefgenStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RefgenStatus::NullArgument, "out must not be null");
        }
        let a = match required_str(a, "a") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let b = match required_str(b, "b") {
            Ok(s) => s,
            Err(status) => return status,
        };
        *out = sed(a, b);
        RefgenStatus::Ok
    })
}

/// Trains a form model and writes it to `model_path`. `schema` is `"ml-s"`,
/// `"ml-l"` or `"ml-l-wsj"`.
///
/// # Safety
/// `corpus` must be a live handle; `schema` and `model_path` must be valid
/// strings.
#[no_mangle]
pub unsafe extern "C" fn refgen_train_to_file(
    corpus: *const RefgenCorpus,
    schema: *const c_char,
    seed: u64,
    model_path: *const c_char,
) -> RefgenStatus {
    guarded(|| {
        let corpus = match corpus_ref(corpus) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let schema = match required_str(schema, "schema") {
            Ok("ml-s") => FeatureSchema::MlS,
            Ok("ml-l") => FeatureSchema::MlL { wsj: false },
            Ok("ml-l-wsj") => FeatureSchema::MlL { wsj: true },
            Ok(other) => return fail(RefgenStatus::Data, format!("unknown schema `{other}`")),
            Err(status) => return status,
        };
        let model_path = match required_str(model_path, "model_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let model = match train(
            corpus,
            schema,
            ClassifierConfig::default(),
            ContextPolicy::DocDefault,
            seed,
        ) {
            Ok(m) => m,
            Err(e) => return fail(RefgenStatus::Data, e.to_string()),
        };
        let writer = match create(model_path) {
            Ok(w) => w,
            Err(status) => return status,
        };
        match model.save(writer) {
            Ok(()) => RefgenStatus::Ok,
            Err(e) => fail(RefgenStatus::Io, e.to_string()),
        }
    })
}

/// Runs a generator over one split and writes predictions JSONL.
/// `system` is `"rreg-s"`, `"rreg-l"`, `"ml-s"` or `"ml-l"`; the ML systems
/// need `model_path` (may be null otherwise).
///
/// # Safety
/// `corpus` must be a live handle; `split`, `system` and `predictions_path`
/// must be valid strings; `model_path` may be null.
#[no_mangle]
pub unsafe extern "C" fn refgen_generate_to_file(
    corpus: *const RefgenCorpus,
    split: *const c_char,
    system: *const c_char,
    model_path: *const c_char,
    predictions_path: *const c_char,
) -> RefgenStatus {
    guarded(|| {
        let corpus = match corpus_ref(corpus) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let split = match required_str(split, "split").and_then(parse_split) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let system = match required_str(system, "system") {
            Ok(s) => match s.parse::<SystemKind>() {
                Ok(system) => system,
                Err(e) => return fail(RefgenStatus::Data, e),
            },
            Err(status) => return status,
        };
        let model_path = match optional_str(model_path, "model_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let predictions_path = match required_str(predictions_path, "predictions_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let model = match model_path {
            Some(path) => {
                let reader = match open(path) {
                    Ok(r) => r,
                    Err(status) => return status,
                };
                match FormModel::load(reader) {
                    Ok(m) => Some(m),
                    Err(e) => return fail(RefgenStatus::Parse, e.to_string()),
                }
            }
            None => None,
        };
        let output = match generate(corpus, split, system, model.as_ref(), None) {
            Ok(o) => o,
            Err(e) => return fail(RefgenStatus::Data, e.to_string()),
        };
        let writer = match create(predictions_path) {
            Ok(w) => w,
            Err(status) => return status,
        };
        match write_predictions(writer, &output.predictions) {
            Ok(()) => RefgenStatus::Ok,
            Err(e) => fail(RefgenStatus::Io, e.to_string()),
        }
    })
}

/// Scores a predictions file against one split and returns the report as a
/// JSON string in `out_json` (release with [`refgen_string_free`]).
/// `token_level_sed` switches edit distance to token granularity;
/// `bleu_smoothing` enables add-one BLEU smoothing.
///
/// # Safety
/// `corpus` must be a live handle; `split` and `predictions_path` must be
/// valid strings; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn refgen_evaluate_to_json(
    corpus: *const RefgenCorpus,
    split: *const c_char,
    predictions_path: *const c_char,
    token_level_sed: c_int,
    bleu_smoothing: c_int,
    out_json: *mut *mut c_char,
) -> RefgenStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(RefgenStatus::NullArgument, "out_json must not be null");
        }
        let corpus = match corpus_ref(corpus) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let split = match required_str(split, "split").and_then(parse_split) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let predictions_path = match required_str(predictions_path, "predictions_path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let reader = match open(predictions_path) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let predictions = match read_predictions(reader) {
            Ok(p) => p,
            Err(e) => return fail(RefgenStatus::Parse, e.to_string()),
        };
        let options = EvalOptions {
            sed_granularity: if token_level_sed != 0 {
                SedGranularity::Token
            } else {
                SedGranularity::Char
            },
            bleu_smoothing: bleu_smoothing != 0,
        };
        let report = match evaluate(corpus, split, &predictions, options) {
            Ok(r) => r,
            Err(e) => return fail(RefgenStatus::Data, e.to_string()),
        };
        let json = match serde_json::to_string_pretty(&report) {
            Ok(j) => j,
            Err(e) => return fail(RefgenStatus::Internal, e.to_string()),
        };
        match CString::new(json) {
            Ok(cstring) => {
                *out_json = cstring.into_raw();
                RefgenStatus::Ok
            }
            Err(e) => fail(RefgenStatus::Internal, e.to_string()),
        }
    })
}

/// Releases a string returned by this API. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer returned by this API that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn refgen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
