//! C ABI over `dce-core`.
//!
//! Snippets and pipelines are opaque handles. Every fallible call returns a
//! [`DceStatus`]; on failure a message is kept per thread and can be read
//! with [`dce_last_error`]. Strings handed out by this library are
//! NUL-terminated UTF-8 (JSON where noted) and must be released with
//! [`dce_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_double, size_t};

use dce_core::attribution::{attribute, select_candidates, AttributionConfig};
use dce_core::audit::audit;
use dce_core::classifier::HeuristicClassifier;
use dce_core::code_model::{split_lines, CodeSnippet, Language};
use dce_core::config::Settings;
use dce_core::harness::{DatasetRecord, Pipeline};
use dce_core::labels::GoldLine;
use dce_core::oracle::{findings, GoldAnnotation, LineFinding, Reason};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DceStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Config = 5,
    Analysis = 6,
    Panic = 7,
}

/// A parsed source snippet.
pub struct DceSnippet(CodeSnippet);

/// A configured analysis pipeline.
pub struct DcePipeline(Pipeline);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(DceStatus, String);

impl Fail {
    fn new(status: DceStatus, msg: impl ToString) -> Self {
        Fail(status, msg.to_string())
    }
}

/// Runs `f`, recording failures and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DceStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DceStatus::Panic
        }
    }
}

/// # Safety
/// `p` is NULL or a valid NUL-terminated string.
unsafe fn required_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(DceStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::new(DceStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is NULL or a valid NUL-terminated string.
unsafe fn optional_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        required_str(p, what).map(Some)
    }
}

fn out_ptr<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::new(DceStatus::NullArgument, "output pointer is NULL"));
    }
    Ok(())
}

fn to_c(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail::new(DceStatus::Analysis, "output contains NUL"))
}

fn json<T: serde::Serialize>(value: &T) -> Result<*mut c_char, Fail> {
    let text = serde_json::to_string(value).map_err(|e| Fail::new(DceStatus::Analysis, e))?;
    to_c(text)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `code` as `language` ("python" or "java").
///
/// # Safety
/// `code` and `language` are valid NUL-terminated strings; `out` is a valid
/// pointer. On success `*out` owns a handle for [`dce_snippet_free`].
#[no_mangle]
pub unsafe extern "C" fn dce_snippet_new(
    code: *const c_char,
    language: *const c_char,
    out: *mut *mut DceSnippet,
) -> DceStatus {
    guard(|| {
        out_ptr(out)?;
        let code = required_str(code, "code")?;
        let lang: Language = required_str(language, "language")?
            .parse()
            .map_err(|e| Fail::new(DceStatus::InvalidArgument, e))?;
        let snip = split_lines(code, lang).map_err(|e| Fail::new(DceStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(DceSnippet(snip)));
        Ok(())
    })
}

/// # Safety
/// `snippet` is NULL or a handle from [`dce_snippet_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dce_snippet_free(snippet: *mut DceSnippet) {
    if !snippet.is_null() {
        drop(Box::from_raw(snippet));
    }
}

/// Number of lines, or 0 for NULL.
///
/// # Safety
/// `snippet` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dce_snippet_len(snippet: *const DceSnippet) -> size_t {
    snippet.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `snippet` is NULL or a live handle.
unsafe fn snippet_ref<'a>(snippet: *const DceSnippet) -> Result<&'a CodeSnippet, Fail> {
    snippet
        .as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| Fail::new(DceStatus::NullArgument, "snippet is NULL"))
}

/// Static oracle findings as a JSON array of `{index, type, reason}`.
///
/// # Safety
/// `snippet` is a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dce_oracle_findings_json(snippet: *const DceSnippet, out_json: *mut *mut c_char) -> DceStatus {
    guard(|| {
        out_ptr(out_json)?;
        let snip = snippet_ref(snippet)?;
        *out_json = json(&findings(snip))?;
        Ok(())
    })
}

/// Per-line attribution with the built-in heuristic classifier and the
/// selected candidates, as `{"scores": [...], "candidates": {...}}`.
///
/// # Safety
/// `snippet` is a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dce_attribute_json(
    snippet: *const DceSnippet,
    tau: c_double,
    epsilon: c_double,
    out_json: *mut *mut c_char,
) -> DceStatus {
    guard(|| {
        out_ptr(out_json)?;
        let snip = snippet_ref(snippet)?;
        let scores = attribute(snip, &HeuristicClassifier, &AttributionConfig::default())
            .map_err(|e| Fail::new(DceStatus::Analysis, e))?;
        let candidates =
            select_candidates(&scores, tau, epsilon).map_err(|e| Fail::new(DceStatus::InvalidArgument, e))?;
        *out_json = json(&serde_json::json!({ "scores": scores, "candidates": candidates }))?;
        Ok(())
    })
}

/// Builds a pipeline from TOML settings (NULL for defaults). The LLM
/// endpoint and key are read from the environment, as for the CLI.
///
/// # Safety
/// `config_toml` is NULL or a valid string; `out` is a valid pointer. On
/// success `*out` owns a handle for [`dce_pipeline_free`].
#[no_mangle]
pub unsafe extern "C" fn dce_pipeline_new(config_toml: *const c_char, out: *mut *mut DcePipeline) -> DceStatus {
    guard(|| {
        out_ptr(out)?;
        let text = optional_str(config_toml, "config")?.unwrap_or("");
        let settings = Settings::parse(text, |k| std::env::var(k).ok()).map_err(|e| Fail::new(DceStatus::Config, e))?;
        let pipeline = settings.build_pipeline().map_err(|e| Fail::new(DceStatus::Config, e))?;
        *out = Box::into_raw(Box::new(DcePipeline(pipeline)));
        Ok(())
    })
}

/// # Safety
/// `pipeline` is NULL or a handle from [`dce_pipeline_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dce_pipeline_free(pipeline: *mut DcePipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Runs the pipeline on one snippet and returns its report as JSON. Stage
/// failures inside the run are listed in the report's `errors` and do not
/// make this call fail.
///
/// # Safety
/// `pipeline` and `snippet` are live handles, `record_id` a valid string and
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dce_pipeline_analyze_json(
    pipeline: *const DcePipeline,
    record_id: *const c_char,
    snippet: *const DceSnippet,
    out_json: *mut *mut c_char,
) -> DceStatus {
    guard(|| {
        out_ptr(out_json)?;
        let p = pipeline
            .as_ref()
            .ok_or_else(|| Fail::new(DceStatus::NullArgument, "pipeline is NULL"))?;
        let id = required_str(record_id, "record_id")?;
        let snip = snippet_ref(snippet)?;
        let report = p.0.run(&DatasetRecord::from_source(id, snip));
        *out_json = json(&report)?;
        Ok(())
    })
}

/// Audits a proposed fix of `original`. `gold_json` is NULL or a JSON array
/// of `{"index": n, "type": "unused" | "unreachable"}`.
///
/// # Safety
/// `original` is a live handle, `fixed` a valid string, `gold_json` NULL or
/// a valid string, and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dce_audit_json(
    original: *const DceSnippet,
    fixed: *const c_char,
    gold_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DceStatus {
    guard(|| {
        out_ptr(out_json)?;
        let snip = snippet_ref(original)?;
        let fixed = required_str(fixed, "fixed")?;
        let gold = match optional_str(gold_json, "gold_json")? {
            Some(text) => {
                let lines: Vec<GoldLine> =
                    serde_json::from_str(text).map_err(|e| Fail::new(DceStatus::InvalidArgument, e))?;
                Some(GoldAnnotation::from_lines(
                    lines
                        .into_iter()
                        .map(|g| LineFinding {
                            index: g.index,
                            kind: g.kind,
                            reason: Reason::InsertedPattern,
                        })
                        .collect(),
                ))
            }
            None => None,
        };
        *out_json = json(&audit(snip, gold.as_ref(), fixed))?;
        Ok(())
    })
}
