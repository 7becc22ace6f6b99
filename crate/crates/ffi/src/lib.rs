//! C ABI for the engine's offline-safe core: static program analysis,
//! answer normalization/matching, fenced-block extraction, harmonic means,
//! and switch-model inference.
//!
//! Conventions:
//! - functions return [`SymsolveStatus`]; `Ok` is 0,
//! - strings are NUL-terminated UTF-8; every `char*` the library returns
//!   must be released with [`symsolve_string_free`],
//! - handles ([`SymsolveSwitchModel`]) are opaque; release with their `_free`,
//! - on any non-Ok status, [`symsolve_last_error_message`] describes the
//!   failure for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use symsolve::answer::{answers_match, normalize_answer_text, AnswerKind, AnswerSpec};
use symsolve::evaluator::{analyze_static, AnalyzerConfig};
use symsolve::fenced::parse_fenced_blocks;
use symsolve::program::ProgramArtifact;
use symsolve::stats::{harmonic_mean, harmonic_mean_shifted};
use symsolve::switch::{decide, CriteriaVector, LogisticModel, CRITERIA_COUNT};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SymsolveStatus {
    Ok = 0,
    /// A required pointer was null or an argument was out of range.
    InvalidArgument = 1,
    /// Input was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input failed to parse (JSON, answer text, model file).
    ParseError = 3,
    /// Internal failure; see `symsolve_last_error_message`.
    Internal = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty"));
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn symsolve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `ptr` must be a pointer previously returned by a `symsolve_*` function
/// that documents string ownership transfer, and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symsolve_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SymsolveStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(SymsolveStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        SymsolveStatus::InvalidUtf8
    })
}

fn give_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn parse_kind(raw: &str) -> Result<AnswerKind, SymsolveStatus> {
    Ok(match raw {
        "free_text" => AnswerKind::FreeText,
        "integer" => AnswerKind::Integer,
        "decimal" => AnswerKind::Decimal,
        "boolean" => AnswerKind::Boolean,
        other => {
            set_error(format!(
                "unknown answer kind '{other}' (multiple_choice needs options and is not exposed over the C ABI)"
            ));
            return Err(SymsolveStatus::InvalidArgument);
        }
    })
}

/// Statically analyze guest source: syntax, triviality, placeholders,
/// example usage, raw-media imports. Writes a JSON issue report to `out`
/// (caller frees with `symsolve_string_free`).
///
/// # Safety
/// `source` must point to a NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn symsolve_analyze_source(
    source: *const c_char,
    out: *mut *mut c_char,
) -> SymsolveStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SymsolveStatus::InvalidArgument;
    }
    let source = match read_str(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let program = ProgramArtifact::new(source, 0);
    let issues = analyze_static(&program, &AnalyzerConfig::default());
    match serde_json::to_string(&issues) {
        Ok(json) => {
            *out = give_string(json);
            SymsolveStatus::Ok
        }
        Err(e) => {
            set_error(format!("serialization failed: {e}"));
            SymsolveStatus::Internal
        }
    }
}

/// Extract fenced blocks from model output as a JSON array of
/// `{"tag", "body"}` objects (caller frees `out`).
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn symsolve_parse_fenced_blocks(
    text: *const c_char,
    out: *mut *mut c_char,
) -> SymsolveStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SymsolveStatus::InvalidArgument;
    }
    let text = match read_str(text) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let blocks: Vec<serde_json::Value> = parse_fenced_blocks(text)
        .into_iter()
        .map(|b| serde_json::json!({"tag": b.tag, "body": b.body}))
        .collect();
    *out = give_string(serde_json::Value::Array(blocks).to_string());
    SymsolveStatus::Ok
}

/// Harmonic mean of `len` fractions; `shift` is added to every value first
/// (pass 0.0 for the plain mean, 0.01 for benchmark-table aggregation).
///
/// # Safety
/// `values` must point to `len` f64s; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symsolve_harmonic_mean(
    values: *const f64,
    len: usize,
    shift: f64,
    out: *mut f64,
) -> SymsolveStatus {
    if values.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SymsolveStatus::InvalidArgument;
    }
    let slice = std::slice::from_raw_parts(values, len);
    let result = if shift == 0.0 {
        harmonic_mean(slice)
    } else {
        harmonic_mean_shifted(slice, shift)
    };
    match result {
        Ok(value) => {
            *out = value;
            SymsolveStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            SymsolveStatus::InvalidArgument
        }
    }
}

/// Normalize an answer under a kind ("free_text" | "integer" | "decimal" |
/// "boolean"); writes the canonical text to `out` (caller frees).
///
/// # Safety
/// `raw` and `kind` must point to NUL-terminated strings; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symsolve_normalize_answer(
    raw: *const c_char,
    kind: *const c_char,
    out: *mut *mut c_char,
) -> SymsolveStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SymsolveStatus::InvalidArgument;
    }
    let raw = match read_str(raw) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let kind = match read_str(kind).and_then(|k| parse_kind(k)) {
        Ok(k) => k,
        Err(status) => return status,
    };
    let spec = AnswerSpec {
        kind,
        options: None,
        numeric_rel_tol: 1e-6,
    };
    match normalize_answer_text(raw, &spec) {
        Ok(value) => {
            *out = give_string(value.canonical_text);
            SymsolveStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            SymsolveStatus::ParseError
        }
    }
}

/// Whether two raw answers match under a kind; writes 1 or 0 to `out`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn symsolve_answers_match(
    predicted: *const c_char,
    gold: *const c_char,
    kind: *const c_char,
    out: *mut i32,
) -> SymsolveStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SymsolveStatus::InvalidArgument;
    }
    let predicted = match read_str(predicted) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let gold = match read_str(gold) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let kind = match read_str(kind).and_then(|k| parse_kind(k)) {
        Ok(k) => k,
        Err(status) => return status,
    };
    let spec = AnswerSpec {
        kind,
        options: None,
        numeric_rel_tol: 1e-6,
    };
    let a = normalize_answer_text(predicted, &spec);
    let b = normalize_answer_text(gold, &spec);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            *out = answers_match(&a, &b, &spec) as i32;
            SymsolveStatus::Ok
        }
        (Err(e), _) | (_, Err(e)) => {
            set_error(e.to_string());
            SymsolveStatus::ParseError
        }
    }
}

/// Opaque trained switch model.
pub struct SymsolveSwitchModel {
    inner: LogisticModel,
}

/// Load a switch model from its JSON document; returns a handle or null on
/// failure (see `symsolve_last_error_message`). Free with
/// [`symsolve_switch_model_free`].
///
/// # Safety
/// `json` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn symsolve_switch_model_from_json(
    json: *const c_char,
) -> *mut SymsolveSwitchModel {
    let json = match read_str(json) {
        Ok(s) => s,
        Err(_) => return std::ptr::null_mut(),
    };
    match serde_json::from_str::<LogisticModel>(json) {
        Ok(inner) => Box::into_raw(Box::new(SymsolveSwitchModel { inner })),
        Err(e) => {
            set_error(format!("bad model JSON: {e}"));
            std::ptr::null_mut()
        }
    }
}

/// Routing decision for ten criteria scores: writes the synthesis
/// probability and 1 (synthesis) or 0 (chain of thought).
///
/// # Safety
/// `model` must be a live handle from `symsolve_switch_model_from_json`;
/// `scores` must point to `len` f64s; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn symsolve_switch_model_decide(
    model: *const SymsolveSwitchModel,
    scores: *const f64,
    len: usize,
    out_probability: *mut f64,
    out_synthesis: *mut i32,
) -> SymsolveStatus {
    if model.is_null() || scores.is_null() || out_probability.is_null() || out_synthesis.is_null() {
        set_error("null pointer argument");
        return SymsolveStatus::InvalidArgument;
    }
    if len != CRITERIA_COUNT {
        set_error(format!("expected {CRITERIA_COUNT} scores, got {len}"));
        return SymsolveStatus::InvalidArgument;
    }
    let slice = std::slice::from_raw_parts(scores, len);
    let mut array = [0.0f64; CRITERIA_COUNT];
    array.copy_from_slice(slice);
    let vector = CriteriaVector::new(array);
    let (probability, decision) = decide(&(*model).inner, &vector);
    *out_probability = probability;
    *out_synthesis = matches!(decision, symsolve::switch::Decision::Synthesis) as i32;
    SymsolveStatus::Ok
}

/// Release a switch model handle.
///
/// # Safety
/// `model` must be a handle from `symsolve_switch_model_from_json`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn symsolve_switch_model_free(model: *mut SymsolveSwitchModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(text: &str) -> CString {
        CString::new(text).expect("no interior NULs")
    }

    #[test]
    fn analyze_reports_trivial() {
        let source = cstr("def solve(symbols):\n    return 1\n");
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { symsolve_analyze_source(source.as_ptr(), &mut out) };
        assert_eq!(status, SymsolveStatus::Ok);
        let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { symsolve_string_free(out) };
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["trivial"], serde_json::json!(true));
        assert_eq!(value["syntax_error"], serde_json::json!(false));
    }

    #[test]
    fn null_source_is_invalid() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { symsolve_analyze_source(std::ptr::null(), &mut out) };
        assert_eq!(status, SymsolveStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(symsolve_last_error_message()) };
        assert!(!msg.to_bytes().is_empty());
    }

    #[test]
    fn harmonic_mean_roundtrip() {
        let values = [0.5f64, 0.25];
        let mut out = 0.0f64;
        let status = unsafe { symsolve_harmonic_mean(values.as_ptr(), 2, 0.0, &mut out) };
        assert_eq!(status, SymsolveStatus::Ok);
        assert!((out - 1.0 / 3.0).abs() < 1e-12);
        let status = unsafe { symsolve_harmonic_mean(values.as_ptr(), 0, 0.0, &mut out) };
        assert_eq!(status, SymsolveStatus::InvalidArgument);
    }

    #[test]
    fn answers_match_over_ffi() {
        let mut out = 0i32;
        let status = unsafe {
            symsolve_answers_match(
                cstr("  Brown.").as_ptr(),
                cstr("brown").as_ptr(),
                cstr("free_text").as_ptr(),
                &mut out,
            )
        };
        assert_eq!(status, SymsolveStatus::Ok);
        assert_eq!(out, 1);
    }

    #[test]
    fn normalize_answer_over_ffi() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe {
            symsolve_normalize_answer(cstr("(A).").as_ptr(), cstr("free_text").as_ptr(), &mut out)
        };
        assert_eq!(status, SymsolveStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { symsolve_string_free(out) };
        assert_eq!(text, "a");
    }

    #[test]
    fn switch_model_handle_lifecycle() {
        let json = r#"{
            "weights": [0,0,0,0,0,0,0,0,0,4.0],
            "bias": -2.0,
            "threshold": 0.5,
            "training_meta": {"sample_count": 4, "l2_strength": 1e-4, "converged": true}
        }"#;
        let model = unsafe { symsolve_switch_model_from_json(cstr(json).as_ptr()) };
        assert!(!model.is_null());
        let mut probability = 0.0f64;
        let mut synthesis = -1i32;
        let scores = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9f64];
        let status = unsafe {
            symsolve_switch_model_decide(
                model,
                scores.as_ptr(),
                10,
                &mut probability,
                &mut synthesis,
            )
        };
        assert_eq!(status, SymsolveStatus::Ok);
        assert_eq!(synthesis, 1);
        assert!(probability > 0.5);

        let status = unsafe {
            symsolve_switch_model_decide(
                model,
                scores.as_ptr(),
                9,
                &mut probability,
                &mut synthesis,
            )
        };
        assert_eq!(status, SymsolveStatus::InvalidArgument);
        unsafe { symsolve_switch_model_free(model) };
    }

    #[test]
    fn fenced_blocks_over_ffi() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let text = cstr("```json\n{}\n```\n```python\npass\n```");
        let status = unsafe { symsolve_parse_fenced_blocks(text.as_ptr(), &mut out) };
        assert_eq!(status, SymsolveStatus::Ok);
        let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { symsolve_string_free(out) };
        let blocks: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[1]["tag"], "python");
    }
}
