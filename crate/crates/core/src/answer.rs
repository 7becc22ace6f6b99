//! Answer specifications, normalization, and matching.
//!
//! Predicted and gold answers both pass through [`normalize_answer`] before
//! comparison. The normalization pipeline is fixed: trim, casefold, strip one
//! trailing period, unwrap one layer of parentheses/brackets/quotes, then
//! parse per answer kind. Matching is exact on the canonical text except for
//! numeric kinds, which compare under a relative tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What shape of answer a question expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    FreeText,
    Integer,
    Decimal,
    MultipleChoice,
    Boolean,
}

impl AnswerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnswerKind::FreeText => "free_text",
            AnswerKind::Integer => "integer",
            AnswerKind::Decimal => "decimal",
            AnswerKind::MultipleChoice => "multiple_choice",
            AnswerKind::Boolean => "boolean",
        }
    }
}

/// Answer contract for one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerSpec {
    pub kind: AnswerKind,
    /// Choice labels or option texts; required for multiple choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    /// Relative tolerance for numeric comparison.
    #[serde(default = "default_rel_tol")]
    pub numeric_rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    1e-6
}

impl AnswerSpec {
    pub fn free_text() -> Self {
        Self {
            kind: AnswerKind::FreeText,
            options: None,
            numeric_rel_tol: default_rel_tol(),
        }
    }

    pub fn integer() -> Self {
        Self {
            kind: AnswerKind::Integer,
            options: None,
            numeric_rel_tol: default_rel_tol(),
        }
    }

    pub fn decimal() -> Self {
        Self {
            kind: AnswerKind::Decimal,
            options: None,
            numeric_rel_tol: default_rel_tol(),
        }
    }

    pub fn boolean() -> Self {
        Self {
            kind: AnswerKind::Boolean,
            options: None,
            numeric_rel_tol: default_rel_tol(),
        }
    }

    pub fn multiple_choice<S: Into<String>>(options: Vec<S>) -> Self {
        Self {
            kind: AnswerKind::MultipleChoice,
            options: Some(options.into_iter().map(Into::into).collect()),
            numeric_rel_tol: default_rel_tol(),
        }
    }

    /// Whether a guest-program `null` return can be a legitimate answer under
    /// this spec. Free text admits it (it normalizes to the text "none");
    /// multiple choice admits it only when some option normalizes to "none".
    pub fn admits_null(&self) -> bool {
        match self.kind {
            AnswerKind::FreeText => true,
            AnswerKind::MultipleChoice => self
                .options
                .iter()
                .flatten()
                .any(|o| basic_normalize(o) == "none"),
            _ => false,
        }
    }

    /// Validate structural invariants (choice count, tolerance sign).
    pub fn validate(&self) -> Result<()> {
        if self.numeric_rel_tol < 0.0 {
            return Err(Error::Config("numeric_rel_tol must be >= 0".into()));
        }
        if self.kind == AnswerKind::MultipleChoice {
            let opts = self.options.as_deref().unwrap_or(&[]);
            let mut distinct: Vec<String> = opts.iter().map(|o| basic_normalize(o)).collect();
            distinct.sort();
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::Config(
                    "multiple_choice requires >= 2 distinct options".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A normalized answer value: the parsed scalar plus its canonical rendering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerValue {
    pub value: serde_json::Value,
    pub canonical_text: String,
}

/// Trim, casefold, strip trailing periods, unwrap wrapping
/// parentheses/brackets/quotes. Runs to a fixpoint so normalization is
/// idempotent. Applied before kind-specific parsing.
fn basic_normalize(raw: &str) -> String {
    let mut s = raw.trim().to_lowercase();
    loop {
        let before = s.clone();
        s = s.trim().to_string();
        if let Some(stripped) = s.strip_suffix('.') {
            s = stripped.trim_end().to_string();
        }
        for (open, close) in [('(', ')'), ('[', ']'), ('"', '"'), ('\'', '\'')] {
            if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
                s = s[open.len_utf8()..s.len() - close.len_utf8()]
                    .trim()
                    .to_string();
                break;
            }
        }
        if s == before {
            break;
        }
    }
    s
}

fn parse_number(text: &str) -> Option<f64> {
    let cleaned: String = text.replace([',', '$'], "");
    let cleaned = cleaned.trim();
    if cleaned.is_empty() {
        return None;
    }
    if let Ok(v) = cleaned.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    // Fall back to the first number-looking run inside the text.
    let mut best: Option<f64> = None;
    let bytes = cleaned.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_digit() || ((c == '-' || c == '+') && i + 1 < bytes.len()) {
            let start = i;
            let mut j = i;
            if c == '-' || c == '+' {
                j += 1;
            }
            let mut seen_digit = false;
            let mut seen_dot = false;
            while j < bytes.len() {
                let d = bytes[j] as char;
                if d.is_ascii_digit() {
                    seen_digit = true;
                    j += 1;
                } else if d == '.' && !seen_dot {
                    seen_dot = true;
                    j += 1;
                } else {
                    break;
                }
            }
            if seen_digit {
                if let Ok(v) = cleaned[start..j].trim_end_matches('.').parse::<f64>() {
                    best = Some(v);
                    break;
                }
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

fn render_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Normalize a raw answer (string or scalar JSON value) under a spec.
///
/// Multiple-choice predictions may be either the option label or the full
/// option text; both normalize to the label position's canonical text.
pub fn normalize_answer(raw: &serde_json::Value, spec: &AnswerSpec) -> Result<AnswerValue> {
    let text = match raw {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::Bool(b) => b.to_string(),
        serde_json::Value::Null => "none".to_string(),
        other => other.to_string(),
    };
    let norm = basic_normalize(&text);
    match spec.kind {
        AnswerKind::FreeText => Ok(AnswerValue {
            value: serde_json::Value::String(norm.clone()),
            canonical_text: norm,
        }),
        AnswerKind::Integer | AnswerKind::Decimal => {
            // Numbers arrive as JSON numbers or as text such as "3.0000001".
            let parsed = match raw {
                serde_json::Value::Number(n) => n.as_f64(),
                serde_json::Value::Bool(_) | serde_json::Value::Null => None,
                _ => parse_number(&norm),
            };
            let v = parsed.ok_or_else(|| Error::UnparseableAnswer {
                kind: spec.kind.as_str(),
                raw: text.clone(),
            })?;
            Ok(AnswerValue {
                value: serde_json::json!(v),
                canonical_text: render_number(v),
            })
        }
        AnswerKind::MultipleChoice => {
            let options = spec.options.as_deref().unwrap_or(&[]);
            // Accept the label itself or the full option text.
            for opt in options {
                if basic_normalize(opt) == norm {
                    return Ok(AnswerValue {
                        value: serde_json::Value::String(norm.clone()),
                        canonical_text: norm,
                    });
                }
            }
            // Option texts like "Paris" may be given for a label list {a,b,c}
            // only when options carry "label) text" forms; map by containment.
            for opt in options {
                let o = basic_normalize(opt);
                if let Some((label, body)) = o.split_once(')') {
                    if body.trim() == norm && !label.trim().is_empty() {
                        return Ok(AnswerValue {
                            value: serde_json::Value::String(label.trim().to_string()),
                            canonical_text: label.trim().to_string(),
                        });
                    }
                }
            }
            Ok(AnswerValue {
                value: serde_json::Value::String(norm.clone()),
                canonical_text: norm,
            })
        }
        AnswerKind::Boolean => {
            let canon = match norm.as_str() {
                "true" | "yes" | "1" => "true",
                "false" | "no" | "0" => "false",
                other => other,
            };
            Ok(AnswerValue {
                value: serde_json::Value::String(canon.to_string()),
                canonical_text: canon.to_string(),
            })
        }
    }
}

/// Normalize a plain string answer.
pub fn normalize_answer_text(raw: &str, spec: &AnswerSpec) -> Result<AnswerValue> {
    normalize_answer(&serde_json::Value::String(raw.to_string()), spec)
}

/// Compare two normalized answers under a spec.
///
/// Numeric kinds use relative tolerance with an absolute floor of 1e-9 near
/// zero; everything else compares canonical text. Symmetric by construction.
pub fn answers_match(predicted: &AnswerValue, gold: &AnswerValue, spec: &AnswerSpec) -> bool {
    match spec.kind {
        AnswerKind::Integer | AnswerKind::Decimal => {
            let a = predicted.value.as_f64();
            let b = gold.value.as_f64();
            match (a, b) {
                (Some(a), Some(b)) => {
                    let diff = (a - b).abs();
                    let scale = a.abs().max(b.abs());
                    diff <= (spec.numeric_rel_tol * scale).max(1e-9)
                }
                _ => predicted.canonical_text == gold.canonical_text,
            }
        }
        _ => predicted.canonical_text == gold.canonical_text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trims_casefolds_strips_period() {
        let v = normalize_answer_text("  Brown.", &AnswerSpec::free_text()).unwrap();
        assert_eq!(v.canonical_text, "brown");
    }

    #[test]
    fn unwraps_choice_parentheses() {
        let spec = AnswerSpec::multiple_choice(vec!["A", "B", "C"]);
        let v = normalize_answer_text("(A)", &spec).unwrap();
        assert_eq!(v.canonical_text, "a");
    }

    #[test]
    fn parses_decimal() {
        let v = normalize_answer_text("3.0000001", &AnswerSpec::decimal()).unwrap();
        assert_eq!(v.value.as_f64().unwrap(), 3.0000001);
    }

    #[test]
    fn integer_from_number_and_text_match() {
        let spec = AnswerSpec::integer();
        let a = normalize_answer(&serde_json::json!(1.0), &spec).unwrap();
        let b = normalize_answer_text("1", &spec).unwrap();
        assert!(answers_match(&a, &b, &spec));
    }

    #[test]
    fn casefold_identity_match() {
        let spec = AnswerSpec::free_text();
        let a = normalize_answer_text("brown", &spec).unwrap();
        let b = normalize_answer_text("Brown", &spec).unwrap();
        assert!(answers_match(&a, &b, &spec));
    }

    #[test]
    fn relative_tolerance_match() {
        // |0.5000004 - 0.5| / 0.5000004 = 7.99e-7 <= 1e-6
        let spec = AnswerSpec::decimal();
        let a = normalize_answer_text("0.5000004", &spec).unwrap();
        let b = normalize_answer_text("0.5", &spec).unwrap();
        assert!(answers_match(&a, &b, &spec));
        assert!(answers_match(&b, &a, &spec));
    }

    #[test]
    fn tolerance_rejects_beyond() {
        let spec = AnswerSpec::decimal();
        let a = normalize_answer_text("0.51", &spec).unwrap();
        let b = normalize_answer_text("0.5", &spec).unwrap();
        assert!(!answers_match(&a, &b, &spec));
    }

    #[test]
    fn unparseable_integer_errors() {
        let err = normalize_answer_text("no idea", &AnswerSpec::integer());
        assert!(matches!(err, Err(Error::UnparseableAnswer { .. })));
    }

    #[test]
    fn null_admissibility() {
        assert!(AnswerSpec::free_text().admits_null());
        assert!(!AnswerSpec::integer().admits_null());
        assert!(!AnswerSpec::boolean().admits_null());
        assert!(AnswerSpec::multiple_choice(vec!["None", "all of them"]).admits_null());
        assert!(!AnswerSpec::multiple_choice(vec!["a", "b"]).admits_null());
    }

    #[test]
    fn choice_option_text_maps_to_label() {
        let spec = AnswerSpec::multiple_choice(vec!["a) red", "b) blue"]);
        let v = normalize_answer_text("blue", &spec).unwrap();
        assert_eq!(v.canonical_text, "b");
    }

    #[test]
    fn boolean_synonyms() {
        let spec = AnswerSpec::boolean();
        let a = normalize_answer_text("Yes.", &spec).unwrap();
        let b = normalize_answer_text("TRUE", &spec).unwrap();
        assert!(answers_match(&a, &b, &spec));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "[()\\[\\]'\"a-zA-Z0-9 .]{0,24}") {
            let spec = AnswerSpec::free_text();
            let once = normalize_answer_text(&raw, &spec).unwrap();
            let twice = normalize_answer_text(&once.canonical_text, &spec).unwrap();
            prop_assert_eq!(once.canonical_text, twice.canonical_text);
        }

        #[test]
        fn matching_is_reflexive_and_symmetric(raw in "[a-zA-Z0-9 ]{0,16}", other in "[a-zA-Z0-9 ]{0,16}") {
            let spec = AnswerSpec::free_text();
            let a = normalize_answer_text(&raw, &spec).unwrap();
            let b = normalize_answer_text(&other, &spec).unwrap();
            prop_assert!(answers_match(&a, &a, &spec));
            prop_assert_eq!(answers_match(&a, &b, &spec), answers_match(&b, &a, &spec));
        }
    }
}
