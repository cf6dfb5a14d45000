//! Parsing OSD documents from UTF-8 JSON bytes, and the canonical
//! serializer.
//!
//! Parsing never produces a partial [`Definition`]: either the whole
//! document types correctly and passes semantic validation with zero
//! error-severity findings, or the full list of diagnostics comes back.
//! Warnings do not block parsing; re-run [`crate::validate`] on the parsed
//! definition to collect them.

use std::collections::BTreeMap;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use serde_json::Value;

use crate::diagnostic::{rules, sort_diagnostics, Diagnostic, Severity};
use crate::model::{
    json_kind, Category, CodeRef, ComparisonOperator, Criterion, CriterionType, Definition,
    DefinitionType, LogicalOperator, Scalar, Scope, Status,
};
use crate::validate::validate;

/// Parse one OSD document. On any error-severity finding the result is the
/// complete diagnostic list, sorted by path; a returned definition always
/// validates with zero errors.
pub fn parse_definition(input: &[u8]) -> Result<Definition, Vec<Diagnostic>> {
    let root: Value = match serde_json::from_slice(input) {
        Ok(v) => v,
        Err(err) => {
            let offset = byte_offset(input, err.line(), err.column());
            return Err(vec![Diagnostic::error(
                rules::JSON_MALFORMED,
                "",
                format!("malformed JSON at byte {offset}: {err}"),
            )]);
        }
    };

    let mut diags = Vec::new();
    let definition = definition_from_value(&root, &mut diags);
    if let Some(definition) = &definition {
        diags.extend(validate(definition));
    }
    sort_diagnostics(&mut diags);

    match definition {
        Some(definition) if !diags.iter().any(|d| d.severity == Severity::Error) => {
            Ok(definition)
        }
        _ => Err(diags),
    }
}

/// Canonical byte form: UTF-8, two-space indentation, documented property
/// order, trailing newline. Byte-for-byte deterministic.
pub fn serialize_definition(definition: &Definition) -> Vec<u8> {
    let mut bytes =
        serde_json::to_vec_pretty(definition).expect("definition serialization is infallible");
    bytes.push(b'\n');
    bytes
}

/// Translate serde_json's 1-based line/column into a byte offset.
fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut offset = 0;
    for (i, b) in input.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if *b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(input.len())
}

fn definition_from_value(root: &Value, diags: &mut Vec<Diagnostic>) -> Option<Definition> {
    let Value::Object(obj) = root else {
        diags.push(Diagnostic::error(
            rules::TYPE_MISMATCH,
            "",
            format!("expected an object at the document root, found {}", json_kind(root)),
        ));
        return None;
    };

    let mut extra = BTreeMap::new();

    let mut title = None;
    let mut description = None;
    let mut scope = None;
    let mut created_at = None;
    let mut published_in = None;
    let mut published_at = None;
    let mut published_by = Vec::new();
    let mut authors = Vec::new();
    let mut location = None;
    let mut language = None;
    let mut organization = None;
    let mut status = None;
    let mut keywords = Vec::new();
    let mut category = None;
    let mut version = None;
    let mut open_syndrome_version = None;
    let mut definition_type = None;
    let mut surveillance_system_type = None;
    let mut inclusion_criteria = None;
    let mut exclusion_criteria = None;
    let mut references = Vec::new();

    for (key, value) in obj {
        // JSON null is treated as "property absent" everywhere.
        if value.is_null() {
            continue;
        }
        let path = format!("/{key}");
        match key.as_str() {
            "title" => title = expect_text(value, &path, diags),
            "description" => description = expect_text(value, &path, diags),
            "scope" => scope = expect_enum(value, &path, Scope::from_str, Scope::allowed(), diags),
            "created_at" => created_at = expect_date(value, &path, diags),
            "published_in" => published_in = expect_text(value, &path, diags),
            "published_at" => published_at = expect_timestamp(value, &path, diags),
            "published_by" => published_by = expect_text_list(value, &path, diags),
            "authors" => authors = expect_text_list(value, &path, diags),
            "location" => location = expect_text(value, &path, diags),
            "language" => language = expect_text(value, &path, diags),
            "organization" => organization = expect_text(value, &path, diags),
            "status" => {
                status = expect_enum(value, &path, Status::from_str, Status::allowed(), diags)
            }
            "keywords" => keywords = expect_text_list(value, &path, diags),
            "category" => {
                category = expect_enum(value, &path, Category::from_str, Category::allowed(), diags)
            }
            "version" => version = expect_text(value, &path, diags),
            "open_syndrome_version" => open_syndrome_version = expect_text(value, &path, diags),
            "definition_type" => {
                definition_type = expect_enum(
                    value,
                    &path,
                    DefinitionType::from_str,
                    DefinitionType::allowed(),
                    diags,
                )
            }
            "surveillance_system_type" => {
                surveillance_system_type = expect_text(value, &path, diags)
            }
            "inclusion_criteria" => inclusion_criteria = criterion_from_value(value, &path, diags),
            "exclusion_criteria" => exclusion_criteria = criterion_from_value(value, &path, diags),
            "references" => references = expect_text_list(value, &path, diags),
            _ => {
                extra.insert(key.clone(), value.clone());
            }
        }
    }

    if !obj.contains_key("title") || obj.get("title").is_some_and(Value::is_null) {
        diags.push(Diagnostic::error(
            rules::TITLE_REQUIRED,
            "/title",
            "missing required property title",
        ));
    }
    if !obj.contains_key("inclusion_criteria")
        || obj.get("inclusion_criteria").is_some_and(Value::is_null)
    {
        diags.push(Diagnostic::error(
            rules::INCLUSION_CRITERIA_REQUIRED,
            "/inclusion_criteria",
            "missing required property inclusion_criteria",
        ));
    }

    let (Some(title), Some(inclusion_criteria)) = (title, inclusion_criteria) else {
        // A typed definition needs both; diagnostics already explain why.
        return None;
    };

    Some(Definition {
        title,
        description,
        scope,
        created_at,
        published_in,
        published_at,
        published_by,
        authors,
        location,
        language,
        organization,
        status,
        keywords,
        category,
        version,
        open_syndrome_version,
        definition_type,
        surveillance_system_type,
        inclusion_criteria,
        exclusion_criteria,
        references,
        extra,
    })
}

fn criterion_from_value(
    value: &Value,
    path: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<Criterion> {
    let Value::Object(obj) = value else {
        diags.push(Diagnostic::error(
            rules::TYPE_MISMATCH,
            path,
            format!("expected a criterion object, found {}", json_kind(value)),
        ));
        return None;
    };

    let mut criterion = Criterion::default();
    let mut ok = true;
    let mut has_type = false;

    for (key, value) in obj {
        if value.is_null() {
            continue;
        }
        let p = format!("{path}/{key}");
        match key.as_str() {
            "type" => {
                has_type = true;
                match expect_enum(value, &p, CriterionType::from_str, CriterionType::allowed(), diags)
                {
                    Some(t) => criterion.criterion_type = t,
                    None => ok = false,
                }
            }
            "name" => criterion.name = check(expect_text(value, &p, diags), &mut ok),
            "description" => criterion.description = check(expect_text(value, &p, diags), &mut ok),
            "logical_operator" => {
                criterion.logical_operator = check(
                    expect_enum(value, &p, LogicalOperator::from_str, LogicalOperator::allowed(), diags),
                    &mut ok,
                )
            }
            "logical_operator_arguments" => {
                criterion.logical_operator_arguments =
                    check(expect_scalar_list(value, &p, diags), &mut ok)
            }
            "attribute" => criterion.attribute = check(expect_text(value, &p, diags), &mut ok),
            "value" => criterion.value = check(expect_scalar(value, &p, diags), &mut ok),
            "operator" => {
                criterion.operator = check(
                    expect_enum(
                        value,
                        &p,
                        ComparisonOperator::from_str,
                        ComparisonOperator::allowed(),
                        diags,
                    ),
                    &mut ok,
                )
            }
            "regex_pattern" => {
                criterion.regex_pattern = check(expect_text(value, &p, diags), &mut ok)
            }
            "regex_flags" => criterion.regex_flags = check(expect_text(value, &p, diags), &mut ok),
            "code" => criterion.code = check(code_from_value(value, &p, diags), &mut ok),
            "values" => match value {
                Value::Array(items) => {
                    let mut children = Vec::with_capacity(items.len());
                    for (index, item) in items.iter().enumerate() {
                        match criterion_from_value(item, &format!("{p}/{index}"), diags) {
                            Some(child) => children.push(child),
                            None => ok = false,
                        }
                    }
                    criterion.values = Some(children);
                }
                other => {
                    diags.push(Diagnostic::error(
                        rules::TYPE_MISMATCH,
                        &p,
                        format!("expected an array of criteria, found {}", json_kind(other)),
                    ));
                    ok = false;
                }
            },
            _ => {
                criterion.extra.insert(key.clone(), value.clone());
            }
        }
    }

    if !has_type {
        diags.push(Diagnostic::error(
            rules::CRITERION_TYPE_REQUIRED,
            format!("{path}/type"),
            "missing required property type",
        ));
        ok = false;
    }

    ok.then_some(criterion)
}

fn code_from_value(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<CodeRef> {
    let Value::Object(obj) = value else {
        diags.push(Diagnostic::error(
            rules::TYPE_MISMATCH,
            path,
            format!("expected a code object, found {}", json_kind(value)),
        ));
        return None;
    };

    let mut ok = true;
    let mut field = |name: &str| -> Option<String> {
        match obj.get(name) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Null) | None => {
                diags.push(Diagnostic::error(
                    rules::CODE_INCOMPLETE,
                    format!("{path}/{name}"),
                    format!("code object is missing {name}"),
                ));
                ok = false;
                None
            }
            Some(other) => {
                diags.push(Diagnostic::error(
                    rules::TYPE_MISMATCH,
                    format!("{path}/{name}"),
                    format!("expected a string, found {}", json_kind(other)),
                ));
                ok = false;
                None
            }
        }
    };

    let system = field("system");
    let code = field("code");
    let display = match obj.get("display") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Null) | None => None,
        Some(other) => {
            diags.push(Diagnostic::error(
                rules::TYPE_MISMATCH,
                format!("{path}/display"),
                format!("expected a string, found {}", json_kind(other)),
            ));
            ok = false;
            None
        }
    };

    if !ok {
        return None;
    }
    Some(CodeRef {
        system: system?,
        code: code?,
        display,
    })
}

fn check<T>(value: Option<T>, ok: &mut bool) -> Option<T> {
    if value.is_none() {
        *ok = false;
    }
    value
}

fn expect_text(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        other => {
            diags.push(Diagnostic::error(
                rules::TYPE_MISMATCH,
                path,
                format!("expected a string, found {}", json_kind(other)),
            ));
            None
        }
    }
}

fn expect_text_list(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Vec<String> {
    match value {
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for (index, item) in items.iter().enumerate() {
                if let Some(text) = expect_text(item, &format!("{path}/{index}"), diags) {
                    out.push(text);
                }
            }
            out
        }
        other => {
            diags.push(Diagnostic::error(
                rules::TYPE_MISMATCH,
                path,
                format!("expected an array of strings, found {}", json_kind(other)),
            ));
            Vec::new()
        }
    }
}

fn expect_enum<T>(
    value: &Value,
    path: &str,
    from_str: impl Fn(&str) -> Option<T>,
    allowed: &[&str],
    diags: &mut Vec<Diagnostic>,
) -> Option<T> {
    let text = expect_text(value, path, diags)?;
    match from_str(&text) {
        Some(v) => Some(v),
        None => {
            diags.push(Diagnostic::error(
                rules::ENUM_VALUE_INVALID,
                path,
                format!("{text:?} is not one of {}", allowed.join(", ")),
            ));
            None
        }
    }
}

fn expect_scalar(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<Scalar> {
    match Scalar::from_json(value) {
        Some(s) => Some(s),
        None => {
            diags.push(Diagnostic::error(
                rules::VALUE_NOT_SCALAR,
                path,
                format!(
                    "expected a boolean, finite number, or text, found {}",
                    json_kind(value)
                ),
            ));
            None
        }
    }
}

fn expect_scalar_list(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<Vec<Scalar>> {
    match value {
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            let mut ok = true;
            for (index, item) in items.iter().enumerate() {
                match expect_scalar(item, &format!("{path}/{index}"), diags) {
                    Some(s) => out.push(s),
                    None => ok = false,
                }
            }
            ok.then_some(out)
        }
        other => {
            diags.push(Diagnostic::error(
                rules::TYPE_MISMATCH,
                path,
                format!("expected an array of scalars, found {}", json_kind(other)),
            ));
            None
        }
    }
}

fn expect_date(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<NaiveDate> {
    let text = expect_text(value, path, diags)?;
    match NaiveDate::parse_from_str(&text, "%Y-%m-%d") {
        Ok(date) => Some(date),
        Err(_) => {
            diags.push(Diagnostic::error(
                rules::CREATED_AT_FORMAT,
                path,
                format!("{text:?} is not an ISO 8601 calendar date (YYYY-MM-DD)"),
            ));
            None
        }
    }
}

fn expect_timestamp(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<DateTime<Utc>> {
    let text = expect_text(value, path, diags)?;
    match DateTime::<FixedOffset>::parse_from_rfc3339(&text) {
        Ok(dt) if dt.offset().local_minus_utc() == 0 => Some(dt.with_timezone(&Utc)),
        Ok(_) => {
            diags.push(Diagnostic::error(
                rules::PUBLISHED_AT_FORMAT,
                path,
                format!("{text:?} must use the UTC offset (Z or +00:00)"),
            ));
            None
        }
        Err(_) => {
            diags.push(Diagnostic::error(
                rules::PUBLISHED_AT_FORMAT,
                path,
                format!("{text:?} is not an RFC 3339 timestamp"),
            ));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule_ids(diags: &[Diagnostic]) -> Vec<&'static str> {
        diags.iter().map(|d| d.rule_id).collect()
    }

    #[test]
    fn empty_object_reports_both_required_properties() {
        let diags = parse_definition(b"{}").unwrap_err();
        assert_eq!(
            rule_ids(&diags),
            vec![rules::INCLUSION_CRITERIA_REQUIRED, rules::TITLE_REQUIRED]
        );
    }

    #[test]
    fn malformed_json_reports_byte_offset() {
        let diags = parse_definition(b"{\n  \"title\": }").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule_id, rules::JSON_MALFORMED);
        assert!(diags[0].message.contains("byte 13"), "{}", diags[0].message);
    }

    #[test]
    fn regex_without_pattern_is_exactly_one_diagnostic() {
        let doc = br#"{
          "title": "t",
          "inclusion_criteria": {
            "type": "symptom",
            "attribute": "note",
            "operator": "regex"
          }
        }"#;
        let diags = parse_definition(doc).unwrap_err();
        assert_eq!(rule_ids(&diags), vec![rules::REGEX_PATTERN_REQUIRED]);
        assert_eq!(diags[0].path, "/inclusion_criteria/regex_pattern");
    }

    #[test]
    fn minimal_valid_document_parses() {
        let doc = br#"{"title": "t", "inclusion_criteria": {"type": "symptom", "name": "fever"}}"#;
        let definition = parse_definition(doc).unwrap();
        assert_eq!(definition.title, "t");
        assert_eq!(definition.inclusion_criteria.name.as_deref(), Some("fever"));
    }

    #[test]
    fn unknown_properties_round_trip() {
        let doc = br#"{"title": "t", "x": 1, "inclusion_criteria": {"type": "symptom", "name": "fever", "custom": "y"}}"#;
        let definition = parse_definition(doc).unwrap();
        let bytes = serialize_definition(&definition);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("\"x\": 1"), "{text}");
        assert!(text.contains("\"custom\": \"y\""), "{text}");
        assert_eq!(parse_definition(&bytes).unwrap(), definition);
    }

    #[test]
    fn serialization_is_deterministic() {
        let doc = br#"{"title": "t", "keywords": ["b", "a"], "inclusion_criteria": {"type": "symptom", "name": "fever"}}"#;
        let definition = parse_definition(doc).unwrap();
        assert_eq!(serialize_definition(&definition), serialize_definition(&definition));
    }

    #[test]
    fn type_mismatch_carries_path() {
        let doc = br#"{"title": "t", "keywords": "nope", "inclusion_criteria": {"type": "symptom", "name": "f"}}"#;
        let diags = parse_definition(doc).unwrap_err();
        assert_eq!(rule_ids(&diags), vec![rules::TYPE_MISMATCH]);
        assert_eq!(diags[0].path, "/keywords");
    }

    #[test]
    fn non_utc_timestamp_is_rejected() {
        let doc = br#"{"title": "t", "published_at": "2024-05-01T10:00:00+02:00",
                       "inclusion_criteria": {"type": "symptom", "name": "f"}}"#;
        let diags = parse_definition(doc).unwrap_err();
        assert_eq!(rule_ids(&diags), vec![rules::PUBLISHED_AT_FORMAT]);
    }

    #[test]
    fn null_means_absent() {
        let doc = br#"{"title": "t", "description": null,
                       "inclusion_criteria": {"type": "symptom", "name": "f"}}"#;
        let definition = parse_definition(doc).unwrap();
        assert_eq!(definition.description, None);
    }
}
