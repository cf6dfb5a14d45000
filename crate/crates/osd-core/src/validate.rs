//! Stage-one automated validation: the semantic composition rules of the
//! criterion meta-type, plus metadata checks not enforced by the type
//! system.
//!
//! Structural conformance (required properties, JSON types, enumerations,
//! date formats) is checked while parsing; this module covers everything a
//! well-typed [`Definition`] can still get wrong. All findings are
//! returned as [`Diagnostic`]s, never thrown, in deterministic order.

use std::collections::HashSet;

use crate::diagnostic::{rules, sort_diagnostics, Diagnostic};
use crate::model::{ComparisonOperator, Criterion, Definition, LogicalOperator};
use crate::regex_dialect;

/// Validate a definition. The list is empty iff the definition satisfies
/// every rule; warnings report constructs with defined but suspicious
/// semantics.
pub fn validate(definition: &Definition) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if definition.title.trim().is_empty() {
        diags.push(Diagnostic::error(
            rules::TITLE_EMPTY,
            "/title",
            "title must not be empty",
        ));
    }

    for (index, reference) in definition.references.iter().enumerate() {
        let lower = reference.trim().to_ascii_lowercase();
        if !(lower.starts_with("http://") || lower.starts_with("https://")) {
            diags.push(Diagnostic::warning(
                rules::REFERENCE_NOT_URL,
                format!("/references/{index}"),
                format!("reference {reference:?} is not a URL"),
            ));
        }
    }

    validate_criterion(
        &definition.inclusion_criteria,
        "/inclusion_criteria",
        false,
        &mut diags,
    );
    if let Some(exclusion) = &definition.exclusion_criteria {
        validate_criterion(exclusion, "/exclusion_criteria", true, &mut diags);
    }

    sort_diagnostics(&mut diags);
    diags
}

fn validate_criterion(
    criterion: &Criterion,
    path: &str,
    is_exclusion_root: bool,
    diags: &mut Vec<Diagnostic>,
) {
    if criterion.is_composite() {
        validate_composite(criterion, path, is_exclusion_root, diags);
    } else {
        validate_leaf(criterion, path, diags);
    }
}

fn validate_composite(
    criterion: &Criterion,
    path: &str,
    is_exclusion_root: bool,
    diags: &mut Vec<Diagnostic>,
) {
    let children = criterion.children();

    if criterion.has_leaf_test() {
        diags.push(Diagnostic::error(
            rules::LEAF_COMPOSITE_EXCLUSIVE,
            path,
            "criterion carries both leaf test properties and nested values",
        ));
    }

    if children.is_empty() {
        if is_exclusion_root {
            diags.push(Diagnostic::warning(
                rules::EXCLUSION_CRITERIA_EMPTY,
                path,
                "exclusion_criteria has no children and excludes nothing",
            ));
        } else {
            diags.push(Diagnostic::error(
                rules::COMPOSITE_EMPTY,
                path,
                "composite criterion has no children",
            ));
        }
        return;
    }

    if criterion.logical_operator.is_none() {
        diags.push(Diagnostic::warning(
            rules::LOGICAL_OPERATOR_MISSING,
            format!("{path}/logical_operator"),
            "composite without logical_operator defaults to AND",
        ));
    }

    if children.len() == 1 {
        diags.push(Diagnostic::warning(
            rules::COMPOSITE_SINGLE_CHILD,
            format!("{path}/values"),
            "composite with a single child reduces to that child",
        ));
    }

    let mut seen = HashSet::new();
    for (index, child) in children.iter().enumerate() {
        if !seen.insert(child.canonical_key()) {
            diags.push(Diagnostic::error(
                rules::CHILDREN_DUPLICATE,
                format!("{path}/values/{index}"),
                "duplicate of an earlier sibling under canonical equality",
            ));
        }
    }

    if criterion.effective_operator() == LogicalOperator::AtLeast {
        validate_at_least(criterion, path, children.len(), diags);
    }

    for (index, child) in children.iter().enumerate() {
        validate_criterion(child, &format!("{path}/values/{index}"), false, diags);
    }
}

fn validate_at_least(
    criterion: &Criterion,
    path: &str,
    child_count: usize,
    diags: &mut Vec<Diagnostic>,
) {
    let args = criterion
        .logical_operator_arguments
        .as_deref()
        .unwrap_or(&[]);
    let Some(first) = args.first() else {
        diags.push(Diagnostic::error(
            rules::AT_LEAST_ARGUMENTS_REQUIRED,
            format!("{path}/logical_operator_arguments"),
            "AT_LEAST must carry its count in logical_operator_arguments",
        ));
        return;
    };
    let Some(count) = first.as_count() else {
        diags.push(Diagnostic::error(
            rules::AT_LEAST_ARGUMENT_INVALID,
            format!("{path}/logical_operator_arguments/0"),
            format!(
                "AT_LEAST count must be a non-negative integer, found {} {first}",
                first.kind()
            ),
        ));
        return;
    };
    if count == 0 {
        diags.push(Diagnostic::warning(
            rules::AT_LEAST_ZERO,
            format!("{path}/logical_operator_arguments/0"),
            "AT_LEAST 0 is vacuously true",
        ));
    } else if count > child_count as u64 {
        diags.push(Diagnostic::error(
            rules::AT_LEAST_UNSATISFIABLE,
            format!("{path}/logical_operator_arguments/0"),
            format!("AT_LEAST {count} cannot be satisfied by {child_count} children"),
        ));
    }
}

fn validate_leaf(criterion: &Criterion, path: &str, diags: &mut Vec<Diagnostic>) {
    if criterion.logical_operator.is_some() {
        diags.push(Diagnostic::error(
            rules::LOGICAL_OPERATOR_ON_LEAF,
            format!("{path}/logical_operator"),
            "logical_operator on a criterion without nested values",
        ));
    }

    match criterion.operator {
        Some(ComparisonOperator::Regex) => {
            if criterion.attribute.is_none() {
                diags.push(Diagnostic::error(
                    rules::ATTRIBUTE_COMPOSITION,
                    format!("{path}/attribute"),
                    "operator regex names no attribute to match against",
                ));
            }
            match &criterion.regex_pattern {
                None => diags.push(Diagnostic::error(
                    rules::REGEX_PATTERN_REQUIRED,
                    format!("{path}/regex_pattern"),
                    "operator regex requires regex_pattern",
                )),
                Some(pattern) => validate_pattern(pattern, path, diags),
            }
        }
        Some(_) => {
            if criterion.attribute.is_none() {
                diags.push(Diagnostic::error(
                    rules::ATTRIBUTE_COMPOSITION,
                    format!("{path}/attribute"),
                    "operator is used in composition with attribute",
                ));
            }
            if criterion.value.is_none() {
                diags.push(Diagnostic::error(
                    rules::ATTRIBUTE_COMPOSITION,
                    format!("{path}/value"),
                    "comparison operator is used in composition with value",
                ));
            }
        }
        None => {
            if criterion.attribute.is_some() {
                diags.push(Diagnostic::error(
                    rules::ATTRIBUTE_COMPOSITION,
                    format!("{path}/operator"),
                    "attribute is used in composition with operator and value",
                ));
            } else if criterion.value.is_some() {
                diags.push(Diagnostic::error(
                    rules::ATTRIBUTE_COMPOSITION,
                    format!("{path}/value"),
                    "value is used in composition with attribute and operator",
                ));
            }
        }
    }

    if criterion.regex_pattern.is_some() && criterion.operator != Some(ComparisonOperator::Regex) {
        diags.push(Diagnostic::error(
            rules::REGEX_PATTERN_WITHOUT_OPERATOR,
            format!("{path}/regex_pattern"),
            "regex_pattern requires operator regex",
        ));
    }

    if let Some(flags) = &criterion.regex_flags {
        if criterion.regex_pattern.is_none() {
            diags.push(Diagnostic::error(
                rules::REGEX_FLAGS_WITHOUT_PATTERN,
                format!("{path}/regex_flags"),
                "regex_flags is used in composition with regex_pattern",
            ));
        } else if let Err(message) = regex_dialect::check_flags(flags) {
            diags.push(Diagnostic::error(
                rules::REGEX_FLAGS_INVALID,
                format!("{path}/regex_flags"),
                message,
            ));
        }
    }

    if let Some(code) = &criterion.code {
        if code.system.trim().is_empty() || code.code.trim().is_empty() {
            diags.push(Diagnostic::error(
                rules::CODE_INCOMPLETE,
                format!("{path}/code"),
                "code must carry non-empty system and code",
            ));
        }
    }

    if criterion.name.is_none() && criterion.attribute.is_none() && criterion.code.is_none() {
        diags.push(Diagnostic::error(
            rules::LEAF_TEST_MISSING,
            path,
            "leaf criterion carries no name, attribute test, or code",
        ));
    }
}

fn validate_pattern(pattern: &str, path: &str, diags: &mut Vec<Diagnostic>) {
    if let Err(err) = regex_dialect::check_pattern(pattern) {
        diags.push(Diagnostic::error(
            rules::REGEX_PATTERN_INVALID,
            format!("{path}/regex_pattern"),
            format!("pattern is outside the portable dialect: {err}"),
        ));
        return;
    }
    // The host engine is the backstop for anything the dialect recognizer
    // accepts but the engine cannot build (e.g. compiled size limits).
    if let Err(err) = regex_dialect::compile(pattern, "") {
        diags.push(Diagnostic::error(
            rules::REGEX_PATTERN_INVALID,
            format!("{path}/regex_pattern"),
            format!("pattern does not compile: {err}"),
        ));
    }
}

/// Check that every leaf of both criterion trees is a presence leaf.
/// Truth-table comparison is only defined over presence findings; anything
/// else reports `compare-presence-only`.
pub fn check_presence_only(definition: &Definition) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_presence_tree(&definition.inclusion_criteria, "/inclusion_criteria", &mut diags);
    if let Some(exclusion) = &definition.exclusion_criteria {
        check_presence_tree(exclusion, "/exclusion_criteria", &mut diags);
    }
    sort_diagnostics(&mut diags);
    diags
}

fn check_presence_tree(criterion: &Criterion, path: &str, diags: &mut Vec<Diagnostic>) {
    if criterion.is_composite() {
        for (index, child) in criterion.children().iter().enumerate() {
            check_presence_tree(child, &format!("{path}/values/{index}"), diags);
        }
    } else if criterion.has_leaf_test() || criterion.name.is_none() {
        diags.push(Diagnostic::error(
            rules::COMPARE_PRESENCE_ONLY,
            path,
            "leaf is not a presence test over a named finding",
        ));
    }
}
