//! Validation diagnostics and the rule registry.
//!
//! Every finding produced anywhere in this crate (parsing, semantic
//! validation, corpus loading, comparison pre-checks) is a [`Diagnostic`]
//! carrying a stable rule id drawn from [`rule_registry`]. Diagnostics are
//! data, never panics: callers decide what to do with them.

use serde::Serialize;
use std::fmt;

/// How bad a finding is. Errors make a document unusable for evaluation;
/// warnings flag likely authoring mistakes that still have defined semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A single validation finding at a document path.
///
/// `path` is slash-separated from the document root, e.g.
/// `/inclusion_criteria/values/1/operator`. Serializes to the JSON-lines
/// shape `{"severity", "rule_id", "path", "message"}` consumed by the CLI
/// and CI pipelines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule_id: &'static str,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(rule_id: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule_id,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(
        rule_id: &'static str,
        path: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            rule_id,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} [{}] {}",
            self.severity,
            if self.path.is_empty() { "/" } else { &self.path },
            self.rule_id,
            self.message
        )
    }
}

/// One entry of the published rule registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: &'static str,
    pub severity: Severity,
    pub description: &'static str,
}

/// Stable rule identifiers. Referenced by the validator, the parser, and
/// the fixture-per-rule test discipline.
pub mod rules {
    pub const JSON_MALFORMED: &str = "json-malformed";
    pub const FILE_UNREADABLE: &str = "file-unreadable";
    pub const TYPE_MISMATCH: &str = "type-mismatch";
    pub const TITLE_REQUIRED: &str = "title-required";
    pub const TITLE_EMPTY: &str = "title-empty";
    pub const INCLUSION_CRITERIA_REQUIRED: &str = "inclusion-criteria-required";
    pub const CRITERION_TYPE_REQUIRED: &str = "criterion-type-required";
    pub const ENUM_VALUE_INVALID: &str = "enum-value-invalid";
    pub const VALUE_NOT_SCALAR: &str = "value-not-scalar";
    pub const CREATED_AT_FORMAT: &str = "created-at-format";
    pub const PUBLISHED_AT_FORMAT: &str = "published-at-format";
    pub const CODE_INCOMPLETE: &str = "code-incomplete";
    pub const LEAF_COMPOSITE_EXCLUSIVE: &str = "leaf-composite-exclusive";
    pub const LEAF_TEST_MISSING: &str = "leaf-test-missing";
    pub const COMPOSITE_EMPTY: &str = "composite-empty";
    pub const COMPOSITE_SINGLE_CHILD: &str = "composite-single-child";
    pub const EXCLUSION_CRITERIA_EMPTY: &str = "exclusion-criteria-empty";
    pub const CHILDREN_DUPLICATE: &str = "children-duplicate";
    pub const LOGICAL_OPERATOR_MISSING: &str = "logical-operator-missing";
    pub const LOGICAL_OPERATOR_ON_LEAF: &str = "logical-operator-on-leaf";
    pub const AT_LEAST_ARGUMENTS_REQUIRED: &str = "at_least-arguments-required";
    pub const AT_LEAST_ARGUMENT_INVALID: &str = "at_least-argument-invalid";
    pub const AT_LEAST_ZERO: &str = "at_least-zero";
    pub const AT_LEAST_UNSATISFIABLE: &str = "at_least-unsatisfiable";
    pub const REGEX_PATTERN_REQUIRED: &str = "regex-pattern-required";
    pub const REGEX_PATTERN_INVALID: &str = "regex-pattern-invalid";
    pub const REGEX_PATTERN_WITHOUT_OPERATOR: &str = "regex-pattern-without-operator";
    pub const REGEX_FLAGS_INVALID: &str = "regex-flags-invalid";
    pub const REGEX_FLAGS_WITHOUT_PATTERN: &str = "regex-flags-without-pattern";
    pub const ATTRIBUTE_COMPOSITION: &str = "attribute-composition";
    pub const REFERENCE_NOT_URL: &str = "reference-not-url";
    pub const COMPARE_PRESENCE_ONLY: &str = "compare-presence-only";
}

use rules::*;
use Severity::{Error, Warning};

const REGISTRY: &[Rule] = &[
    Rule {
        id: JSON_MALFORMED,
        severity: Error,
        description: "document is not well-formed JSON; the message carries the byte offset",
    },
    Rule {
        id: FILE_UNREADABLE,
        severity: Error,
        description: "a corpus file could not be read",
    },
    Rule {
        id: TYPE_MISMATCH,
        severity: Error,
        description: "a property holds a JSON value of the wrong type",
    },
    Rule {
        id: TITLE_REQUIRED,
        severity: Error,
        description: "title is required",
    },
    Rule {
        id: TITLE_EMPTY,
        severity: Error,
        description: "title must not be empty or whitespace-only",
    },
    Rule {
        id: INCLUSION_CRITERIA_REQUIRED,
        severity: Error,
        description: "inclusion_criteria is required",
    },
    Rule {
        id: CRITERION_TYPE_REQUIRED,
        severity: Error,
        description: "every criterion must carry the type property",
    },
    Rule {
        id: ENUM_VALUE_INVALID,
        severity: Error,
        description: "a property holds a value outside its enumeration",
    },
    Rule {
        id: VALUE_NOT_SCALAR,
        severity: Error,
        description: "criterion values must be a boolean, a finite number, or text; objects and arrays are not evaluable",
    },
    Rule {
        id: CREATED_AT_FORMAT,
        severity: Error,
        description: "created_at must be an ISO 8601 calendar date (YYYY-MM-DD)",
    },
    Rule {
        id: PUBLISHED_AT_FORMAT,
        severity: Error,
        description: "published_at must be an RFC 3339 timestamp in UTC",
    },
    Rule {
        id: CODE_INCOMPLETE,
        severity: Error,
        description: "a code object must carry non-empty system and code",
    },
    Rule {
        id: LEAF_COMPOSITE_EXCLUSIVE,
        severity: Error,
        description: "a criterion cannot carry both leaf test properties and nested values",
    },
    Rule {
        id: LEAF_TEST_MISSING,
        severity: Error,
        description: "a leaf criterion must carry a name, an attribute test, or a code",
    },
    Rule {
        id: COMPOSITE_EMPTY,
        severity: Error,
        description: "a composite criterion must have at least one child",
    },
    Rule {
        id: COMPOSITE_SINGLE_CHILD,
        severity: Warning,
        description: "a composite with a single child reduces to that child",
    },
    Rule {
        id: EXCLUSION_CRITERIA_EMPTY,
        severity: Warning,
        description: "exclusion_criteria is an empty composite and excludes nothing",
    },
    Rule {
        id: CHILDREN_DUPLICATE,
        severity: Error,
        description: "children of a composite must be unique under canonical equality",
    },
    Rule {
        id: LOGICAL_OPERATOR_MISSING,
        severity: Warning,
        description: "composite without logical_operator defaults to AND",
    },
    Rule {
        id: LOGICAL_OPERATOR_ON_LEAF,
        severity: Error,
        description: "logical_operator is only meaningful on a criterion with nested values",
    },
    Rule {
        id: AT_LEAST_ARGUMENTS_REQUIRED,
        severity: Error,
        description: "AT_LEAST must carry its count in logical_operator_arguments",
    },
    Rule {
        id: AT_LEAST_ARGUMENT_INVALID,
        severity: Error,
        description: "the first AT_LEAST argument must be a non-negative integer",
    },
    Rule {
        id: AT_LEAST_ZERO,
        severity: Warning,
        description: "AT_LEAST 0 is vacuously true",
    },
    Rule {
        id: AT_LEAST_UNSATISFIABLE,
        severity: Error,
        description: "AT_LEAST requires more children than the composite has",
    },
    Rule {
        id: REGEX_PATTERN_REQUIRED,
        severity: Error,
        description: "operator regex requires regex_pattern",
    },
    Rule {
        id: REGEX_PATTERN_INVALID,
        severity: Error,
        description: "regex_pattern does not compile under the portable dialect",
    },
    Rule {
        id: REGEX_PATTERN_WITHOUT_OPERATOR,
        severity: Error,
        description: "regex_pattern requires operator regex",
    },
    Rule {
        id: REGEX_FLAGS_INVALID,
        severity: Error,
        description: "regex_flags must be a subset of i, m, s",
    },
    Rule {
        id: REGEX_FLAGS_WITHOUT_PATTERN,
        severity: Error,
        description: "regex_flags is only meaningful alongside regex_pattern",
    },
    Rule {
        id: ATTRIBUTE_COMPOSITION,
        severity: Error,
        description: "attribute, operator, and value must be used together",
    },
    Rule {
        id: REFERENCE_NOT_URL,
        severity: Warning,
        description: "references should be URLs",
    },
    Rule {
        id: COMPARE_PRESENCE_ONLY,
        severity: Error,
        description: "truth-table comparison requires presence leaves only",
    },
];

/// The stable, documented enumeration of every rule this crate can report.
pub fn rule_registry() -> &'static [Rule] {
    REGISTRY
}

/// Look up a rule by id.
pub fn find_rule(id: &str) -> Option<&'static Rule> {
    REGISTRY.iter().find(|r| r.id == id)
}

/// Deterministic reporting order: by document path, then rule id, then message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.path, a.rule_id, &a.message).cmp(&(&b.path, b.rule_id, &b.message))
    });
}
