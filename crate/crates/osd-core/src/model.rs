//! Typed in-memory representation of an OSD document.
//!
//! A [`Definition`] is a metadata block plus an inclusion criterion tree and
//! an optional exclusion tree. A [`Criterion`] is recursive: either a leaf
//! test (presence, comparison, regex, or code) or a composite combining
//! child criteria with a logical operator. All types are immutable after
//! construction and safe to share across threads.
//!
//! Serialization is canonical: UTF-8, two-space indentation, properties in
//! the documented order, unknown properties preserved and re-emitted in
//! sorted order. Serializing the same value twice yields identical bytes.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

use crate::normalize::normalize_name;

/// Level of specificity of a definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Broad,
    Specific,
}

/// Lifecycle status of a definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Draft,
    Published,
    Deprecated,
}

/// Case definition category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Confirmed,
    Probable,
    Suspected,
}

/// Whether the document defines a case or a syndromic indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitionType {
    CaseDefinition,
    SyndromicIndicator,
}

/// Classification of a criterion node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriterionType {
    Criteria,
    Syndrome,
    Symptom,
    Diagnosis,
    DiagnosticTest,
    ProfessionalJudgment,
    EpidemiologicalHistory,
    DemographicCriteria,
}

/// Logical operator combining composite children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalOperator {
    And,
    Or,
    AtLeast,
}

/// Comparison and matching operators for attribute leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonOperator {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
    Regex,
}

macro_rules! wire_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($variant => $text),+
                }
            }

            pub fn from_str(s: &str) -> Option<Self> {
                match s {
                    $($text => Some($variant),)+
                    _ => None,
                }
            }

            pub fn allowed() -> &'static [&'static str] {
                &[$($text),+]
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

wire_enum!(Scope {
    Scope::Broad => "broad",
    Scope::Specific => "specific",
});

wire_enum!(Status {
    Status::Draft => "draft",
    Status::Published => "published",
    Status::Deprecated => "deprecated",
});

wire_enum!(Category {
    Category::Confirmed => "confirmed",
    Category::Probable => "probable",
    Category::Suspected => "suspected",
});

wire_enum!(DefinitionType {
    DefinitionType::CaseDefinition => "case_definition",
    DefinitionType::SyndromicIndicator => "syndromic_indicator",
});

wire_enum!(CriterionType {
    CriterionType::Criteria => "criteria",
    CriterionType::Syndrome => "syndrome",
    CriterionType::Symptom => "symptom",
    CriterionType::Diagnosis => "diagnosis",
    CriterionType::DiagnosticTest => "diagnostic_test",
    CriterionType::ProfessionalJudgment => "professional_judgment",
    CriterionType::EpidemiologicalHistory => "epidemiological_history",
    CriterionType::DemographicCriteria => "demographic_criteria",
});

wire_enum!(LogicalOperator {
    LogicalOperator::And => "AND",
    LogicalOperator::Or => "OR",
    LogicalOperator::AtLeast => "AT_LEAST",
});

wire_enum!(ComparisonOperator {
    ComparisonOperator::Gt => ">",
    ComparisonOperator::Ge => ">=",
    ComparisonOperator::Lt => "<",
    ComparisonOperator::Le => "<=",
    ComparisonOperator::Eq => "==",
    ComparisonOperator::Ne => "!=",
    ComparisonOperator::Regex => "regex",
});

/// A scalar value: boolean, finite number, or text. Criterion values and
/// record attributes are restricted to scalars so evaluation stays total.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl Scalar {
    /// The scalar's kind, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Scalar::Bool(_) => "boolean",
            Scalar::Number(_) => "number",
            Scalar::Text(_) => "text",
        }
    }

    /// Interpret the scalar as a non-negative integer count, if it is one.
    pub fn as_count(&self) -> Option<u64> {
        match self {
            Scalar::Number(n) if n.fract() == 0.0 && *n >= 0.0 && *n <= u64::MAX as f64 => {
                Some(*n as u64)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Number(n) => write!(f, "{n}"),
            Scalar::Text(t) => f.write_str(t),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Bool(b) => serializer.serialize_bool(*b),
            Scalar::Number(n) => serializer.serialize_f64(*n),
            Scalar::Text(t) => serializer.serialize_str(t),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        Scalar::from_json(&value).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "expected a boolean, finite number, or string, found {}",
                json_kind(&value)
            ))
        })
    }
}

impl Scalar {
    /// Convert a JSON value to a scalar; `None` for null, objects, arrays,
    /// and non-finite numbers.
    pub fn from_json(value: &Value) -> Option<Scalar> {
        match value {
            Value::Bool(b) => Some(Scalar::Bool(*b)),
            Value::Number(n) => n.as_f64().filter(|f| f.is_finite()).map(Scalar::Number),
            Value::String(s) => Some(Scalar::Text(s.clone())),
            _ => None,
        }
    }
}

/// Human-readable name of a JSON value's type, for diagnostics.
pub(crate) fn json_kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// A system-agnostic clinical code reference (ICD, SNOMED CT, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRef {
    pub system: String,
    pub code: String,
    pub display: Option<String>,
}

impl CodeRef {
    pub fn new(system: impl Into<String>, code: impl Into<String>) -> Self {
        CodeRef {
            system: system.into(),
            code: code.into(),
            display: None,
        }
    }

    pub fn with_display(mut self, display: impl Into<String>) -> Self {
        self.display = Some(display.into());
        self
    }
}

impl Serialize for CodeRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("system", &self.system)?;
        map.serialize_entry("code", &self.code)?;
        if let Some(display) = &self.display {
            map.serialize_entry("display", display)?;
        }
        map.end()
    }
}

/// A recursive criterion node: a leaf test or a composite over children.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Criterion {
    pub criterion_type: CriterionType,
    pub name: Option<String>,
    pub description: Option<String>,
    pub logical_operator: Option<LogicalOperator>,
    pub logical_operator_arguments: Option<Vec<Scalar>>,
    pub attribute: Option<String>,
    pub value: Option<Scalar>,
    pub operator: Option<ComparisonOperator>,
    pub regex_pattern: Option<String>,
    pub regex_flags: Option<String>,
    pub code: Option<CodeRef>,
    pub values: Option<Vec<Criterion>>,
    /// Unknown properties, preserved for forward compatibility.
    pub extra: BTreeMap<String, Value>,
}

impl Default for CriterionType {
    fn default() -> Self {
        CriterionType::Criteria
    }
}

impl Criterion {
    /// A presence leaf: satisfied when the named finding is recorded.
    pub fn presence(criterion_type: CriterionType, name: impl Into<String>) -> Self {
        Criterion {
            criterion_type,
            name: Some(name.into()),
            ..Default::default()
        }
    }

    /// A comparison leaf over a record attribute.
    pub fn comparison(
        attribute: impl Into<String>,
        operator: ComparisonOperator,
        value: Scalar,
    ) -> Self {
        Criterion {
            criterion_type: CriterionType::Symptom,
            attribute: Some(attribute.into()),
            operator: Some(operator),
            value: Some(value),
            ..Default::default()
        }
    }

    /// A regex leaf over a text attribute.
    pub fn regex(attribute: impl Into<String>, pattern: impl Into<String>) -> Self {
        Criterion {
            criterion_type: CriterionType::Symptom,
            attribute: Some(attribute.into()),
            operator: Some(ComparisonOperator::Regex),
            regex_pattern: Some(pattern.into()),
            ..Default::default()
        }
    }

    /// A code leaf matched against the record's code set.
    pub fn code_leaf(criterion_type: CriterionType, code: CodeRef) -> Self {
        Criterion {
            criterion_type,
            code: Some(code),
            ..Default::default()
        }
    }

    /// Composite over children with an explicit operator.
    pub fn composite(operator: LogicalOperator, children: Vec<Criterion>) -> Self {
        Criterion {
            criterion_type: CriterionType::Criteria,
            logical_operator: Some(operator),
            values: Some(children),
            ..Default::default()
        }
    }

    /// AND composite.
    pub fn all_of(children: Vec<Criterion>) -> Self {
        Criterion::composite(LogicalOperator::And, children)
    }

    /// OR composite.
    pub fn any_of(children: Vec<Criterion>) -> Self {
        Criterion::composite(LogicalOperator::Or, children)
    }

    /// AT_LEAST(n) composite.
    pub fn at_least(n: u64, children: Vec<Criterion>) -> Self {
        Criterion {
            criterion_type: CriterionType::Criteria,
            logical_operator: Some(LogicalOperator::AtLeast),
            logical_operator_arguments: Some(vec![Scalar::Number(n as f64)]),
            values: Some(children),
            ..Default::default()
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    /// Children of a composite; empty slice for leaves.
    pub fn children(&self) -> &[Criterion] {
        self.values.as_deref().unwrap_or(&[])
    }

    /// Whether this node carries nested values (possibly an empty list,
    /// which validation rejects).
    pub fn is_composite(&self) -> bool {
        self.values.is_some()
    }

    /// Operator of a composite, with the documented AND default.
    pub fn effective_operator(&self) -> LogicalOperator {
        self.logical_operator.unwrap_or(LogicalOperator::And)
    }

    /// The AT_LEAST count, when present and well-formed.
    pub fn at_least_count(&self) -> Option<u64> {
        self.logical_operator_arguments
            .as_ref()
            .and_then(|args| args.first())
            .and_then(Scalar::as_count)
    }

    /// Whether the node carries any leaf test property.
    pub fn has_leaf_test(&self) -> bool {
        self.attribute.is_some()
            || self.operator.is_some()
            || self.value.is_some()
            || self.regex_pattern.is_some()
            || self.regex_flags.is_some()
            || self.code.is_some()
    }

    /// Nesting depth: 1 for a leaf, 1 + deepest child for a composite.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Criterion::depth).max().unwrap_or(0)
    }

    /// Total number of nodes in this subtree, including this one.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Criterion::node_count).sum::<usize>()
    }

    /// Visit every node in the subtree, depth-first.
    pub fn walk(&self, visit: &mut impl FnMut(&Criterion)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    /// Canonical structural form used for duplicate detection and
    /// order-insensitive equality. Names and attributes are normalized,
    /// composite children are sorted, descriptions and unknown properties
    /// are ignored.
    pub(crate) fn canonical_value(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("type".into(), self.criterion_type.as_str().into());
        if let Some(name) = &self.name {
            map.insert("name".into(), normalize_name(name).into());
        }
        if self.is_composite() {
            map.insert("op".into(), self.effective_operator().as_str().into());
            if self.effective_operator() == LogicalOperator::AtLeast {
                if let Some(n) = self.at_least_count() {
                    map.insert("n".into(), n.into());
                }
            }
            let mut children: Vec<(String, Value)> = self
                .children()
                .iter()
                .map(|c| {
                    let v = c.canonical_value();
                    (v.to_string(), v)
                })
                .collect();
            children.sort_by(|a, b| a.0.cmp(&b.0));
            map.insert(
                "children".into(),
                Value::Array(children.into_iter().map(|(_, v)| v).collect()),
            );
        } else {
            if let Some(attribute) = &self.attribute {
                map.insert("attribute".into(), normalize_name(attribute).into());
            }
            if let Some(operator) = self.operator {
                map.insert("operator".into(), operator.as_str().into());
            }
            if let Some(value) = &self.value {
                map.insert("value".into(), serde_json::to_value(value).unwrap_or(Value::Null));
            }
            if let Some(pattern) = &self.regex_pattern {
                map.insert("regex_pattern".into(), pattern.clone().into());
            }
            if let Some(flags) = &self.regex_flags {
                let mut chars: Vec<char> = flags.chars().collect();
                chars.sort_unstable();
                chars.dedup();
                map.insert("regex_flags".into(), chars.into_iter().collect::<String>().into());
            }
            if let Some(code) = &self.code {
                map.insert(
                    "code".into(),
                    serde_json::json!({
                        "system": code.system.to_lowercase(),
                        "code": code.code,
                    }),
                );
            }
        }
        Value::Object(map)
    }
}

impl Criterion {
    /// Stable text encoding of the canonical form. Two criteria are
    /// [`canonical_equal`] exactly when their keys are equal, so the key
    /// works for hashing and duplicate detection.
    pub fn canonical_key(&self) -> String {
        self.canonical_value().to_string()
    }
}

/// Structural equality after name normalization, with order-insensitive
/// comparison of composite children. An equivalence relation.
pub fn canonical_equal(a: &Criterion, b: &Criterion) -> bool {
    a.canonical_value() == b.canonical_value()
}

impl Serialize for Criterion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("type", self.criterion_type.as_str())?;
        if let Some(name) = &self.name {
            map.serialize_entry("name", name)?;
        }
        if let Some(description) = &self.description {
            map.serialize_entry("description", description)?;
        }
        if let Some(op) = self.logical_operator {
            map.serialize_entry("logical_operator", op.as_str())?;
        }
        if let Some(args) = &self.logical_operator_arguments {
            map.serialize_entry("logical_operator_arguments", args)?;
        }
        if let Some(attribute) = &self.attribute {
            map.serialize_entry("attribute", attribute)?;
        }
        if let Some(value) = &self.value {
            map.serialize_entry("value", value)?;
        }
        if let Some(operator) = self.operator {
            map.serialize_entry("operator", operator.as_str())?;
        }
        if let Some(pattern) = &self.regex_pattern {
            map.serialize_entry("regex_pattern", pattern)?;
        }
        if let Some(flags) = &self.regex_flags {
            map.serialize_entry("regex_flags", flags)?;
        }
        if let Some(code) = &self.code {
            map.serialize_entry("code", code)?;
        }
        if let Some(values) = &self.values {
            map.serialize_entry("values", values)?;
        }
        for (key, value) in &self.extra {
            map.serialize_entry(key, value)?;
        }
        map.end()
    }
}

/// One OSD document: metadata, criterion trees, and references.
///
/// Only `title` and `inclusion_criteria` are required; everything else is
/// optional metadata. Unknown top-level properties are kept in `extra` and
/// echoed on serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub title: String,
    pub description: Option<String>,
    pub scope: Option<Scope>,
    pub created_at: Option<NaiveDate>,
    pub published_in: Option<String>,
    pub published_at: Option<DateTime<Utc>>,
    pub published_by: Vec<String>,
    pub authors: Vec<String>,
    pub location: Option<String>,
    pub language: Option<String>,
    pub organization: Option<String>,
    pub status: Option<Status>,
    pub keywords: Vec<String>,
    pub category: Option<Category>,
    pub version: Option<String>,
    pub open_syndrome_version: Option<String>,
    pub definition_type: Option<DefinitionType>,
    pub surveillance_system_type: Option<String>,
    pub inclusion_criteria: Criterion,
    pub exclusion_criteria: Option<Criterion>,
    pub references: Vec<String>,
    /// Unknown top-level properties, preserved for forward compatibility.
    pub extra: BTreeMap<String, Value>,
}

impl Definition {
    /// Minimal definition with the two required properties.
    pub fn new(title: impl Into<String>, inclusion_criteria: Criterion) -> Self {
        Definition {
            title: title.into(),
            description: None,
            scope: None,
            created_at: None,
            published_in: None,
            published_at: None,
            published_by: Vec::new(),
            authors: Vec::new(),
            location: None,
            language: None,
            organization: None,
            status: None,
            keywords: Vec::new(),
            category: None,
            version: None,
            open_syndrome_version: None,
            definition_type: None,
            surveillance_system_type: None,
            inclusion_criteria,
            exclusion_criteria: None,
            references: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Both criterion trees, inclusion first.
    pub fn criterion_trees(&self) -> impl Iterator<Item = &Criterion> {
        std::iter::once(&self.inclusion_criteria).chain(self.exclusion_criteria.iter())
    }
}

impl Serialize for Definition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        fn seq_if_nonempty<S: Serializer>(
            map: &mut S::SerializeMap,
            key: &str,
            items: &[String],
        ) -> Result<(), S::Error> {
            if !items.is_empty() {
                map.serialize_entry(key, items)?;
            }
            Ok(())
        }

        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("title", &self.title)?;
        if let Some(description) = &self.description {
            map.serialize_entry("description", description)?;
        }
        if let Some(scope) = self.scope {
            map.serialize_entry("scope", scope.as_str())?;
        }
        if let Some(created_at) = self.created_at {
            map.serialize_entry("created_at", &created_at.format("%Y-%m-%d").to_string())?;
        }
        if let Some(published_in) = &self.published_in {
            map.serialize_entry("published_in", published_in)?;
        }
        if let Some(published_at) = self.published_at {
            map.serialize_entry(
                "published_at",
                &published_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            )?;
        }
        seq_if_nonempty::<S>(&mut map, "published_by", &self.published_by)?;
        seq_if_nonempty::<S>(&mut map, "authors", &self.authors)?;
        if let Some(location) = &self.location {
            map.serialize_entry("location", location)?;
        }
        if let Some(language) = &self.language {
            map.serialize_entry("language", language)?;
        }
        if let Some(organization) = &self.organization {
            map.serialize_entry("organization", organization)?;
        }
        if let Some(status) = self.status {
            map.serialize_entry("status", status.as_str())?;
        }
        seq_if_nonempty::<S>(&mut map, "keywords", &self.keywords)?;
        if let Some(category) = self.category {
            map.serialize_entry("category", category.as_str())?;
        }
        if let Some(version) = &self.version {
            map.serialize_entry("version", version)?;
        }
        if let Some(osv) = &self.open_syndrome_version {
            map.serialize_entry("open_syndrome_version", osv)?;
        }
        if let Some(definition_type) = self.definition_type {
            map.serialize_entry("definition_type", definition_type.as_str())?;
        }
        if let Some(sst) = &self.surveillance_system_type {
            map.serialize_entry("surveillance_system_type", sst)?;
        }
        map.serialize_entry("inclusion_criteria", &self.inclusion_criteria)?;
        if let Some(exclusion) = &self.exclusion_criteria {
            map.serialize_entry("exclusion_criteria", exclusion)?;
        }
        seq_if_nonempty::<S>(&mut map, "references", &self.references)?;
        for (key, value) in &self.extra {
            map.serialize_entry(key, value)?;
        }
        map.end()
    }
}
