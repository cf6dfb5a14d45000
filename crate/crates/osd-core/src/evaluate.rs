//! Three-valued evaluation of criterion trees against patient records.
//!
//! Surveillance records are chronically incomplete, so evaluation uses
//! Kleene logic over `{True, False, Unknown}` with explicit
//! `absent_findings`: a finding that is merely not recorded is Unknown,
//! not absent. Every evaluation carries an explanation trace mirroring the
//! criterion tree.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ComparisonOperator, Criterion, Definition, LogicalOperator, Scalar};
use crate::normalize::normalize_name;

/// Kleene truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    /// Kleene conjunction: False dominates, Unknown propagates.
    pub fn and(self, other: Truth) -> Truth {
        if self == Truth::False || other == Truth::False {
            Truth::False
        } else if self == Truth::Unknown || other == Truth::Unknown {
            Truth::Unknown
        } else {
            Truth::True
        }
    }

    /// Kleene disjunction: True dominates, Unknown propagates.
    pub fn or(self, other: Truth) -> Truth {
        if self == Truth::True || other == Truth::True {
            Truth::True
        } else if self == Truth::Unknown || other == Truth::Unknown {
            Truth::Unknown
        } else {
            Truth::False
        }
    }
}

/// A patient or case observation, normalized at construction.
///
/// `findings` are asserted-present observations, `absent_findings`
/// asserted-absent ones; anything in neither set is unknown. Code sets are
/// closed-world by default (`codes_complete`): a code not listed is absent,
/// not unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub findings: BTreeSet<String>,
    pub absent_findings: BTreeSet<String>,
    pub attributes: BTreeMap<String, Scalar>,
    pub codes: BTreeSet<(String, String)>,
    pub codes_complete: bool,
}

/// A record line that could not be turned into a [`Record`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {context}: {message}")]
pub struct RecordError {
    /// Where the record came from, e.g. `line 17`.
    pub context: String,
    pub message: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    findings: Vec<String>,
    #[serde(default)]
    absent_findings: Vec<String>,
    #[serde(default)]
    attributes: BTreeMap<String, Scalar>,
    #[serde(default)]
    codes: Vec<RawCode>,
    #[serde(default = "default_true")]
    codes_complete: bool,
}

#[derive(Deserialize)]
struct RawCode {
    system: String,
    code: String,
}

fn default_true() -> bool {
    true
}

impl Record {
    /// An empty record: everything unknown except the closed code set.
    pub fn new(id: impl Into<String>) -> Record {
        Record {
            id: id.into(),
            findings: BTreeSet::new(),
            absent_findings: BTreeSet::new(),
            attributes: BTreeMap::new(),
            codes: BTreeSet::new(),
            codes_complete: true,
        }
    }

    pub fn with_finding(mut self, name: &str) -> Record {
        self.findings.insert(normalize_name(name));
        self
    }

    pub fn with_absent(mut self, name: &str) -> Record {
        self.absent_findings.insert(normalize_name(name));
        self
    }

    pub fn with_attribute(mut self, key: &str, value: Scalar) -> Record {
        self.attributes.insert(normalize_name(key), value);
        self
    }

    pub fn with_code(mut self, system: &str, code: &str) -> Record {
        self.codes.insert((system.to_lowercase(), code.to_string()));
        self
    }

    /// Parse one NDJSON record line. Names and attribute keys are
    /// normalized; a finding listed as both present and absent is an error.
    pub fn from_json_line(line: &str, context: impl Into<String>) -> Result<Record, RecordError> {
        let context = context.into();
        let raw: RawRecord = serde_json::from_str(line).map_err(|err| RecordError {
            context: context.clone(),
            message: err.to_string(),
        })?;

        let findings: BTreeSet<String> =
            raw.findings.iter().map(|f| normalize_name(f)).collect();
        let absent_findings: BTreeSet<String> =
            raw.absent_findings.iter().map(|f| normalize_name(f)).collect();
        if let Some(overlap) = findings.intersection(&absent_findings).next() {
            return Err(RecordError {
                context,
                message: format!("finding {overlap:?} is listed as both present and absent"),
            });
        }

        Ok(Record {
            id: raw.id,
            findings,
            absent_findings,
            attributes: raw
                .attributes
                .into_iter()
                .map(|(k, v)| (normalize_name(&k), v))
                .collect(),
            codes: raw
                .codes
                .into_iter()
                .map(|c| (c.system.to_lowercase(), c.code))
                .collect(),
            codes_complete: raw.codes_complete,
        })
    }
}

/// Read NDJSON records, one per line; blank lines are skipped. Each item is
/// a record or a per-line error, never an aborted stream.
pub fn read_records<R: std::io::BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<Record, RecordError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(index, line)| {
            let number = index + 1;
            match line {
                Ok(line) if line.trim().is_empty() => None,
                Ok(line) => Some(Record::from_json_line(&line, format!("line {number}"))),
                Err(err) => Some(Err(RecordError {
                    context: format!("line {number}"),
                    message: err.to_string(),
                })),
            }
        })
}

/// One node of the explanation trace, mirroring the criterion tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNode {
    /// What the node tested, e.g. `fever` or `body_temperature >= 38`.
    pub label: String,
    pub truth: Truth,
    /// Evidence consulted, when it aids interpretation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    fn leaf(label: String, truth: Truth, note: Option<String>) -> TraceNode {
        TraceNode {
            label,
            truth,
            note,
            children: Vec::new(),
        }
    }
}

/// Overall classification of a record against a definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Match,
    NoMatch,
    Undetermined,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Match => "match",
            Outcome::NoMatch => "no_match",
            Outcome::Undetermined => "undetermined",
        }
    }

    /// Combine the inclusion truth with the optional exclusion truth:
    /// Match iff included and not excluded; NoMatch iff not included or
    /// excluded; Undetermined otherwise.
    pub fn from_truths(inclusion: Truth, exclusion: Option<Truth>) -> Outcome {
        if inclusion == Truth::False || exclusion == Some(Truth::True) {
            Outcome::NoMatch
        } else if inclusion == Truth::True
            && matches!(exclusion, None | Some(Truth::False))
        {
            Outcome::Match
        } else {
            Outcome::Undetermined
        }
    }
}

/// Evaluation result for one record: the outcome, the truths it came from,
/// and the explanation trace over both criterion trees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub id: String,
    pub outcome: Outcome,
    pub inclusion: Truth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<Truth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<VerdictTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictTrace {
    pub inclusion: TraceNode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<TraceNode>,
}

impl Verdict {
    /// Drop the trace, keeping the outcome and truths.
    pub fn without_trace(mut self) -> Verdict {
        self.trace = None;
        self
    }
}

/// Evaluate one criterion tree against a record.
///
/// The criterion must have passed validation with zero errors; evaluation
/// itself never fails. Anything the record cannot answer comes back
/// `Unknown` with an explanatory trace note.
pub fn eval_criterion(criterion: &Criterion, record: &Record) -> (Truth, TraceNode) {
    let trace = eval_node(criterion, record);
    (trace.truth, trace)
}

fn eval_node(criterion: &Criterion, record: &Record) -> TraceNode {
    if criterion.is_composite() {
        eval_composite(criterion, record)
    } else {
        eval_leaf(criterion, record)
    }
}

fn eval_composite(criterion: &Criterion, record: &Record) -> TraceNode {
    let children: Vec<TraceNode> = criterion
        .children()
        .iter()
        .map(|child| eval_node(child, record))
        .collect();

    let true_count = children.iter().filter(|c| c.truth == Truth::True).count() as u64;
    let unknown_count = children.iter().filter(|c| c.truth == Truth::Unknown).count() as u64;

    let (label, truth, note) = match criterion.effective_operator() {
        LogicalOperator::And => {
            let truth = children
                .iter()
                .fold(Truth::True, |acc, child| acc.and(child.truth));
            ("AND".to_string(), truth, None)
        }
        LogicalOperator::Or => {
            let truth = children
                .iter()
                .fold(Truth::False, |acc, child| acc.or(child.truth));
            ("OR".to_string(), truth, None)
        }
        LogicalOperator::AtLeast => {
            let required = criterion.at_least_count().unwrap_or(0);
            let truth = at_least_truth(required, true_count, unknown_count);
            (
                format!("AT_LEAST {required}"),
                truth,
                Some(format!(
                    "{true_count} true, {unknown_count} unknown of {} children",
                    children.len()
                )),
            )
        }
    };

    TraceNode {
        label,
        truth,
        note,
        children,
    }
}

/// AT_LEAST(n) in Kleene logic: true when enough children are already
/// true, false when even every unknown turning true could not reach n.
fn at_least_truth(required: u64, true_count: u64, unknown_count: u64) -> Truth {
    if true_count >= required {
        Truth::True
    } else if true_count + unknown_count < required {
        Truth::False
    } else {
        Truth::Unknown
    }
}

fn eval_leaf(criterion: &Criterion, record: &Record) -> TraceNode {
    if let Some(code) = &criterion.code {
        let key = (code.system.to_lowercase(), code.code.clone());
        let label = format!("{}:{}", code.system, code.code);
        return if record.codes.contains(&key) {
            TraceNode::leaf(label, Truth::True, Some("code present".into()))
        } else if record.codes_complete {
            TraceNode::leaf(label, Truth::False, Some("code absent (codes complete)".into()))
        } else {
            TraceNode::leaf(label, Truth::Unknown, Some("code absent (codes incomplete)".into()))
        };
    }

    if let Some(attribute) = &criterion.attribute {
        return eval_attribute_leaf(criterion, attribute, record);
    }

    if let Some(name) = &criterion.name {
        let normalized = normalize_name(name);
        return if record.findings.contains(&normalized) {
            TraceNode::leaf(name.clone(), Truth::True, Some("recorded present".into()))
        } else if record.absent_findings.contains(&normalized) {
            TraceNode::leaf(name.clone(), Truth::False, Some("recorded absent".into()))
        } else {
            TraceNode::leaf(name.clone(), Truth::Unknown, Some("not recorded".into()))
        };
    }

    // Validation rejects contentless leaves; stay total anyway.
    TraceNode::leaf(
        "(empty criterion)".into(),
        Truth::Unknown,
        Some("criterion carries no test".into()),
    )
}

fn eval_attribute_leaf(criterion: &Criterion, attribute: &str, record: &Record) -> TraceNode {
    let key = normalize_name(attribute);
    // Validation guarantees operator and value; stay total if it was skipped.
    let Some(operator) = criterion.operator else {
        return TraceNode::leaf(
            key,
            Truth::Unknown,
            Some("criterion names an attribute but no operator".into()),
        );
    };

    if operator == ComparisonOperator::Regex {
        let pattern = criterion.regex_pattern.as_deref().unwrap_or("");
        let flags = criterion.regex_flags.as_deref().unwrap_or("");
        let label = format!("{key} matches /{pattern}/{flags}");
        return match record.attributes.get(&key) {
            None => TraceNode::leaf(label, Truth::Unknown, Some("attribute not recorded".into())),
            Some(Scalar::Text(text)) => match compile_cached(pattern, flags) {
                Ok(matched) => {
                    let matched = matched.is_match(text);
                    TraceNode::leaf(
                        label,
                        Truth::from_bool(matched),
                        Some(format!("attribute value {text:?}")),
                    )
                }
                Err(err) => TraceNode::leaf(label, Truth::Unknown, Some(format!("pattern error: {err}"))),
            },
            Some(other) => TraceNode::leaf(
                label,
                Truth::Unknown,
                Some(format!("type-incompatible: regex needs text, found {}", other.kind())),
            ),
        };
    }

    let Some(expected) = criterion.value.as_ref() else {
        return TraceNode::leaf(
            key,
            Truth::Unknown,
            Some("criterion names an attribute but no value".into()),
        );
    };
    let label = format!("{key} {} {expected}", operator.as_str());
    match record.attributes.get(&key) {
        None => TraceNode::leaf(label, Truth::Unknown, Some("attribute not recorded".into())),
        Some(actual) => match compare_scalars(actual, operator, expected) {
            Some(result) => TraceNode::leaf(
                label,
                Truth::from_bool(result),
                Some(format!("attribute value {actual}")),
            ),
            None => TraceNode::leaf(
                label,
                Truth::Unknown,
                Some(format!(
                    "type-incompatible: cannot apply {} to {} and {}",
                    operator.as_str(),
                    actual.kind(),
                    expected.kind()
                )),
            ),
        },
    }
}

/// Compare a record value with a criterion value. `None` means the
/// combination has no defined semantics (and evaluates to Unknown).
fn compare_scalars(actual: &Scalar, operator: ComparisonOperator, expected: &Scalar) -> Option<bool> {
    use ComparisonOperator::*;
    match (actual, expected) {
        (Scalar::Number(a), Scalar::Number(b)) => Some(match operator {
            Gt => a > b,
            Ge => a >= b,
            Lt => a < b,
            Le => a <= b,
            Eq => a == b,
            Ne => a != b,
            Regex => return None,
        }),
        (Scalar::Text(a), Scalar::Text(b)) => match operator {
            Eq => Some(a == b),
            Ne => Some(a != b),
            _ => None,
        },
        (Scalar::Bool(a), Scalar::Bool(b)) => match operator {
            Eq => Some(a == b),
            Ne => Some(a != b),
            _ => None,
        },
        _ => None,
    }
}

thread_local! {
    static REGEX_CACHE: RefCell<HashMap<(String, String), Result<regex::Regex, String>>> =
        RefCell::new(HashMap::new());
}

fn compile_cached(
    pattern: &str,
    flags: &str,
) -> Result<regex::Regex, String> {
    REGEX_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((pattern.to_string(), flags.to_string()))
            .or_insert_with(|| {
                crate::regex_dialect::compile(pattern, flags).map_err(|e| e.to_string())
            })
            .clone()
    })
}

/// Classify one record against a validated definition.
pub fn classify(definition: &Definition, record: &Record) -> Verdict {
    let (inclusion, inclusion_trace) = eval_criterion(&definition.inclusion_criteria, record);
    let (exclusion, exclusion_trace) = match &definition.exclusion_criteria {
        Some(tree) => {
            let (truth, trace) = eval_criterion(tree, record);
            (Some(truth), Some(trace))
        }
        None => (None, None),
    };

    Verdict {
        id: record.id.clone(),
        outcome: Outcome::from_truths(inclusion, exclusion),
        inclusion,
        exclusion,
        trace: Some(VerdictTrace {
            inclusion: inclusion_trace,
            exclusion: exclusion_trace,
        }),
    }
}

/// One element of a classified record stream: a verdict, or the error for
/// a record that could not be read.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamEntry {
    Verdict(Verdict),
    Error(RecordError),
}

/// Records per parallel batch in [`classify_stream`].
const STREAM_CHUNK: usize = 1024;

/// Classify a record stream. Records are processed in parallel batches;
/// output order equals input order and per-record results are identical to
/// [`classify`]. Unreadable records pass through as error entries.
pub fn classify_stream<'a, I>(
    definition: &'a Definition,
    records: I,
) -> impl Iterator<Item = StreamEntry> + 'a
where
    I: IntoIterator<Item = Result<Record, RecordError>>,
    I::IntoIter: 'a,
{
    let mut source = records.into_iter();
    let mut buffer: std::collections::VecDeque<StreamEntry> = std::collections::VecDeque::new();

    std::iter::from_fn(move || {
        if buffer.is_empty() {
            let chunk: Vec<Result<Record, RecordError>> =
                source.by_ref().take(STREAM_CHUNK).collect();
            if chunk.is_empty() {
                return None;
            }
            let verdicts: Vec<Option<Verdict>> = chunk
                .par_iter()
                .map(|item| item.as_ref().ok().map(|record| classify(definition, record)))
                .collect();
            for (item, verdict) in chunk.into_iter().zip(verdicts) {
                buffer.push_back(match (item, verdict) {
                    (_, Some(verdict)) => StreamEntry::Verdict(verdict),
                    (Err(err), None) => StreamEntry::Error(err),
                    (Ok(_), None) => unreachable!("ok records always classify"),
                });
            }
        }
        buffer.pop_front()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CriterionType;

    fn leaf(name: &str) -> Criterion {
        Criterion::presence(CriterionType::Symptom, name)
    }

    fn ecdc_measles() -> Criterion {
        Criterion::all_of(vec![
            leaf("fever"),
            leaf("maculo-papular rash"),
            Criterion::at_least(1, vec![leaf("cough"), leaf("coryza"), leaf("conjunctivitis")]),
        ])
    }

    #[test]
    fn measles_record_with_cough_matches() {
        let record = Record::new("r1")
            .with_finding("fever")
            .with_finding("maculo-papular rash")
            .with_finding("cough")
            .with_absent("coryza")
            .with_absent("conjunctivitis");
        let (truth, _) = eval_criterion(&ecdc_measles(), &record);
        assert_eq!(truth, Truth::True);
    }

    #[test]
    fn presence_leaf_three_outcomes() {
        let criterion = leaf("Fever");
        let present = Record::new("r").with_finding("fever");
        let absent = Record::new("r").with_absent("FEVER");
        let unknown = Record::new("r");
        assert_eq!(eval_criterion(&criterion, &present).0, Truth::True);
        assert_eq!(eval_criterion(&criterion, &absent).0, Truth::False);
        assert_eq!(eval_criterion(&criterion, &unknown).0, Truth::Unknown);
    }

    #[test]
    fn at_least_counts_true_children() {
        // AT_LEAST(2) over [True, False, True] is True.
        let tree = Criterion::at_least(2, vec![leaf("a"), leaf("b"), leaf("c")]);
        let record = Record::new("r").with_finding("a").with_absent("b").with_finding("c");
        assert_eq!(eval_criterion(&tree, &record).0, Truth::True);

        // AT_LEAST(0) over anything is True, even all-unknown.
        let vacuous = Criterion::at_least(0, vec![leaf("a"), leaf("b")]);
        assert_eq!(eval_criterion(&vacuous, &Record::new("r")).0, Truth::True);
    }

    #[test]
    fn at_least_unknown_band() {
        // AT_LEAST(2) over [True, Unknown, False]: one true, one unknown
        // could still reach two, so Unknown.
        let tree = Criterion::at_least(2, vec![leaf("a"), leaf("b"), leaf("c")]);
        let record = Record::new("r").with_finding("a").with_absent("c");
        assert_eq!(eval_criterion(&tree, &record).0, Truth::Unknown);
    }

    #[test]
    fn comparison_below_threshold_is_false() {
        let criterion = Criterion::comparison(
            "body_temperature",
            ComparisonOperator::Ge,
            Scalar::Number(38.0),
        );
        let record =
            Record::new("r").with_attribute("body_temperature", Scalar::Number(37.6));
        assert_eq!(eval_criterion(&criterion, &record).0, Truth::False);
    }

    #[test]
    fn comparison_type_mismatch_is_unknown_with_note() {
        let criterion = Criterion::comparison(
            "body_temperature",
            ComparisonOperator::Ge,
            Scalar::Number(38.0),
        );
        let record =
            Record::new("r").with_attribute("body_temperature", Scalar::Text("high".into()));
        let (truth, trace) = eval_criterion(&criterion, &record);
        assert_eq!(truth, Truth::Unknown);
        assert!(trace.note.unwrap().contains("type-incompatible"));
    }

    #[test]
    fn text_comparison_supports_equality_only() {
        let eq = Criterion::comparison("stage", ComparisonOperator::Eq, Scalar::Text("late".into()));
        let record = Record::new("r").with_attribute("stage", Scalar::Text("late".into()));
        assert_eq!(eval_criterion(&eq, &record).0, Truth::True);

        let lt = Criterion::comparison("stage", ComparisonOperator::Lt, Scalar::Text("late".into()));
        assert_eq!(eval_criterion(&lt, &record).0, Truth::Unknown);
    }

    #[test]
    fn regex_leaf_matches_unanchored() {
        let criterion = Criterion::regex("note", "fev\\w+");
        let record = Record::new("r")
            .with_attribute("note", Scalar::Text("patient reports fever since Monday".into()));
        assert_eq!(eval_criterion(&criterion, &record).0, Truth::True);

        let no_attr = Record::new("r");
        assert_eq!(eval_criterion(&criterion, &no_attr).0, Truth::Unknown);
    }

    #[test]
    fn regex_flags_are_honored() {
        let mut criterion = Criterion::regex("note", "^fever$");
        criterion.regex_flags = Some("i".into());
        let record = Record::new("r").with_attribute("note", Scalar::Text("FEVER".into()));
        assert_eq!(eval_criterion(&criterion, &record).0, Truth::True);
    }

    #[test]
    fn code_leaf_is_closed_world_by_default() {
        let criterion = Criterion::code_leaf(
            CriterionType::Diagnosis,
            crate::model::CodeRef::new("ICD-10", "B05"),
        );
        let coded = Record::new("r").with_code("icd-10", "B05");
        assert_eq!(eval_criterion(&criterion, &coded).0, Truth::True);

        // Empty code set: absent, not unknown.
        let empty = Record::new("r");
        assert_eq!(eval_criterion(&criterion, &empty).0, Truth::False);

        // Unless the record says its codes are incomplete.
        let mut open = Record::new("r");
        open.codes_complete = false;
        assert_eq!(eval_criterion(&criterion, &open).0, Truth::Unknown);

        // System comparison is case-insensitive, code comparison exact.
        let wrong_case_code = Record::new("r").with_code("ICD-10", "b05");
        assert_eq!(eval_criterion(&criterion, &wrong_case_code).0, Truth::False);
    }

    #[test]
    fn verdict_truth_table() {
        use Truth::*;
        // Enumerate all inclusion x exclusion combinations and compare
        // against the written-out table.
        let table: &[(Truth, Option<Truth>, Outcome)] = &[
            (True, None, Outcome::Match),
            (False, None, Outcome::NoMatch),
            (Unknown, None, Outcome::Undetermined),
            (True, Some(False), Outcome::Match),
            (True, Some(True), Outcome::NoMatch),
            (True, Some(Unknown), Outcome::Undetermined),
            (False, Some(False), Outcome::NoMatch),
            (False, Some(True), Outcome::NoMatch),
            (False, Some(Unknown), Outcome::NoMatch),
            (Unknown, Some(False), Outcome::Undetermined),
            (Unknown, Some(True), Outcome::NoMatch),
            (Unknown, Some(Unknown), Outcome::Undetermined),
        ];
        for (inclusion, exclusion, expected) in table {
            assert_eq!(
                Outcome::from_truths(*inclusion, *exclusion),
                *expected,
                "inclusion {inclusion:?}, exclusion {exclusion:?}"
            );
        }
    }

    #[test]
    fn classify_includes_trace_for_both_trees() {
        let mut definition = Definition::new("d", ecdc_measles());
        definition.exclusion_criteria = Some(leaf("vaccinated recently"));
        let record = Record::new("r")
            .with_finding("fever")
            .with_finding("maculo-papular rash")
            .with_finding("cough")
            .with_absent("vaccinated recently");
        let verdict = classify(&definition, &record);
        assert_eq!(verdict.outcome, Outcome::Match);
        assert_eq!(verdict.inclusion, Truth::True);
        assert_eq!(verdict.exclusion, Some(Truth::False));
        let trace = verdict.trace.unwrap();
        assert_eq!(trace.inclusion.children.len(), 3);
        assert!(trace.exclusion.is_some());
    }

    #[test]
    fn record_line_parsing_normalizes_and_checks_contradictions() {
        let record = Record::from_json_line(
            r#"{"id": "r1", "findings": ["  Fever "], "attributes": {"Body Temperature": 38.5},
                "codes": [{"system": "ICD-10", "code": "B05"}]}"#,
            "line 1",
        )
        .unwrap();
        assert!(record.findings.contains("fever"));
        assert!(record.attributes.contains_key("body temperature"));
        assert!(record.codes.contains(&("icd-10".into(), "B05".into())));
        assert!(record.codes_complete);

        let err = Record::from_json_line(
            r#"{"id": "r2", "findings": ["fever"], "absent_findings": ["FEVER"]}"#,
            "line 2",
        )
        .unwrap_err();
        assert!(err.message.contains("both present and absent"));
    }

    #[test]
    fn stream_preserves_order_and_errors() {
        let definition = Definition::new("d", leaf("fever"));
        let items = vec![
            Ok(Record::new("a").with_finding("fever")),
            Err(RecordError {
                context: "line 2".into(),
                message: "bad json".into(),
            }),
            Ok(Record::new("c")),
        ];
        let out: Vec<StreamEntry> = classify_stream(&definition, items).collect();
        assert_eq!(out.len(), 3);
        match &out[0] {
            StreamEntry::Verdict(v) => {
                assert_eq!(v.id, "a");
                assert_eq!(v.outcome, Outcome::Match);
            }
            other => panic!("expected verdict, got {other:?}"),
        }
        assert!(matches!(&out[1], StreamEntry::Error(e) if e.context == "line 2"));
        match &out[2] {
            StreamEntry::Verdict(v) => assert_eq!(v.outcome, Outcome::Undetermined),
            other => panic!("expected verdict, got {other:?}"),
        }
    }

    #[test]
    fn empty_stream_is_empty() {
        let definition = Definition::new("d", leaf("fever"));
        let out: Vec<StreamEntry> = classify_stream(&definition, Vec::new()).collect();
        assert!(out.is_empty());
    }
}
