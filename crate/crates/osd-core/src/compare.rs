//! Agreement between two definitions: exact truth-table comparison over a
//! shared finding universe, and empirical agreement over record streams.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluate::{classify, Outcome, Record, RecordError};
use crate::model::{Criterion, CriterionType, Definition};
use crate::normalize::normalize_name;
use crate::validate::check_presence_only;

/// Enumerating more findings than this is desk-hostile (2^24 ≈ 16.7M
/// evaluations per definition); use record-based comparison instead.
pub const MAX_UNIVERSE: usize = 24;

/// Discordant assignments kept in the report.
const MAX_DISCORDANT_EXAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("definition {which} is not presence-only ({count} offending leaves, first at {first_path}); truth-table comparison needs presence leaves")]
    NonPresenceLeaves {
        which: char,
        count: usize,
        first_path: String,
    },
    #[error("universe of {size} findings exceeds the {MAX_UNIVERSE}-finding cap; use record-based comparison instead")]
    UniverseTooLarge { size: usize },
}

/// Optional alias table: normalized finding name -> canonical name.
/// Universe alignment is by normalized name only; synonyms only merge when
/// this table says so.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct AliasTable(BTreeMap<String, String>);

impl AliasTable {
    pub fn from_json(json: &str) -> Result<AliasTable, serde_json::Error> {
        let raw: BTreeMap<String, String> = serde_json::from_str(json)?;
        Ok(AliasTable(
            raw.into_iter()
                .map(|(k, v)| (normalize_name(&k), normalize_name(&v)))
                .collect(),
        ))
    }

    fn resolve(&self, normalized: &str) -> String {
        self.0
            .get(normalized)
            .cloned()
            .unwrap_or_else(|| normalized.to_string())
    }
}

/// Exact agreement over every assignment of the shared finding universe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Sorted normalized finding names from both definitions.
    pub universe: Vec<String>,
    /// 2^|universe| fully-specified assignments.
    pub assignments_total: u64,
    pub match_both: u64,
    pub match_a_only: u64,
    pub match_b_only: u64,
    pub match_neither: u64,
    /// both / (both + a_only + b_only); 1.0 when no assignment matches
    /// either definition.
    pub jaccard: f64,
    /// Findings that come from professional_judgment leaves. They take
    /// part in the enumeration as ordinary binary findings, flagged here.
    pub judgment_findings: Vec<String>,
    /// Up to ten assignments on which the definitions disagree.
    pub discordant_examples: Vec<DiscordantExample>,
}

/// One assignment where exactly one definition matches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscordantExample {
    /// Findings present in the assignment; the rest of the universe is absent.
    pub present: Vec<String>,
    /// Which definition matched: "a" or "b".
    pub matches: char,
}

/// Compare two presence-only definitions by enumerating all 2^n total
/// assignments of their shared finding universe. Every finding is either
/// present or absent; nothing is unknown, so no outcome is undetermined.
pub fn truth_table_compare(
    a: &Definition,
    b: &Definition,
    aliases: Option<&AliasTable>,
) -> Result<ComparisonReport, CompareError> {
    for (which, definition) in [('a', a), ('b', b)] {
        let offending = check_presence_only(definition);
        if !offending.is_empty() {
            return Err(CompareError::NonPresenceLeaves {
                which,
                count: offending.len(),
                first_path: offending[0].path.clone(),
            });
        }
    }

    let default_aliases = AliasTable::default();
    let aliases = aliases.unwrap_or(&default_aliases);

    let mut universe: BTreeSet<String> = BTreeSet::new();
    let mut judgment: BTreeSet<String> = BTreeSet::new();
    for definition in [a, b] {
        for tree in definition.criterion_trees() {
            tree.walk(&mut |node| {
                if let (false, Some(name)) = (node.is_composite(), &node.name) {
                    let canonical = aliases.resolve(&normalize_name(name));
                    if node.criterion_type == CriterionType::ProfessionalJudgment {
                        judgment.insert(canonical.clone());
                    }
                    universe.insert(canonical);
                }
            });
        }
    }

    let universe: Vec<String> = universe.into_iter().collect();
    if universe.len() > MAX_UNIVERSE {
        return Err(CompareError::UniverseTooLarge {
            size: universe.len(),
        });
    }

    let index: BTreeMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();
    let compiled_a = CompiledDefinition::build(a, &index, aliases);
    let compiled_b = CompiledDefinition::build(b, &index, aliases);

    let assignments_total = 1u64 << universe.len();
    let mut report = ComparisonReport {
        universe: universe.clone(),
        assignments_total,
        match_both: 0,
        match_a_only: 0,
        match_b_only: 0,
        match_neither: 0,
        jaccard: 0.0,
        judgment_findings: judgment.into_iter().collect(),
        discordant_examples: Vec::new(),
    };

    for assignment in 0..assignments_total {
        let matches_a = compiled_a.matches(assignment);
        let matches_b = compiled_b.matches(assignment);
        match (matches_a, matches_b) {
            (true, true) => report.match_both += 1,
            (true, false) => report.match_a_only += 1,
            (false, true) => report.match_b_only += 1,
            (false, false) => report.match_neither += 1,
        }
        if matches_a != matches_b && report.discordant_examples.len() < MAX_DISCORDANT_EXAMPLES {
            report.discordant_examples.push(DiscordantExample {
                present: universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| assignment & (1 << i) != 0)
                    .map(|(_, name)| name.clone())
                    .collect(),
                matches: if matches_a { 'a' } else { 'b' },
            });
        }
    }

    let denominator = report.match_both + report.match_a_only + report.match_b_only;
    report.jaccard = if denominator == 0 {
        1.0
    } else {
        report.match_both as f64 / denominator as f64
    };
    Ok(report)
}

/// Build the fully-specified record for one truth-table assignment: each
/// universe finding is in `findings` or `absent_findings`.
pub fn assignment_record(universe: &[String], assignment: u64) -> Record {
    let mut record = Record::new(format!("assignment-{assignment}"));
    for (bit, name) in universe.iter().enumerate() {
        if assignment & (1 << bit) != 0 {
            record.findings.insert(name.clone());
        } else {
            record.absent_findings.insert(name.clone());
        }
    }
    record
}

/// A criterion tree lowered onto universe indices for fast enumeration.
/// Fully-specified assignments have no unknowns, so evaluation is boolean.
enum CompiledNode {
    Finding(usize),
    And(Vec<CompiledNode>),
    Or(Vec<CompiledNode>),
    AtLeast(u64, Vec<CompiledNode>),
}

struct CompiledDefinition {
    inclusion: CompiledNode,
    exclusion: Option<CompiledNode>,
}

impl CompiledDefinition {
    fn build(
        definition: &Definition,
        index: &BTreeMap<&str, usize>,
        aliases: &AliasTable,
    ) -> CompiledDefinition {
        CompiledDefinition {
            inclusion: compile_node(&definition.inclusion_criteria, index, aliases),
            exclusion: definition
                .exclusion_criteria
                .as_ref()
                .map(|tree| compile_node(tree, index, aliases)),
        }
    }

    fn matches(&self, assignment: u64) -> bool {
        let included = eval_compiled(&self.inclusion, assignment);
        let excluded = self
            .exclusion
            .as_ref()
            .is_some_and(|tree| eval_compiled(tree, assignment));
        included && !excluded
    }
}

fn compile_node(
    criterion: &Criterion,
    index: &BTreeMap<&str, usize>,
    aliases: &AliasTable,
) -> CompiledNode {
    if criterion.is_composite() {
        let children: Vec<CompiledNode> = criterion
            .children()
            .iter()
            .map(|child| compile_node(child, index, aliases))
            .collect();
        match criterion.effective_operator() {
            crate::model::LogicalOperator::And => CompiledNode::And(children),
            crate::model::LogicalOperator::Or => CompiledNode::Or(children),
            crate::model::LogicalOperator::AtLeast => {
                CompiledNode::AtLeast(criterion.at_least_count().unwrap_or(0), children)
            }
        }
    } else {
        let name = criterion.name.as_deref().unwrap_or_default();
        let canonical = aliases.resolve(&normalize_name(name));
        CompiledNode::Finding(index[canonical.as_str()])
    }
}

fn eval_compiled(node: &CompiledNode, assignment: u64) -> bool {
    match node {
        CompiledNode::Finding(bit) => assignment & (1 << bit) != 0,
        CompiledNode::And(children) => children.iter().all(|c| eval_compiled(c, assignment)),
        CompiledNode::Or(children) => children.iter().any(|c| eval_compiled(c, assignment)),
        CompiledNode::AtLeast(n, children) => {
            children
                .iter()
                .filter(|c| eval_compiled(c, assignment))
                .count() as u64
                >= *n
        }
    }
}

/// Joint outcome counts of two definitions over a record stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordComparison {
    /// Records classified (excluding unreadable ones).
    pub records_total: u64,
    /// `matrix[outcome of a][outcome of b]`, keyed match / no_match /
    /// undetermined in serialized form.
    pub matrix: OutcomeMatrix,
    /// Agreement over pairs where both outcomes are determined
    /// (match or no_match); absent when no pair is determined.
    pub agreement: Option<f64>,
    /// Per-record stream errors, in input order.
    pub errors: Vec<String>,
}

/// 3x3 joint outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutcomeMatrix([[u64; 3]; 3]);

impl OutcomeMatrix {
    fn slot(outcome: Outcome) -> usize {
        match outcome {
            Outcome::Match => 0,
            Outcome::NoMatch => 1,
            Outcome::Undetermined => 2,
        }
    }

    pub fn count(&self, a: Outcome, b: Outcome) -> u64 {
        self.0[Self::slot(a)][Self::slot(b)]
    }

    fn add(&mut self, a: Outcome, b: Outcome) {
        self.0[Self::slot(a)][Self::slot(b)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }
}

impl Serialize for OutcomeMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        const OUTCOMES: [Outcome; 3] = [Outcome::Match, Outcome::NoMatch, Outcome::Undetermined];
        let mut outer = serializer.serialize_map(Some(3))?;
        for a in OUTCOMES {
            let mut row = BTreeMap::new();
            for b in OUTCOMES {
                row.insert(b.as_str(), self.count(a, b));
            }
            outer.serialize_entry(a.as_str(), &row)?;
        }
        outer.end()
    }
}

/// Classify every record under both definitions and tally the joint
/// outcomes. Unreadable records are surfaced per record, not fatal.
pub fn record_compare<I>(a: &Definition, b: &Definition, records: I) -> RecordComparison
where
    I: IntoIterator<Item = Result<Record, RecordError>>,
{
    let mut comparison = RecordComparison {
        records_total: 0,
        matrix: OutcomeMatrix::default(),
        agreement: None,
        errors: Vec::new(),
    };

    let mut determined = 0u64;
    let mut agreed = 0u64;
    for item in records {
        match item {
            Ok(record) => {
                let outcome_a = classify(a, &record).outcome;
                let outcome_b = classify(b, &record).outcome;
                comparison.records_total += 1;
                comparison.matrix.add(outcome_a, outcome_b);
                if outcome_a != Outcome::Undetermined && outcome_b != Outcome::Undetermined {
                    determined += 1;
                    if outcome_a == outcome_b {
                        agreed += 1;
                    }
                }
            }
            Err(err) => comparison.errors.push(err.to_string()),
        }
    }

    if determined > 0 {
        comparison.agreement = Some(agreed as f64 / determined as f64);
    }
    comparison
}
