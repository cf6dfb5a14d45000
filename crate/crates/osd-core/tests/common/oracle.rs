//! Naive reference interpreter, independent of the evaluation engine.
//!
//! Criterion trees over presence leaves are negation-free and therefore
//! monotone, so three-valued semantics can be recovered from two ordinary
//! boolean passes: one resolving every unknown pessimistically (false) and
//! one optimistically (true). If even the pessimistic pass holds, the
//! result is True; if even the optimistic pass fails, False; otherwise
//! Unknown. This never touches the engine's Kleene connectives and is the
//! oracle every engine result is checked against.

use std::collections::BTreeMap;

use osd_core::normalize::normalize_name;
use osd_core::{Criterion, Definition, LogicalOperator, Record, Truth};

/// Boolean evaluation with every unknown leaf resolved to `optimistic`.
pub fn eval_bool(
    criterion: &Criterion,
    facts: &BTreeMap<String, Truth>,
    optimistic: bool,
) -> bool {
    if criterion.is_composite() {
        let children = criterion.children();
        match criterion.effective_operator() {
            LogicalOperator::And => children.iter().all(|c| eval_bool(c, facts, optimistic)),
            LogicalOperator::Or => children.iter().any(|c| eval_bool(c, facts, optimistic)),
            LogicalOperator::AtLeast => {
                let required = criterion.at_least_count().expect("AT_LEAST count") as usize;
                children
                    .iter()
                    .filter(|c| eval_bool(c, facts, optimistic))
                    .count()
                    >= required
            }
        }
    } else {
        let name = normalize_name(criterion.name.as_deref().expect("presence leaf"));
        match facts.get(&name).copied().unwrap_or(Truth::Unknown) {
            Truth::True => true,
            Truth::False => false,
            Truth::Unknown => optimistic,
        }
    }
}

/// Reference three-valued result via the two boolean passes.
pub fn reference_eval(criterion: &Criterion, facts: &BTreeMap<String, Truth>) -> Truth {
    let pessimistic = eval_bool(criterion, facts, false);
    let optimistic = eval_bool(criterion, facts, true);
    match (pessimistic, optimistic) {
        (true, _) => Truth::True,
        (false, false) => Truth::False,
        (false, true) => Truth::Unknown,
    }
}

/// Sorted normalized presence-leaf names of a definition's trees.
pub fn leaf_universe(definition: &Definition) -> Vec<String> {
    let mut names = std::collections::BTreeSet::new();
    for tree in definition.criterion_trees() {
        tree.walk(&mut |node| {
            if !node.is_composite() {
                if let Some(name) = &node.name {
                    names.insert(normalize_name(name));
                }
            }
        });
    }
    names.into_iter().collect()
}

/// Brute-force count of fully-specified assignments (every finding either
/// present or absent) under which the definition matches: inclusion holds
/// and the exclusion tree, if any, does not.
pub fn count_matching_assignments(definition: &Definition, universe: &[String]) -> u64 {
    assert!(universe.len() < 63, "universe too large for brute force");
    let mut matching = 0;
    for assignment in 0u64..(1 << universe.len()) {
        let facts: BTreeMap<String, Truth> = universe
            .iter()
            .enumerate()
            .map(|(bit, name)| {
                let present = assignment & (1 << bit) != 0;
                (name.clone(), Truth::from_bool(present))
            })
            .collect();
        let included = eval_bool(&definition.inclusion_criteria, &facts, false);
        let excluded = definition
            .exclusion_criteria
            .as_ref()
            .is_some_and(|tree| eval_bool(tree, &facts, false));
        if included && !excluded {
            matching += 1;
        }
    }
    matching
}

/// Turn a fact map into the equivalent record: True findings present,
/// False findings absent, Unknown findings unrecorded.
pub fn record_from_facts(id: &str, facts: &BTreeMap<String, Truth>) -> Record {
    let mut record = Record::new(id);
    for (name, truth) in facts {
        match truth {
            Truth::True => {
                record.findings.insert(name.clone());
            }
            Truth::False => {
                record.absent_findings.insert(name.clone());
            }
            Truth::Unknown => {}
        }
    }
    record
}
