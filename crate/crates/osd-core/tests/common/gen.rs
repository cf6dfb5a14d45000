//! Seeded generators for criterion trees, definitions, facts, and records.

use std::collections::{BTreeMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use osd_core::{
    CodeRef, ComparisonOperator, Criterion, CriterionType, Definition, Record,
    Scalar, Truth,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const FINDINGS: &[&str] = &[
    "fever",
    "cough",
    "coryza",
    "conjunctivitis",
    "maculo-papular rash",
    "headache",
    "myalgia",
    "sore throat",
    "diarrhoea",
    "vomiting",
    "nausea",
    "fatigue",
    "chills",
    "arthralgia",
    "jaundice",
    "dyspnoea",
    "wheezing",
    "abdominal pain",
    "fièvre",
    "céphalées",
    "exantema máculo-papular",
    "сыпь",
];

const NUMERIC_ATTRIBUTES: &[&str] = &[
    "body_temperature",
    "age",
    "respiratory_rate",
    "oxygen_saturation",
    "symptom_days",
];

const TEXT_ATTRIBUTES: &[&str] = &["severity", "travel_note", "specimen_type"];

const TEXT_VALUES: &[&str] = &["mild", "moderate", "severe", "sputum", "serum"];

const REGEX_PATTERNS: &[&str] = &[
    "fev\\w+",
    "rash|exanthema",
    "^confirmed",
    "[0-9]{2}",
    "trav(el|elled)\\s+to",
];

const CODES: &[(&str, &str)] = &[
    ("ICD-10", "B05"),
    ("ICD-10", "A00"),
    ("ICD-10", "U07.1"),
    ("SNOMED CT", "14189004"),
    ("ICD-11", "1F03"),
];

const LEAF_TYPES: &[CriterionType] = &[
    CriterionType::Symptom,
    CriterionType::Symptom,
    CriterionType::Symptom,
    CriterionType::Diagnosis,
    CriterionType::DiagnosticTest,
    CriterionType::EpidemiologicalHistory,
    CriterionType::ProfessionalJudgment,
    CriterionType::DemographicCriteria,
];

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

/// Random presence-only tree: depth <= `max_depth`, at most six children
/// per composite, all three operators, children unique.
pub fn presence_tree(rng: &mut ChaCha8Rng, max_depth: usize) -> Criterion {
    if max_depth <= 1 || rng.gen_bool(0.35) {
        return presence_leaf(rng);
    }
    let mut children = Vec::new();
    let mut seen = HashSet::new();
    let target = rng.gen_range(1..=6usize);
    for _ in 0..target * 3 {
        if children.len() == target {
            break;
        }
        let child = presence_tree(rng, max_depth - 1);
        if seen.insert(child.canonical_key()) {
            children.push(child);
        }
    }
    composite_over(rng, children)
}

fn presence_leaf(rng: &mut ChaCha8Rng) -> Criterion {
    Criterion::presence(*pick(rng, LEAF_TYPES), *pick(rng, FINDINGS))
}

fn composite_over(rng: &mut ChaCha8Rng, children: Vec<Criterion>) -> Criterion {
    debug_assert!(!children.is_empty());
    match rng.gen_range(0..3) {
        0 => Criterion::all_of(children),
        1 => Criterion::any_of(children),
        _ => {
            let n = rng.gen_range(0..=children.len() as u64);
            Criterion::at_least(n, children)
        }
    }
}

/// Random three-valued fact assignment over the given finding names.
pub fn facts(rng: &mut ChaCha8Rng, universe: &[String]) -> BTreeMap<String, Truth> {
    universe
        .iter()
        .map(|name| {
            let truth = match rng.gen_range(0..3) {
                0 => Truth::True,
                1 => Truth::False,
                _ => Truth::Unknown,
            };
            (name.clone(), truth)
        })
        .collect()
}

/// Random tree of presence and comparison leaves for renderer fidelity:
/// every composite has at least two unique children, leaf types are fixed
/// so the re-parsed tree can reproduce them.
pub fn render_tree(rng: &mut ChaCha8Rng, max_depth: usize) -> Criterion {
    if max_depth <= 1 {
        return render_leaf(rng);
    }
    let mut children = Vec::new();
    let mut seen = HashSet::new();
    let target = rng.gen_range(2..=5usize);
    for _ in 0..target * 4 {
        if children.len() == target {
            break;
        }
        let child = if rng.gen_bool(0.4) {
            render_tree(rng, max_depth - 1)
        } else {
            render_leaf(rng)
        };
        if seen.insert(child.canonical_key()) {
            children.push(child);
        }
    }
    if children.len() < 2 {
        children.push(render_leaf_named(rng, "backup finding"));
    }
    let count = children.len() as u64;
    match rng.gen_range(0..3) {
        0 => Criterion::all_of(children),
        1 => Criterion::any_of(children),
        _ => Criterion::at_least(rng.gen_range(1..=count), children),
    }
}

fn render_leaf(rng: &mut ChaCha8Rng) -> Criterion {
    if rng.gen_bool(0.3) {
        comparison_leaf(rng)
    } else {
        Criterion::presence(CriterionType::Symptom, *pick(rng, FINDINGS))
    }
}

fn render_leaf_named(_rng: &mut ChaCha8Rng, name: &str) -> Criterion {
    Criterion::presence(CriterionType::Symptom, name)
}

fn comparison_leaf(rng: &mut ChaCha8Rng) -> Criterion {
    if rng.gen_bool(0.7) {
        let operator = *pick(
            rng,
            &[
                ComparisonOperator::Gt,
                ComparisonOperator::Ge,
                ComparisonOperator::Lt,
                ComparisonOperator::Le,
                ComparisonOperator::Eq,
                ComparisonOperator::Ne,
            ],
        );
        let value = match rng.gen_range(0..3) {
            0 => Scalar::Number(rng.gen_range(0..45) as f64),
            1 => Scalar::Number(rng.gen_range(350..430) as f64 / 10.0),
            _ => Scalar::Number(rng.gen_range(0..100) as f64 + 0.5),
        };
        Criterion::comparison(*pick(rng, NUMERIC_ATTRIBUTES), operator, value)
    } else {
        let operator = *pick(rng, &[ComparisonOperator::Eq, ComparisonOperator::Ne]);
        Criterion::comparison(
            *pick(rng, TEXT_ATTRIBUTES),
            operator,
            Scalar::Text((*pick(rng, TEXT_VALUES)).to_string()),
        )
    }
}

/// Random mixed-leaf tree (presence, comparison, regex, code) that passes
/// validation with zero errors.
pub fn mixed_tree(rng: &mut ChaCha8Rng, max_depth: usize) -> Criterion {
    if max_depth <= 1 || rng.gen_bool(0.3) {
        return mixed_leaf(rng);
    }
    let mut children = Vec::new();
    let mut seen = HashSet::new();
    let target = rng.gen_range(1..=5usize);
    for _ in 0..target * 4 {
        if children.len() == target {
            break;
        }
        let child = mixed_tree(rng, max_depth - 1);
        if seen.insert(child.canonical_key()) {
            children.push(child);
        }
    }
    let mut tree = composite_over(rng, children);
    if rng.gen_bool(0.2) {
        tree = tree.with_name(format!("group {}", rng.gen_range(0..100)));
    }
    if rng.gen_bool(0.15) {
        tree = tree.with_description("generated clinical grouping");
    }
    tree
}

fn mixed_leaf(rng: &mut ChaCha8Rng) -> Criterion {
    match rng.gen_range(0..10) {
        0 | 1 => comparison_leaf(rng),
        2 => {
            let mut leaf = Criterion::regex(*pick(rng, TEXT_ATTRIBUTES), *pick(rng, REGEX_PATTERNS));
            if rng.gen_bool(0.5) {
                leaf.regex_flags = Some((*pick(rng, &["i", "im", "s", "ims"])).to_string());
            }
            leaf
        }
        3 => {
            let (system, code) = *pick(rng, CODES);
            let mut code_ref = CodeRef::new(system, code);
            if rng.gen_bool(0.5) {
                code_ref = code_ref.with_display("coded diagnosis");
            }
            Criterion::code_leaf(CriterionType::DiagnosticTest, code_ref)
        }
        _ => {
            let mut leaf = presence_leaf(rng);
            if rng.gen_bool(0.2) {
                leaf = leaf.with_description("observed finding");
            }
            leaf
        }
    }
}

/// Random definition that validates with zero errors, for round-trip and
/// serialization tests. Optional metadata is present or absent at random;
/// some documents carry unknown properties.
pub fn definition(rng: &mut ChaCha8Rng) -> Definition {
    use osd_core::{Category, DefinitionType, Scope, Status};

    let titles = [
        "Generated case definition",
        "Definición generada",
        "Définition générée",
        "Generated syndromic indicator",
    ];
    let mut definition = Definition::new(
        format!("{} {}", pick(rng, &titles), rng.gen_range(0..10_000)),
        mixed_tree(rng, 4),
    );

    if rng.gen_bool(0.7) {
        definition.description = Some("Synthetic definition for property tests.".into());
    }
    if rng.gen_bool(0.6) {
        definition.scope = Some(*pick(rng, &[Scope::Broad, Scope::Specific]));
    }
    if rng.gen_bool(0.6) {
        definition.created_at =
            chrono::NaiveDate::from_ymd_opt(rng.gen_range(2015..2026), rng.gen_range(1..13), rng.gen_range(1..29));
    }
    if rng.gen_bool(0.5) {
        definition.published_in = Some("Synthetic Gazette".into());
    }
    if rng.gen_bool(0.5) {
        let ts = chrono::DateTime::from_timestamp(rng.gen_range(1_400_000_000..1_750_000_000), 0);
        definition.published_at = ts;
    }
    if rng.gen_bool(0.5) {
        definition.published_by = vec!["Open Syndrome Initiative".into()];
    }
    if rng.gen_bool(0.5) {
        definition.authors = vec!["A. Author".into(), "B. Author".into()];
    }
    if rng.gen_bool(0.6) {
        definition.location = Some((*pick(rng, &["Brazil", "Germany", "Kenya", "Fiji"])).into());
    }
    if rng.gen_bool(0.6) {
        definition.language =
            Some((*pick(rng, &["English", "Spanish", "Portuguese", "French"])).into());
    }
    if rng.gen_bool(0.5) {
        definition.organization = Some("Synthetic Health Authority".into());
    }
    if rng.gen_bool(0.7) {
        definition.status = Some(*pick(rng, &[Status::Draft, Status::Published, Status::Deprecated]));
    }
    if rng.gen_bool(0.5) {
        definition.keywords = vec!["generated".into(), "surveillance".into()];
    }
    if rng.gen_bool(0.6) {
        definition.category =
            Some(*pick(rng, &[Category::Confirmed, Category::Probable, Category::Suspected]));
    }
    if rng.gen_bool(0.6) {
        definition.version = Some(format!("{}.{}", rng.gen_range(0..4), rng.gen_range(0..10)));
    }
    if rng.gen_bool(0.8) {
        definition.open_syndrome_version = Some("v1".into());
    }
    if rng.gen_bool(0.5) {
        definition.definition_type = Some(*pick(
            rng,
            &[DefinitionType::CaseDefinition, DefinitionType::SyndromicIndicator],
        ));
    }
    if rng.gen_bool(0.3) {
        definition.surveillance_system_type = Some("syndromic".into());
    }
    if rng.gen_bool(0.3) {
        definition.exclusion_criteria = Some(mixed_tree(rng, 3));
    }
    if rng.gen_bool(0.5) {
        definition.references = vec!["https://example.org/source".into()];
    }
    if rng.gen_bool(0.3) {
        definition
            .extra
            .insert("x-pilot".into(), serde_json::json!({"cohort": rng.gen_range(0..5)}));
        definition.extra.insert("x-revision".into(), serde_json::json!(rng.gen_range(0..100)));
    }

    definition
}

/// Random record over the measles-style vocabulary, with occasional
/// attributes and codes.
pub fn record(rng: &mut ChaCha8Rng, id: usize) -> Record {
    let mut record = Record::new(format!("r{id}"));
    for finding in FINDINGS {
        match rng.gen_range(0..4) {
            0 => {
                record = record.with_finding(finding);
            }
            1 => {
                record = record.with_absent(finding);
            }
            _ => {}
        }
    }
    if rng.gen_bool(0.4) {
        record = record.with_attribute(
            "body_temperature",
            Scalar::Number(rng.gen_range(350..420) as f64 / 10.0),
        );
    }
    if rng.gen_bool(0.3) {
        record = record.with_attribute("age", Scalar::Number(rng.gen_range(0..95) as f64));
    }
    if rng.gen_bool(0.2) {
        let (system, code) = *pick(rng, CODES);
        record = record.with_code(system, code);
    }
    record
}

/// Leaf names used by a presence-only tree, normalized and sorted.
pub fn tree_universe(tree: &Criterion) -> Vec<String> {
    let mut names = std::collections::BTreeSet::new();
    tree.walk(&mut |node| {
        if !node.is_composite() {
            if let Some(name) = &node.name {
                names.insert(osd_core::normalize::normalize_name(name));
            }
        }
    });
    names.into_iter().collect()
}
