//! Corpus ingestion, dataset statistics, and graph export.
//!
//! A definitions dataset is a directory with the published layout:
//! `machine-readable/*.json` holds the OSD documents (the human-readable
//! siblings are ignored here). Loading is order-stable (sorted by path)
//! and per-file failures are collected, never fatal.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{rules, Diagnostic};
use crate::model::{Criterion, Definition, LogicalOperator};
use crate::normalize::normalize_name;
use crate::parse::parse_definition;
use crate::validate::validate;

/// One corpus file: its parsed definition (when parsing succeeded) and
/// every diagnostic it produced.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub definition: Option<Definition>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root {path}: {source}")]
    RootUnreadable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Load every `*.json` under `<root>/machine-readable`, sorted by path.
/// Files that fail to read or parse become entries with diagnostics and no
/// definition. A missing `machine-readable` subtree yields an empty list;
/// an unreadable root is fatal.
pub fn load_corpus(root: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    std::fs::metadata(root).map_err(|source| CorpusError::RootUnreadable {
        path: root.to_path_buf(),
        source,
    })?;

    let machine_readable = root.join("machine-readable");
    let mut paths = Vec::new();
    if machine_readable.is_dir() {
        collect_json_files(&machine_readable, &mut paths);
    }
    paths.sort();

    Ok(paths
        .into_iter()
        .map(|path| {
            let bytes = match std::fs::read(&path) {
                Ok(bytes) => bytes,
                Err(err) => {
                    return CorpusEntry {
                        path,
                        definition: None,
                        diagnostics: vec![Diagnostic::error(
                            rules::FILE_UNREADABLE,
                            "",
                            err.to_string(),
                        )],
                    };
                }
            };
            match parse_definition(&bytes) {
                Ok(definition) => {
                    let diagnostics = validate(&definition);
                    CorpusEntry {
                        path,
                        definition: Some(definition),
                        diagnostics,
                    }
                }
                Err(diagnostics) => CorpusEntry {
                    path,
                    definition: None,
                    diagnostics,
                },
            }
        })
        .collect())
}

fn collect_json_files(dir: &Path, acc: &mut Vec<PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return;
    };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect_json_files(&path, acc);
        } else if path.extension().is_some_and(|ext| ext == "json") {
            acc.push(path);
        }
    }
}

/// Aggregate statistics over a set of validated definitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub definition_count: usize,
    pub per_disease_counts: BTreeMap<String, usize>,
    pub language_distribution: BTreeMap<String, usize>,
    pub location_distribution: BTreeMap<String, usize>,
    pub category_distribution: BTreeMap<String, usize>,
    pub leaf_type_distribution: BTreeMap<String, usize>,
    pub symptom_primary_fraction: f64,
    pub depth_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Deserialize)]
struct DiseaseAliasRow {
    disease: String,
    patterns: Vec<String>,
}

/// Maps definitions to disease identities and public-health-threat
/// categories. The format itself has no disease-id field, so identity is
/// derived from a normalized title/keyword match table shipped as data.
#[derive(Debug, Clone)]
pub struct DiseaseTable {
    /// Ordered: the first disease with a matching pattern wins.
    aliases: Vec<(String, Vec<String>)>,
    categories: BTreeMap<String, String>,
}

static BUILTIN_TABLE: OnceLock<DiseaseTable> = OnceLock::new();

impl DiseaseTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static DiseaseTable {
        BUILTIN_TABLE.get_or_init(|| {
            DiseaseTable::from_json(
                include_str!("../data/disease_aliases.json"),
                include_str!("../data/threat_categories.json"),
            )
            .expect("builtin disease table parses")
        })
    }

    /// Build a table from the two JSON data documents: an ordered alias
    /// array `[{"disease", "patterns": [...]}]` and a category map
    /// `{"disease": "category"}`.
    pub fn from_json(aliases: &str, categories: &str) -> Result<DiseaseTable, serde_json::Error> {
        let rows: Vec<DiseaseAliasRow> = serde_json::from_str(aliases)?;
        let categories: BTreeMap<String, String> = serde_json::from_str(categories)?;
        Ok(DiseaseTable {
            aliases: rows
                .into_iter()
                .map(|row| {
                    let patterns = row
                        .patterns
                        .iter()
                        .map(|p| normalize_name(p))
                        .collect();
                    (row.disease, patterns)
                })
                .collect(),
            categories,
        })
    }

    /// Disease identity of a definition, from its title and keywords.
    pub fn disease_of(&self, definition: &Definition) -> Option<&str> {
        let mut haystack = normalize_name(&definition.title);
        for keyword in &definition.keywords {
            haystack.push(' ');
            haystack.push_str(&normalize_name(keyword));
        }
        let padded = format!(" {haystack} ");
        for (disease, patterns) in &self.aliases {
            if patterns
                .iter()
                .any(|pattern| padded.contains(&format!(" {pattern} ")))
            {
                return Some(disease);
            }
        }
        None
    }

    pub fn category_of(&self, disease: &str) -> Option<&str> {
        self.categories.get(disease).map(String::as_str)
    }
}

/// Compute corpus statistics with the builtin disease table.
pub fn compute_stats(definitions: &[Definition]) -> CorpusStats {
    compute_stats_with(definitions, DiseaseTable::builtin())
}

/// Compute corpus statistics with an explicit disease table.
///
/// A definition is counted as symptom-primary when `symptom` is a
/// plurality of its leaf criterion types, ties broken toward symptom.
/// Definitions that match no alias row are counted under their normalized
/// title so every definition stays auditable.
pub fn compute_stats_with(definitions: &[Definition], table: &DiseaseTable) -> CorpusStats {
    let mut stats = CorpusStats {
        definition_count: definitions.len(),
        per_disease_counts: BTreeMap::new(),
        language_distribution: BTreeMap::new(),
        location_distribution: BTreeMap::new(),
        category_distribution: BTreeMap::new(),
        leaf_type_distribution: BTreeMap::new(),
        symptom_primary_fraction: 0.0,
        depth_histogram: BTreeMap::new(),
    };

    let mut symptom_primary = 0usize;

    for definition in definitions {
        let disease = table
            .disease_of(definition)
            .map(str::to_string)
            .unwrap_or_else(|| normalize_name(&definition.title));
        let threat_category = table
            .category_of(&disease)
            .unwrap_or("uncategorized")
            .to_string();
        *stats.per_disease_counts.entry(disease).or_default() += 1;
        *stats.category_distribution.entry(threat_category).or_default() += 1;

        let language = definition
            .language
            .as_deref()
            .map(normalize_name)
            .filter(|l| !l.is_empty())
            .unwrap_or_else(|| "unknown".into());
        *stats.language_distribution.entry(language).or_default() += 1;

        let location = definition
            .location
            .clone()
            .filter(|l| !l.trim().is_empty())
            .unwrap_or_else(|| "unknown".into());
        *stats.location_distribution.entry(location).or_default() += 1;

        let mut leaf_counts: BTreeMap<&'static str, usize> = BTreeMap::new();
        for tree in definition.criterion_trees() {
            tree.walk(&mut |node| {
                if !node.is_composite() {
                    *leaf_counts.entry(node.criterion_type.as_str()).or_default() += 1;
                }
            });
        }
        for (leaf_type, count) in &leaf_counts {
            *stats
                .leaf_type_distribution
                .entry((*leaf_type).to_string())
                .or_default() += count;
        }
        let max_count = leaf_counts.values().copied().max().unwrap_or(0);
        let symptom_count = leaf_counts.get("symptom").copied().unwrap_or(0);
        if max_count > 0 && symptom_count == max_count {
            symptom_primary += 1;
        }

        *stats
            .depth_histogram
            .entry(definition.inclusion_criteria.depth())
            .or_default() += 1;
    }

    if !definitions.is_empty() {
        stats.symptom_primary_fraction = symptom_primary as f64 / definitions.len() as f64;
    }
    stats
}

/// Node/link document for force-directed layout tools: one node per
/// definition and per criterion, links from parent to child.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNode>,
    pub links: Vec<GraphLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphNode {
    pub id: String,
    pub label: String,
    pub kind: String,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphLink {
    pub source: String,
    pub target: String,
}

/// Export definitions as a node/link graph document.
pub fn export_graph(definitions: &[Definition]) -> GraphDocument {
    let mut doc = GraphDocument {
        nodes: Vec::new(),
        links: Vec::new(),
    };

    for (index, definition) in definitions.iter().enumerate() {
        let definition_id = format!("d{index}");
        doc.nodes.push(GraphNode {
            id: definition_id.clone(),
            label: definition.title.clone(),
            kind: "definition".into(),
            depth: 0,
        });
        add_criterion_nodes(
            &definition.inclusion_criteria,
            format!("{definition_id}.inclusion"),
            &definition_id,
            1,
            &mut doc,
        );
        if let Some(exclusion) = &definition.exclusion_criteria {
            add_criterion_nodes(
                exclusion,
                format!("{definition_id}.exclusion"),
                &definition_id,
                1,
                &mut doc,
            );
        }
    }

    doc
}

fn add_criterion_nodes(
    criterion: &Criterion,
    id: String,
    parent_id: &str,
    depth: usize,
    doc: &mut GraphDocument,
) {
    doc.nodes.push(GraphNode {
        id: id.clone(),
        label: criterion_label(criterion),
        kind: criterion.criterion_type.as_str().into(),
        depth,
    });
    doc.links.push(GraphLink {
        source: parent_id.to_string(),
        target: id.clone(),
    });
    for (index, child) in criterion.children().iter().enumerate() {
        add_criterion_nodes(child, format!("{id}.{index}"), &id, depth + 1, doc);
    }
}

fn criterion_label(criterion: &Criterion) -> String {
    if criterion.is_composite() {
        return match criterion.effective_operator() {
            LogicalOperator::AtLeast => {
                format!("AT_LEAST {}", criterion.at_least_count().unwrap_or(0))
            }
            op => op.as_str().to_string(),
        };
    }
    if let Some(name) = &criterion.name {
        return name.clone();
    }
    if let Some(code) = &criterion.code {
        return format!("{}:{}", code.system, code.code);
    }
    if let Some(attribute) = &criterion.attribute {
        return attribute.clone();
    }
    "(empty)".into()
}
