//! Open Syndrome Definition (OSD) toolkit.
//!
//! Machine-readable case and syndrome definitions: parse and validate OSD
//! JSON documents, evaluate patient records against them with three-valued
//! logic, render them back to human-readable text, compare definitions,
//! and compute statistics over definition corpora.
//!
//! The usual flow:
//!
//! ```
//! use osd_core::{parse_definition, classify, Record, Outcome};
//!
//! let doc = br#"{
//!   "title": "Example fever definition",
//!   "inclusion_criteria": {"type": "symptom", "name": "fever"}
//! }"#;
//! let definition = parse_definition(doc).expect("valid document");
//! let record = Record::new("patient-1").with_finding("Fever");
//! assert_eq!(classify(&definition, &record).outcome, Outcome::Match);
//! ```

pub mod compare;
pub mod corpus;
pub mod diagnostic;
pub mod evaluate;
pub mod model;
pub mod normalize;
pub mod parse;
pub mod regex_dialect;
pub mod render;
pub mod validate;

pub use compare::{record_compare, truth_table_compare, ComparisonReport, RecordComparison};
pub use corpus::{compute_stats, export_graph, load_corpus, CorpusEntry, CorpusStats};
pub use diagnostic::{rule_registry, Diagnostic, Rule, Severity};
pub use evaluate::{
    classify, classify_stream, eval_criterion, read_records, Outcome, Record, RecordError,
    StreamEntry, TraceNode, Truth, Verdict,
};
pub use model::{
    canonical_equal, Category, CodeRef, ComparisonOperator, Criterion, CriterionType, Definition,
    DefinitionType, LogicalOperator, Scalar, Scope, Status,
};
pub use parse::{parse_definition, serialize_definition};
pub use render::{render, RenderOptions};
pub use validate::{check_presence_only, validate};
