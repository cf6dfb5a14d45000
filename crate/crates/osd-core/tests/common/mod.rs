//! Shared test support: the independent reference interpreter, seeded
//! generators, and the indentation re-parser for rendered text.
#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod reparse;

use osd_core::{Criterion, CriterionType, Definition};

pub fn presence(name: &str) -> Criterion {
    Criterion::presence(CriterionType::Symptom, name)
}

/// The ECDC measles definition of the comparison figure: fever AND
/// maculo-papular rash AND at least one of cough, coryza, conjunctivitis.
pub fn ecdc_measles() -> Definition {
    let mut definition = Definition::new(
        "Measles case definition (ECDC)",
        Criterion::all_of(vec![
            presence("fever"),
            presence("maculo-papular rash"),
            Criterion::at_least(
                1,
                vec![presence("cough"), presence("coryza"), presence("conjunctivitis")],
            ),
        ]),
    );
    definition.organization = Some("European Centre for Disease Prevention and Control".into());
    definition
}

/// The India measles definition of the comparison figure: fever with
/// maculopapular rash, or clinician suspicion.
pub fn india_measles() -> Definition {
    Definition::new(
        "Measles case definition (India)",
        Criterion::any_of(vec![
            Criterion::all_of(vec![
                presence("fever"),
                presence("maculopapular rash (non-vesicular)"),
            ]),
            Criterion::presence(
                CriterionType::ProfessionalJudgment,
                "health worker or clinician suspects measles",
            ),
        ]),
    )
}

/// The bundled sample corpus checkout used when no dataset path is given.
pub fn sample_corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/corpus")
}

/// Dataset directory for corpus tests: `OSD_DATASET_DIR` when set, else
/// the bundled sample corpus, else `None` (tests skip cleanly).
pub fn dataset_dir() -> Option<std::path::PathBuf> {
    if let Ok(dir) = std::env::var("OSD_DATASET_DIR") {
        let path = std::path::PathBuf::from(dir);
        return path.is_dir().then_some(path);
    }
    let bundled = sample_corpus_dir();
    bundled.is_dir().then_some(bundled)
}
