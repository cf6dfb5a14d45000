//! Name normalization shared by the evaluator, canonical equality, and
//! comparison universes.
//!
//! Definitions and records come from heterogeneous sources, so every name
//! lookup goes through the same function: Unicode NFC, case fold, trim,
//! and collapse of internal whitespace.

use unicode_normalization::UnicodeNormalization;

/// Normalize a finding name, leaf name, or attribute key.
///
/// `"  Maculo-Papular  Rash "` and `"maculo-papular rash"` normalize to the
/// same string.
pub fn normalize_name(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    let folded = composed.to_lowercase();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}
