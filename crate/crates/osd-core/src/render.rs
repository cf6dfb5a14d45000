//! Deterministic reverse conversion: render a validated definition as
//! human-readable structured text.
//!
//! The layout follows the narrative style of published case definitions:
//! an optional metadata header, then an `Inclusion criteria:` block and an
//! optional `Exclusion criteria:` block. At the top level of a block,
//! AND/OR composites read as items joined by operator words; nested groups
//! are introduced by a header line (`any of the following:`) with children
//! indented one level deeper. Output is UTF-8 with LF line endings, no
//! trailing whitespace, and is byte-identical across runs.

use std::fmt::Write as _;

use crate::model::{Criterion, Definition, LogicalOperator};

/// Operator wording, replaceable for non-English output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWords {
    /// Separator between top-level AND items.
    pub and: String,
    /// Separator between top-level OR items.
    pub or: String,
    /// Header template for AT_LEAST groups; `{n}` is replaced by the count.
    pub at_least: String,
    /// Header for nested AND groups.
    pub all_of: String,
    /// Header for nested OR groups.
    pub any_of: String,
}

impl Default for OperatorWords {
    fn default() -> Self {
        OperatorWords {
            and: "AND".into(),
            or: "OR".into(),
            at_least: "at least {n} of the following".into(),
            all_of: "all of the following".into(),
            any_of: "any of the following".into(),
        }
    }
}

/// Rendering options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    /// Emit the title/organization/status/version/category header.
    pub include_metadata: bool,
    /// Spaces per indentation level; clamped to 1..=8.
    pub indent_width: usize,
    pub operator_words: OperatorWords,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            include_metadata: true,
            indent_width: 2,
            operator_words: OperatorWords::default(),
        }
    }
}

impl RenderOptions {
    pub fn without_metadata() -> Self {
        RenderOptions {
            include_metadata: false,
            ..Default::default()
        }
    }

    fn indent(&self) -> usize {
        self.indent_width.clamp(1, 8)
    }
}

/// Render a definition as structured text. The definition must have passed
/// validation with zero errors; rendering itself cannot fail.
pub fn render(definition: &Definition, options: &RenderOptions) -> String {
    let mut out = String::new();

    if options.include_metadata {
        out.push_str(&definition.title);
        out.push('\n');
        if let Some(organization) = &definition.organization {
            writeln!(out, "Organization: {organization}").unwrap();
        }
        if let Some(status) = definition.status {
            writeln!(out, "Status: {status}").unwrap();
        }
        if let Some(version) = &definition.version {
            writeln!(out, "Version: {version}").unwrap();
        }
        if let Some(category) = definition.category {
            writeln!(out, "Category: {category}").unwrap();
        }
        out.push('\n');
    }

    out.push_str("Inclusion criteria:\n");
    render_block(&definition.inclusion_criteria, 1, options, &mut out);

    if let Some(exclusion) = &definition.exclusion_criteria {
        out.push_str("\nExclusion criteria:\n");
        render_block(exclusion, 1, options, &mut out);
    }

    out
}

/// Render the root of a criteria block. Top-level AND/OR composites use
/// separator style; everything else falls through to node rendering.
fn render_block(criterion: &Criterion, level: usize, options: &RenderOptions, out: &mut String) {
    let operator = criterion.effective_operator();
    if criterion.is_composite() && matches!(operator, LogicalOperator::And | LogicalOperator::Or) {
        let word = match operator {
            LogicalOperator::And => &options.operator_words.and,
            _ => &options.operator_words.or,
        };
        for (index, child) in criterion.children().iter().enumerate() {
            if index > 0 {
                push_line(out, level, word, options);
            }
            render_node(child, level, options, out);
        }
    } else {
        render_node(criterion, level, options, out);
    }
}

/// Render one criterion: a leaf line, or a group header plus children.
fn render_node(criterion: &Criterion, level: usize, options: &RenderOptions, out: &mut String) {
    if !criterion.is_composite() {
        push_line(out, level, &leaf_text(criterion), options);
        return;
    }

    let words = &options.operator_words;
    let header = match criterion.effective_operator() {
        LogicalOperator::And => words.all_of.clone(),
        LogicalOperator::Or => words.any_of.clone(),
        LogicalOperator::AtLeast => {
            let n = criterion.at_least_count().unwrap_or(0);
            words.at_least.replace("{n}", &n.to_string())
        }
    };
    push_line(out, level, &format!("{header}:"), options);
    for child in criterion.children() {
        render_node(child, level + 1, options, out);
    }
}

/// Text form of a leaf: name, `attribute operator value`,
/// `attribute matches /pattern/flags`, or `code system:code (display)`.
fn leaf_text(criterion: &Criterion) -> String {
    if let Some(code) = &criterion.code {
        let mut text = format!("code {}:{}", code.system, code.code);
        if let Some(display) = &code.display {
            write!(text, " ({display})").unwrap();
        }
        return text;
    }
    if let Some(attribute) = &criterion.attribute {
        if criterion.operator == Some(crate::model::ComparisonOperator::Regex) {
            let pattern = criterion.regex_pattern.as_deref().unwrap_or("");
            let flags = criterion.regex_flags.as_deref().unwrap_or("");
            return format!("{attribute} matches /{pattern}/{flags}");
        }
        if let (Some(operator), Some(value)) = (criterion.operator, &criterion.value) {
            let value_text = match value {
                crate::model::Scalar::Text(t) => format!("{t:?}"),
                other => other.to_string(),
            };
            return format!("{attribute} {} {value_text}", operator.as_str());
        }
    }
    criterion.name.clone().unwrap_or_default()
}

fn push_line(out: &mut String, level: usize, text: &str, options: &RenderOptions) {
    let trimmed = text.trim_end();
    if trimmed.is_empty() {
        out.push('\n');
        return;
    }
    for _ in 0..level * options.indent() {
        out.push(' ');
    }
    out.push_str(trimmed);
    out.push('\n');
}
