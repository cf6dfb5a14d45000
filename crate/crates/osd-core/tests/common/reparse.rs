//! Test-only indentation parser: reconstruct a criterion tree from text
//! produced by the renderer with default options. Handles presence and
//! comparison leaves, which is all the fidelity property covers.

use osd_core::{ComparisonOperator, Criterion, CriterionType, LogicalOperator, Scalar};

const INDENT: usize = 2;

#[derive(Debug, Clone)]
struct Line {
    level: usize,
    text: String,
}

/// Parse the `Inclusion criteria:` block of rendered text back into a
/// criterion tree. Panics on text the renderer cannot have produced; this
/// is a test oracle, not a production parser.
pub fn reparse_inclusion(rendered: &str) -> Criterion {
    let mut lines = rendered.lines().peekable();
    for line in lines.by_ref() {
        if line == "Inclusion criteria:" {
            break;
        }
    }
    let block: Vec<Line> = lines
        .take_while(|line| !line.trim().is_empty() && *line != "Exclusion criteria:")
        .map(|line| {
            let spaces = line.len() - line.trim_start().len();
            assert_eq!(spaces % INDENT, 0, "odd indentation in {line:?}");
            Line {
                level: spaces / INDENT,
                text: line.trim().to_string(),
            }
        })
        .collect();
    assert!(!block.is_empty(), "no inclusion block in {rendered:?}");
    parse_block(&block, 1)
}

/// Parse one block: items at `level`, optionally joined by AND/OR
/// separator lines at the same level.
fn parse_block(lines: &[Line], level: usize) -> Criterion {
    let mut items: Vec<Criterion> = Vec::new();
    let mut separators: Vec<LogicalOperator> = Vec::new();
    let mut index = 0;

    while index < lines.len() {
        let line = &lines[index];
        assert_eq!(line.level, level, "unexpected indentation at {:?}", line.text);
        match line.text.as_str() {
            "AND" => {
                separators.push(LogicalOperator::And);
                index += 1;
            }
            "OR" => {
                separators.push(LogicalOperator::Or);
                index += 1;
            }
            text => {
                if let Some(operator) = parse_header(text) {
                    let start = index + 1;
                    let mut end = start;
                    while end < lines.len() && lines[end].level > level {
                        end += 1;
                    }
                    let children: Vec<Criterion> = split_children(&lines[start..end], level + 1)
                        .into_iter()
                        .collect();
                    items.push(match operator {
                        HeaderOperator::And => Criterion::all_of(children),
                        HeaderOperator::Or => Criterion::any_of(children),
                        HeaderOperator::AtLeast(n) => Criterion::at_least(n, children),
                    });
                    index = end;
                } else {
                    items.push(parse_leaf(text));
                    index += 1;
                }
            }
        }
    }

    if separators.is_empty() {
        assert_eq!(items.len(), 1, "separator-free block must be one item");
        return items.into_iter().next().unwrap();
    }
    let operator = separators[0];
    assert!(
        separators.iter().all(|s| *s == operator),
        "mixed separators in one block"
    );
    assert_eq!(separators.len(), items.len() - 1);
    Criterion::composite(operator, items)
}

/// Children of a header block: each child is a leaf line at `level` or a
/// header line at `level` plus everything deeper.
fn split_children(lines: &[Line], level: usize) -> Vec<Criterion> {
    let mut children = Vec::new();
    let mut index = 0;
    while index < lines.len() {
        let line = &lines[index];
        assert_eq!(line.level, level, "unexpected indentation at {:?}", line.text);
        if let Some(operator) = parse_header(&line.text) {
            let start = index + 1;
            let mut end = start;
            while end < lines.len() && lines[end].level > level {
                end += 1;
            }
            let nested = split_children(&lines[start..end], level + 1);
            children.push(match operator {
                HeaderOperator::And => Criterion::all_of(nested),
                HeaderOperator::Or => Criterion::any_of(nested),
                HeaderOperator::AtLeast(n) => Criterion::at_least(n, nested),
            });
            index = end;
        } else {
            children.push(parse_leaf(&line.text));
            index += 1;
        }
    }
    children
}

enum HeaderOperator {
    And,
    Or,
    AtLeast(u64),
}

fn parse_header(text: &str) -> Option<HeaderOperator> {
    match text {
        "all of the following:" => Some(HeaderOperator::And),
        "any of the following:" => Some(HeaderOperator::Or),
        _ => {
            let rest = text.strip_prefix("at least ")?;
            let rest = rest.strip_suffix(" of the following:")?;
            rest.parse().ok().map(HeaderOperator::AtLeast)
        }
    }
}

fn parse_leaf(text: &str) -> Criterion {
    for operator in [
        ComparisonOperator::Ge,
        ComparisonOperator::Le,
        ComparisonOperator::Eq,
        ComparisonOperator::Ne,
        ComparisonOperator::Gt,
        ComparisonOperator::Lt,
    ] {
        let token = format!(" {} ", operator.as_str());
        if let Some(split_at) = text.find(&token) {
            let attribute = &text[..split_at];
            let value_text = &text[split_at + token.len()..];
            if let Some(value) = parse_value(value_text) {
                return Criterion::comparison(attribute, operator, value);
            }
        }
    }
    Criterion::presence(CriterionType::Symptom, text)
}

fn parse_value(text: &str) -> Option<Scalar> {
    if text == "true" {
        return Some(Scalar::Bool(true));
    }
    if text == "false" {
        return Some(Scalar::Bool(false));
    }
    if text.starts_with('"') && text.ends_with('"') && text.len() >= 2 {
        return Some(Scalar::Text(text[1..text.len() - 1].to_string()));
    }
    text.parse::<f64>().ok().map(Scalar::Number)
}
