use crate::lexer::{LexError, Pos};

use super::error::ModelError;
use super::types::*;

fn syntax(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax(LexError { pos: Pos { line, col: 1 }, msg: msg.into() })
}

/// Splits a trailing `check <name>` off a description.
fn split_check(text: &str) -> (String, Option<String>) {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() >= 2 && words[words.len() - 2] == "check" {
        let name = words[words.len() - 1].to_string();
        (words[..words.len() - 2].join(" "), Some(name))
    } else {
        (words.join(" "), None)
    }
}

/// Parses a requirements document. The four mandatory constraints are
/// inserted, in front, when the document does not list them.
pub fn parse_requirements(src: &str) -> Result<RequirementSpec, ModelError> {
    let mut spec = RequirementSpec::default();
    for (n, raw) in src.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).ok_or_else(|| syntax(line_no, "incomplete line"))?;
        let (head, body) = rest
            .split_once(':')
            .ok_or_else(|| syntax(line_no, "expected `:` after the identifier"))?;
        let head = head.trim();
        let body = body.trim();
        match kw {
            "objective" | "constraint" => {
                if head.is_empty() || head.contains(char::is_whitespace) {
                    return Err(syntax(line_no, format!("invalid {kw} id `{head}`")));
                }
                let (description, check) = split_check(body);
                if kw == "objective" {
                    spec.objectives.push(Objective { id: head.to_string(), description, check });
                } else {
                    spec.constraints.push(Constraint {
                        id: head.to_string(),
                        kind: ConstraintKind::from_id(head),
                        description,
                        check,
                    });
                }
            }
            "query" => {
                let (name, mode) = head
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| syntax(line_no, "expected `query <name> <mode>: <predicate>`"))?;
                let mode = match mode.trim() {
                    "reachable" => QueryMode::Reachable,
                    "never" => QueryMode::Never,
                    "always" => QueryMode::Always,
                    other => return Err(syntax(line_no, format!("unknown query mode `{other}`"))),
                };
                if body.is_empty() {
                    return Err(syntax(line_no, "empty predicate"));
                }
                spec.queries.push(NamedQuery { name: name.to_string(), mode, predicate: body.to_string() });
            }
            other => return Err(syntax(line_no, format!("unknown entry `{other}`"))),
        }
    }
    let mut mandatory = Vec::new();
    for (kind, id, description) in ConstraintKind::mandatory() {
        if !spec.constraints.iter().any(|c| c.kind == kind) {
            mandatory.push(Constraint { id: id.to_string(), kind, description: description.to_string(), check: None });
        }
    }
    mandatory.append(&mut spec.constraints);
    spec.constraints = mandatory;
    Ok(spec)
}
