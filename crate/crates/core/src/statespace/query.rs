use std::fmt;

use serde::Serialize;

use crate::model::{NamedQuery, QueryMode};

use super::graph::{Path, StateGraph};
use super::predicate::{MarkingView, Predicate, PredicateError};

/// Result of a named query over a state graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryOutcome {
    pub name: String,
    pub mode: QueryMode,
    pub satisfied: bool,
    /// Matching nodes for `reachable`, violating nodes otherwise.
    pub witnesses: Vec<usize>,
    /// Shortest path from a root to the first witness.
    pub path: Option<Path>,
    /// The graph was truncated. A `reachable` success or a `never`/`always`
    /// failure still stands; the other answers only cover the explored part.
    pub incomplete: bool,
}

impl QueryOutcome {
    /// False when truncation could change the answer.
    pub fn conclusive(&self) -> bool {
        !self.incomplete || (self.mode == QueryMode::Reachable) == self.satisfied
    }
}

impl fmt::Display for QueryOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            QueryMode::Reachable => "reachable",
            QueryMode::Never => "never",
            QueryMode::Always => "always",
        };
        write!(f, "{} ({mode}): {}", self.name, if self.satisfied { "satisfied" } else { "violated" })?;
        if !self.witnesses.is_empty() {
            let shown: Vec<String> = self.witnesses.iter().take(10).map(usize::to_string).collect();
            let more = if self.witnesses.len() > 10 { format!(" and {} more", self.witnesses.len() - 10) } else { String::new() };
            write!(f, "; nodes {}{more}", shown.join(", "))?;
        }
        if let Some(p) = &self.path {
            let labels: Vec<&str> = p.arcs.iter().map(|a| a.label.as_str()).collect();
            write!(f, "; path of {} steps", labels.len())?;
            if labels.len() <= 40 {
                write!(f, ": {}", labels.join(" "))?;
            }
        }
        if !self.conclusive() {
            write!(f, " (inconclusive: graph truncated)")?;
        }
        Ok(())
    }
}

/// Evaluates `query` on every node of `g`, resolving place names with
/// `resolve`.
pub fn evaluate_query<M: MarkingView>(
    g: &StateGraph<M>,
    query: &NamedQuery,
    resolve: impl Fn(&str) -> Option<usize>,
) -> Result<QueryOutcome, PredicateError> {
    let pred = Predicate::parse(&query.predicate)?.bind(&resolve)?;
    Ok(evaluate(g, &query.name, query.mode, &pred))
}

pub fn evaluate<M: MarkingView>(g: &StateGraph<M>, name: &str, mode: QueryMode, pred: &Predicate<usize>) -> QueryOutcome {
    let witnesses = match mode {
        QueryMode::Reachable | QueryMode::Never => g.search_nodes(|m| pred.eval(m), None),
        QueryMode::Always => g.search_nodes(|m| !pred.eval(m), None),
    };
    let satisfied = match mode {
        QueryMode::Reachable => !witnesses.is_empty(),
        QueryMode::Never | QueryMode::Always => witnesses.is_empty(),
    };
    let path = witnesses.first().and_then(|&w| g.roots().find_map(|r| g.path_to(r, w)));
    QueryOutcome { name: name.to_string(), mode, satisfied, witnesses, path, incomplete: g.budget_exceeded() }
}
