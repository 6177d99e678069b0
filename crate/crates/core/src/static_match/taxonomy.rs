use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::lexer::{Cursor, LexError, Tok};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("syntax error at {0}")]
    Syntax(#[from] LexError),
    #[error("class `{0}` declared with two different parents")]
    ConflictingParent(String),
    #[error("parent links form a cycle through `{0}`")]
    Cycle(String),
    #[error("term `{0}` appears in more than one equivalence group")]
    OverlappingGroups(String),
}

/// Six-way classification of how two terms relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SemanticRelation {
    Exact,
    Equivalent,
    /// The first term is the direct parent of the second.
    DirectParent,
    /// The first term is a direct child of the second.
    DirectChild,
    /// Same tree, related through more than one step or as cousins.
    Indirect,
    None,
}

/// A forest of classes plus disjoint groups of synonyms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    parents: BTreeMap<String, Option<String>>,
    groups: Vec<BTreeSet<String>>,
}

impl Taxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn knows(&self, term: &str) -> bool {
        self.parents.contains_key(term) || self.groups.iter().any(|g| g.contains(term))
    }

    pub fn parent(&self, term: &str) -> Option<&str> {
        self.parents.get(term).and_then(|p| p.as_deref())
    }

    /// Declares `name`, optionally under `parent`. Parents are declared
    /// implicitly as roots on first mention.
    pub fn add_class(&mut self, name: &str, parent: Option<&str>) -> Result<(), TaxonomyError> {
        if let Some(p) = parent {
            self.parents.entry(p.to_string()).or_insert(None);
        }
        match self.parents.get(name) {
            Some(Some(existing)) if Some(existing.as_str()) != parent => {
                return Err(TaxonomyError::ConflictingParent(name.to_string()))
            }
            Some(Some(_)) => {}
            _ => {
                self.parents.insert(name.to_string(), parent.map(str::to_string));
            }
        }
        // Walking up must terminate.
        let mut cur = name.to_string();
        for _ in 0..=self.parents.len() {
            match self.parent(&cur) {
                Some(p) => cur = p.to_string(),
                None => return Ok(()),
            }
        }
        Err(TaxonomyError::Cycle(name.to_string()))
    }

    pub fn add_group<I: IntoIterator<Item = String>>(&mut self, terms: I) -> Result<(), TaxonomyError> {
        let group: BTreeSet<String> = terms.into_iter().collect();
        for t in &group {
            if self.groups.iter().any(|g| g.contains(t)) {
                return Err(TaxonomyError::OverlappingGroups(t.clone()));
            }
        }
        self.groups.push(group);
        Ok(())
    }

    fn root(&self, term: &str) -> Option<String> {
        if !self.parents.contains_key(term) {
            return None;
        }
        let mut cur = term.to_string();
        while let Some(p) = self.parent(&cur) {
            cur = p.to_string();
        }
        Some(cur)
    }

    /// Classifies the relation of `a` to `b`.
    pub fn relation(&self, a: &str, b: &str) -> SemanticRelation {
        if a == b {
            return SemanticRelation::Exact;
        }
        if self.groups.iter().any(|g| g.contains(a) && g.contains(b)) {
            return SemanticRelation::Equivalent;
        }
        if self.parent(b) == Some(a) {
            return SemanticRelation::DirectParent;
        }
        if self.parent(a) == Some(b) {
            return SemanticRelation::DirectChild;
        }
        match (self.root(a), self.root(b)) {
            (Some(ra), Some(rb)) if ra == rb => SemanticRelation::Indirect,
            _ => SemanticRelation::None,
        }
    }
}

/// Free function form of [`Taxonomy::relation`].
pub fn semantic_relation(a: &str, b: &str, t: &Taxonomy) -> SemanticRelation {
    t.relation(a, b)
}

/// Parses `class <name> [parent <name>]` and `equiv <a>, <b>[, ...]` entries.
/// Names containing spaces or punctuation must be quoted.
pub fn parse_taxonomy(src: &str) -> Result<Taxonomy, TaxonomyError> {
    let mut c = Cursor::new(src)?;
    let mut t = Taxonomy::new();
    while !c.at_eof() {
        match c.next() {
            Tok::Ident(k) if k == "class" => {
                let name = c.expect_term()?;
                let parent = if c.accept_kw("parent") { Some(c.expect_term()?) } else { None };
                t.add_class(&name, parent.as_deref())?;
            }
            Tok::Ident(k) if k == "equiv" => {
                let mut terms = vec![c.expect_term()?];
                while c.accept_sym(",") {
                    terms.push(c.expect_term()?);
                }
                t.add_group(terms)?;
            }
            other => {
                return Err(LexError { pos: c.pos(), msg: format!("expected `class` or `equiv`, found {other}") }.into())
            }
        }
        c.accept_sym(";");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SemanticRelation::*;

    fn units() -> Taxonomy {
        parse_taxonomy(
            "class Speed\nclass \"m/s\" parent Speed\nclass \"km/h\" parent Speed\n\
             class time\nclass second parent time\nequiv Healthcare, Medical\n",
        )
        .unwrap()
    }

    #[test]
    fn six_way_classification() {
        let t = units();
        assert_eq!(t.relation("Production", "Production"), Exact);
        assert_eq!(t.relation("Healthcare", "Medical"), Equivalent);
        assert_eq!(t.relation("m/s", "km/h"), Indirect);
        assert_eq!(t.relation("Speed", "m/s"), DirectParent);
        assert_eq!(t.relation("second", "time"), DirectChild);
        assert_eq!(t.relation("second", "Speed"), None);
        assert_eq!(t.relation("unknown", "Speed"), None);
    }

    #[test]
    fn grandparents_are_indirect() {
        let t = parse_taxonomy("class a\nclass b parent a\nclass c parent b").unwrap();
        assert_eq!(t.relation("a", "c"), Indirect);
    }

    #[test]
    fn rejects_cycles_and_overlaps() {
        assert!(matches!(
            parse_taxonomy("class a parent b\nclass b parent a"),
            Err(TaxonomyError::Cycle(_))
        ));
        assert!(matches!(
            parse_taxonomy("equiv a, b\nequiv b, c"),
            Err(TaxonomyError::OverlappingGroups(_))
        ));
        assert!(matches!(
            parse_taxonomy("class a parent b\nclass a parent c"),
            Err(TaxonomyError::ConflictingParent(_))
        ));
    }
}
