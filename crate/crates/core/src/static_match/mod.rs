//! Syntactic and static-semantic composability checks over a taxonomy of
//! classes and synonyms.

mod rules;
mod taxonomy;

pub use rules::{check_static_semantic, check_syntactic, MatchLevel, MatchReport, Violation};
pub use taxonomy::{parse_taxonomy, semantic_relation, SemanticRelation, Taxonomy, TaxonomyError};
