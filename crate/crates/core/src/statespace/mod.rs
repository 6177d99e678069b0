//! State graphs: generation, queries, compositional reduction and export.

mod export;
mod generate;
mod graph;
mod predicate;
mod query;
mod reduce;

pub use export::{export, to_dot, to_graphml, ExportError, ExportFormat};
pub use generate::{
    arc_event, arc_transition, binding_label, colored_successors, generate_colored, generate_ptnet, top_level_description,
    top_level_nonempty, DEFAULT_BUDGET,
};
pub use graph::{explore, try_explore, Arc, DeadMarkings, GraphError, Node, Path, StateGraph};
pub use predicate::{parse_literal, Cmp, FieldPred, FieldTest, MarkingView, Predicate, PredicateError};
pub use query::{evaluate, evaluate_query, QueryOutcome};
pub use reduce::{generate_reduced, reduce_compositional, ReductionReport, RootRemovedWarning};
