//! Place/transition nets: token game, incidence matrices, state equation,
//! Farkas invariants, reachability and coverability graphs, and property
//! checks including bounded fairness.

mod algebra;
mod graphs;
mod invariants;
mod net;
mod pnml;
mod properties;

use thiserror::Error;

pub use algebra::{
    incidence, marking_vector, state_equation, IncidenceMatrices, MatrixKind, NegativeResultWarning,
    StateEquationResult,
};
pub use graphs::{coverability_graph, reachability_graph, COVERABILITY_LIMIT};
pub use invariants::{
    farkas, minimal_support, p_invariants, p_invariants_of, t_invariants, t_invariants_of, Invariant, InvariantKind,
    InvariantSet,
};
pub use net::{Marking, NetArc, PlaceTransitionNet, Tokens};
pub use pnml::{from_pnml, to_pnml};
pub use properties::{
    check_b_fairness, check_boundedness, check_deadlock_free, check_deadlock_free_with, Boundedness,
    DeadlockVerdict, FairnessVerdict, UnfairReason,
};

#[derive(Debug, Error)]
pub enum PetriError {
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("unknown place or transition `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is already a place or transition")]
    DuplicateNode(String),
    #[error("arc {from} -> {to} connects two nodes of the same kind")]
    SameKindArc { from: String, to: String },
    #[error("arc {from} -> {to} has weight 0")]
    ZeroWeight { from: String, to: String },
    #[error("transition `{transition}` is not enabled at {marking}")]
    NotEnabled { transition: String, marking: String },
    #[error("expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative firing count for `{0}`")]
    NegativeFiringCount(String),
    #[error("marking contains ω")]
    OmegaMarking,
    #[error("PNML: {0}")]
    Pnml(String),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}
