pub mod behavior;
pub mod colored;
pub mod expr;
mod graph_util;
pub mod lexer;
pub mod model;
pub mod num;
pub mod petri;
pub mod pipeline;
pub mod static_match;
pub mod statespace;
pub mod transform;

/// Incidence matrices over machine integers.
pub type Incidence = petri::IncidenceMatrices<i64>;
/// Incidence matrices over arbitrary-precision integers.
pub type BigIncidence = petri::IncidenceMatrices<num_bigint::BigInt>;
