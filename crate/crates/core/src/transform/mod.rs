//! Structure-preserving transformations: a composition into one P/T net, an
//! extended component into a colored component, and colored components into
//! a connected colored system. Each records a log that the faithfulness
//! checks read back.

mod colored;
mod ptnet;
mod s3b;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::colored::PortTag;
use crate::expr::Type;
use crate::model::{BasicComponent, Direction};
use crate::petri::PetriError;

pub use colored::{compose_colored, extended_to_colored};
pub use ptnet::composition_to_ptnet;
pub use s3b::{check_s3b_colored, check_s3b_ptnet, S3bReport};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("action {member}.{action} (event {event}) is not paired by any POI entry")]
    UnpairedEvent { member: String, action: String, event: String },
    #[error("{poi}: receiver {receiver} expects color {expected} but the sender produces {found}")]
    ColorMismatch { poi: String, receiver: String, expected: Type, found: Type },
    #[error("{poi}: port {port} is tagged {tag} but is wired as the {wired}")]
    PortTag { poi: String, port: String, tag: PortTag, wired: &'static str },
    #[error("{component}: {detail}")]
    Type { component: String, detail: String },
    #[error("cannot connect the colored components: {0}")]
    Compose(String),
    #[error(transparent)]
    Petri(#[from] PetriError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mapping {
    pub source: String,
    pub target: String,
    pub rule: String,
}

/// What each source element became, and what could not be carried over.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransformationLog {
    pub mappings: Vec<Mapping>,
    pub omissions: Vec<String>,
}

impl TransformationLog {
    pub fn map(&mut self, source: impl Into<String>, target: impl Into<String>, rule: &str) {
        self.mappings.push(Mapping { source: source.into(), target: target.into(), rule: rule.to_string() });
    }

    pub fn omit(&mut self, what: impl Into<String>) {
        self.omissions.push(what.into());
    }

    pub fn extend(&mut self, other: TransformationLog) {
        self.mappings.extend(other.mappings);
        self.omissions.extend(other.omissions);
    }

    pub fn maps(&self, source: &str) -> bool {
        self.mappings.iter().any(|m| m.source == source)
    }
}

impl fmt::Display for TransformationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.mappings {
            writeln!(f, "{} -> {} [{}]", m.source, m.target, m.rule)?;
        }
        if self.omissions.is_empty() {
            writeln!(f, "omissions: none")
        } else {
            writeln!(f, "omissions:")?;
            for o in &self.omissions {
                writeln!(f, "  {o}")?;
            }
            Ok(())
        }
    }
}

/// Names of the source elements a faithful transformation must map: every
/// state, event used by an action, action, and exit condition of `base`,
/// qualified by `member`.
pub fn source_elements(member: &str, base: &BasicComponent) -> Vec<String> {
    let mut out = Vec::new();
    for s in &base.states {
        out.push(state_src(member, &s.id));
    }
    for e in &base.events {
        if base.actions.iter().any(|a| a.event == e.id) {
            out.push(event_src(member, &e.id));
        }
    }
    for a in &base.actions {
        out.push(action_src(member, &a.id));
    }
    for (from, action, to) in base.exit_triples() {
        out.push(exit_src(member, &from, &action, &to));
    }
    out
}

fn state_src(member: &str, id: &str) -> String {
    format!("state {member}.{id}")
}

fn event_src(member: &str, id: &str) -> String {
    format!("event {member}.{id}")
}

fn action_src(member: &str, id: &str) -> String {
    format!("action {member}.{id}")
}

fn exit_src(member: &str, from: &str, action: &str, to: &str) -> String {
    format!("exit {member}.{from}-{action}->{to}")
}

fn port_tag(dir: Direction) -> Option<PortTag> {
    match dir {
        Direction::Send => Some(PortTag::Out),
        Direction::Receive => Some(PortTag::In),
        Direction::Internal => None,
    }
}
