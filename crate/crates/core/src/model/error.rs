use thiserror::Error;

use crate::expr::TypeError;
use crate::lexer::LexError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("syntax error at {0}")]
    Syntax(#[from] LexError),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown member `{0}`")]
    UnknownMember(String),
    #[error("POI {poi}: `{member}.{action}` {reason}")]
    DanglingAction { poi: String, member: String, action: String, reason: String },
    #[error("extension does not contain its base: {0}")]
    BaseMismatch(String),
    #[error("expression syntax error at {0}")]
    ExprSyntax(LexError),
    #[error("in {context}: {source}")]
    Type { context: String, source: TypeError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    InFile { path: String, source: Box<ModelError> },
}

impl ModelError {
    pub fn in_file(self, path: impl Into<String>) -> ModelError {
        ModelError::InFile { path: path.into(), source: Box::new(self) }
    }

    /// Innermost error, skipping file context wrappers.
    pub fn root(&self) -> &ModelError {
        match self {
            ModelError::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}
