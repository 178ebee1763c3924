use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("expected exactly one method, found {0}")]
    MultipleMethods(usize),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("variable `{0}` is declared twice in the same scope")]
    DuplicateDeclaration(String),
    #[error("receiver `{0}` has no known type")]
    UnresolvedReceiver(String),
    #[error("AST node {0} does not belong to this method")]
    ForeignAstNode(usize),
    #[error("graph fragment is not connected")]
    DisconnectedFragment,
    #[error("abstraction mode mismatch: pattern uses {pattern}, client uses {client}")]
    ModeMismatch { pattern: String, client: String },
    #[error("cannot attach transplanted subtree rooted at node {0}")]
    UnattachableMts(usize),
    #[error("repaired method is not valid MiniJ: {0}")]
    InvalidResult(String),
    #[error("corpus format error in {path}: {message}")]
    CorpusFormat { path: PathBuf, message: String },
    #[error("invalid signature table: {0}")]
    Signatures(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Short machine-readable name used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax-error",
            Error::MultipleMethods(_) => "multiple-methods",
            Error::MalformedTree(_) => "malformed-tree",
            Error::DuplicateDeclaration(_) => "duplicate-declaration",
            Error::UnresolvedReceiver(_) => "unresolved-receiver",
            Error::ForeignAstNode(_) => "foreign-ast-node",
            Error::DisconnectedFragment => "disconnected-fragment",
            Error::ModeMismatch { .. } => "mode-mismatch",
            Error::UnattachableMts(_) => "unattachable-mts",
            Error::InvalidResult(_) => "invalid-result",
            Error::CorpusFormat { .. } => "corpus-format",
            Error::Signatures(_) => "signatures",
            Error::Invariant(_) => "invariant",
            Error::Io { .. } => "io",
        }
    }
}
