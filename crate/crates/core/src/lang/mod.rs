//! MiniJ: a Java-like, one-method-per-file language.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod types;

pub use ast::{Ast, AstNode, LiteralKind, NodeId, NodeKind, Span};
pub use parser::{parse_method, parse_statement};
pub use printer::{print_expression, print_method, print_statement};
pub use types::{build_type_env, Signatures, TypeEnv, SELF_TYPE, UNKNOWN_TYPE};
