//! Corpus ingestion, pattern files, the repair judge and cross-validation.

pub mod corpus;
pub mod eval;
pub mod judge;
pub mod patterns;

pub use corpus::{build_change_graphs, ingest_corpus, ChangeExample, Corpus};
pub use eval::{cross_validate, EvalConfig, Report};
pub use judge::{judge_repair, FailureKind, Verdict};
pub use patterns::PatternsFile;
