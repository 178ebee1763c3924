//! Systematic edit pattern mining, detection and repair over fine-grained
//! program dependence graphs of MiniJ methods.
//!
//! The pipeline:
//!
//! 1. [`lang`] parses methods, [`diff`] maps old/new syntax trees.
//! 2. [`fgpdg`] builds expression-level dependence graphs with abstracted
//!    labels, [`change_graph`] pairs the old and new graphs of one change.
//! 3. [`miner`] finds frequent connected change subgraphs (edit patterns).
//! 4. [`detector`] locates pattern old graphs in client methods.
//! 5. [`transformer`] transplants pattern code into the client.
//! 6. [`pipeline`] ingests corpora, judges repairs and runs cross-validation.

pub mod canon;
pub mod change_graph;
pub mod detector;
pub mod diff;
pub mod error;
pub mod fgpdg;
pub mod graph;
pub mod lang;
pub mod matching;
pub mod miner;
pub mod pipeline;
pub mod transformer;

pub use error::{Error, Result};

/// Version tag written into every JSON document this crate emits.
pub const FORMAT_VERSION: u32 = 1;
