//! The mined-pattern file written by `mine` and read by `detect`/`repair`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::corpus::ChangeExample;
use crate::change_graph::{change_graph_from_sources, ChangeGraph, ChangeId};
use crate::error::{Error, Result};
use crate::fgpdg::{GraphOptions, Mode};
use crate::lang::Signatures;
use crate::miner::Sep;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternsFile {
    pub format_version: u32,
    pub mode: Mode,
    pub closure_depth: usize,
    pub min_support: usize,
    pub signatures: Signatures,
    pub seps: Vec<Sep>,
    /// Sources of each pattern's reference (earliest) instance; repairs
    /// transplant code from these.
    pub changes: Vec<ChangeExample>,
}

impl PatternsFile {
    pub fn new(
        seps: Vec<Sep>,
        examples: &[ChangeExample],
        signatures: Signatures,
        opts: &GraphOptions,
        min_support: usize,
    ) -> Self {
        let wanted: BTreeSet<&ChangeId> = seps
            .iter()
            .filter_map(|s| s.instances.first())
            .map(|i| &i.change_id)
            .collect();
        let changes = examples
            .iter()
            .filter(|e| wanted.contains(&e.change_id))
            .cloned()
            .collect();
        PatternsFile {
            format_version: FORMAT_VERSION,
            mode: opts.mode,
            closure_depth: opts.closure_depth,
            min_support,
            signatures,
            seps,
            changes,
        }
    }

    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            mode: self.mode,
            closure_depth: self.closure_depth,
            strict: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PatternsFile = serde_json::from_str(&text).map_err(|e| Error::CorpusFormat {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::CorpusFormat {
                path: path.to_path_buf(),
                message: format!("unsupported format_version {}", file.format_version),
            });
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Rebuilds the change graphs of all reference instances.
    pub fn reference_graphs(&self) -> Result<BTreeMap<ChangeId, ChangeGraph>> {
        let opts = self.graph_options();
        self.changes
            .iter()
            .map(|c| {
                let cg = change_graph_from_sources(
                    c.change_id.clone(),
                    &c.old_source,
                    &c.new_source,
                    &self.signatures,
                    &opts,
                )?;
                Ok((c.change_id.clone(), cg))
            })
            .collect()
    }
}
