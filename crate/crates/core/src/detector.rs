//! Locating pattern old graphs in client methods.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgpdg::Fgpdg;
use crate::graph::{find_embeddings, LGraph};
use crate::miner::{match_label, Sep};

/// One place where a pattern's old graph occurs in a client method.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Match {
    pub sep_id: String,
    pub client_method: String,
    /// `g_map[i]` is the client node matched to old-graph node `i`.
    pub g_map: Vec<usize>,
}

impl Match {
    pub fn image(&self) -> BTreeSet<usize> {
        self.g_map.iter().copied().collect()
    }
}

/// Client graph with the labels used for pattern matching.
pub fn fgpdg_lgraph(g: &Fgpdg) -> LGraph {
    LGraph {
        labels: g
            .nodes
            .iter()
            .map(|n| match_label(n.category, &n.label))
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| (e.src, e.dst, e.label.as_str().to_string()))
            .collect(),
    }
}

/// All embeddings of the pattern's old graph, one per distinct image set.
pub fn detect(client: &Fgpdg, sep: &Sep) -> Result<Vec<Match>> {
    if client.mode != sep.mode {
        return Err(Error::ModeMismatch {
            pattern: sep.mode.to_string(),
            client: client.mode.to_string(),
        });
    }
    let target = fgpdg_lgraph(client);
    let mut seen: HashSet<BTreeSet<usize>> = HashSet::new();
    let mut out = Vec::new();
    // embeddings arrive sorted, so the first per image set is the smallest
    for m in find_embeddings(&sep.old_graph.to_lgraph(), &target) {
        if seen.insert(m.iter().copied().collect()) {
            out.push(Match {
                sep_id: sep.id.clone(),
                client_method: client.method_id.clone(),
                g_map: m,
            });
        }
    }
    Ok(out)
}

/// Drops matches that touch a place where the new graph already occurs.
pub fn filter_already_applied(client: &Fgpdg, sep: &Sep, matches: Vec<Match>) -> Vec<Match> {
    let target = fgpdg_lgraph(client);
    let applied: HashSet<usize> = find_embeddings(&sep.new_graph.to_lgraph(), &target)
        .into_iter()
        .flatten()
        .collect();
    matches
        .into_iter()
        .filter(|m| !m.g_map.iter().any(|n| applied.contains(n)))
        .collect()
}
