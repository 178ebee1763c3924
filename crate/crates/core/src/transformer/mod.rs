//! Applying an edit pattern at a detected client location.

pub mod apply;
pub mod mapping;
pub mod mts;
pub mod naming;

use serde::Serialize;

pub use apply::{apply_sep, mts_set_for, Repaired};
pub use mapping::{map_new_to_client, NodeMappingSet};
pub use mts::{compute_mts, reduce_mts, Mts};
pub use naming::{concretize_names, fresh_name};

use crate::change_graph::ChangeGraph;
use crate::detector::{detect, filter_already_applied, Match};
use crate::error::{Error, Result};
use crate::fgpdg::{build_closed, Fgpdg, GraphOptions};
use crate::lang::{build_type_env, parse_method, print_method, Ast, Signatures, TypeEnv};
use crate::miner::Sep;

/// A parsed client method with its graph.
#[derive(Debug, Clone)]
pub struct Client {
    pub ast: Ast,
    pub env: TypeEnv,
    pub graph: Fgpdg,
}

impl Client {
    pub fn from_ast(ast: Ast, signatures: &Signatures, opts: &GraphOptions) -> Result<Self> {
        let env = build_type_env(&ast, signatures)?;
        let graph = build_closed(&ast, &env, opts)?;
        Ok(Client { ast, env, graph })
    }

    pub fn parse(source: &str, signatures: &Signatures, opts: &GraphOptions) -> Result<Self> {
        Self::from_ast(parse_method(source)?, signatures, opts)
    }

    /// Applicable matches in source order.
    pub fn matches(&self, sep: &Sep) -> Result<Vec<Match>> {
        let found = detect(&self.graph, sep)?;
        let mut found = filter_already_applied(&self.graph, sep, found);
        let order = self.ast.preorder();
        let rank = |n: usize| order.iter().position(|&x| x == n).unwrap_or(usize::MAX);
        found.sort_by_key(|m| {
            let mut r: Vec<usize> = m
                .g_map
                .iter()
                .map(|&c| rank(self.graph.node(c).primary_anchor()))
                .collect();
            r.sort();
            (r, m.g_map.clone())
        });
        Ok(found)
    }
}

/// Applies `sep` at one match using its reference instance `cg`.
pub fn repair_at(client: &Client, sep: &Sep, cg: &ChangeGraph, m: &Match) -> Result<Repaired> {
    let instance = sep
        .instances
        .first()
        .ok_or_else(|| Error::Invariant(format!("pattern {} has no instances", sep.id)))?;
    if instance.change_id != cg.change_id {
        return Err(Error::Invariant(format!(
            "reference instance of {} is {}, got change graph {}",
            sep.id, instance.change_id, cg.change_id
        )));
    }
    let maps = map_new_to_client(cg, instance, m, &client.ast, &client.graph);
    apply_sep(&client.ast, &client.env, &client.graph, cg, instance, m, &maps)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchOutcome {
    pub g_map: Vec<usize>,
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Outcome of repairing every match of one pattern in one method.
#[derive(Debug, Clone)]
pub struct MethodRepair {
    pub text: String,
    pub outcomes: Vec<MatchOutcome>,
}

impl MethodRepair {
    pub fn applied(&self) -> usize {
        self.outcomes.iter().filter(|o| o.applied).count()
    }
}

/// Applies `sep` at all of its matches, one at a time in source order,
/// re-detecting after each application. Stops at the first failure.
pub fn repair_all(
    client: &Client,
    sep: &Sep,
    cg: &ChangeGraph,
    opts: &GraphOptions,
) -> Result<MethodRepair> {
    let budget = client.matches(sep)?.len();
    let mut current = client.clone();
    let mut outcomes = Vec::new();
    for _ in 0..budget {
        let Some(m) = current.matches(sep)?.into_iter().next() else {
            break;
        };
        match repair_at(&current, sep, cg, &m) {
            Ok(r) => {
                outcomes.push(MatchOutcome {
                    g_map: m.g_map,
                    applied: true,
                    error: None,
                });
                current = Client::from_ast(r.ast, &current.env.signatures, opts)?;
            }
            Err(e) => {
                outcomes.push(MatchOutcome {
                    g_map: m.g_map,
                    applied: false,
                    error: Some(e.kind().to_string()),
                });
                break;
            }
        }
    }
    Ok(MethodRepair {
        text: print_method(&current.ast)?,
        outcomes,
    })
}
