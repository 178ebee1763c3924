//! Change graphs: the old and new fgPDGs of one method change, joined by
//! map edges derived from the AST mapping.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diff::{map_asts, AstMapping};
use crate::error::Result;
use crate::fgpdg::{build_closed, Category, Fgpdg, GraphOptions};
use crate::graph::LGraph;
use crate::lang::{build_type_env, parse_method, Ast, NodeKind, Signatures, TypeEnv};

/// Identifies one change: a method at a commit time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChangeId {
    /// Chronological order first, so sorting ids sorts by time.
    pub time: u64,
    pub method_id: String,
}

impl ChangeId {
    pub fn new(method_id: impl Into<String>, time: u64) -> Self {
        ChangeId {
            time,
            method_id: method_id.into(),
        }
    }
}

impl fmt::Display for ChangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.method_id, self.time)
    }
}

#[derive(Debug, Clone)]
pub struct ChangeGraph {
    pub change_id: ChangeId,
    pub old_ast: Ast,
    pub new_ast: Ast,
    pub old_env: TypeEnv,
    pub new_env: TypeEnv,
    pub old: Fgpdg,
    pub new: Fgpdg,
    /// One-to-one `(old node, new node)` pairs, sorted.
    pub map_edges: Vec<(usize, usize)>,
    pub ast_map: AstMapping,
}

fn is_literal(g: &Fgpdg, ast: &Ast, n: usize) -> bool {
    let node = g.node(n);
    node.category == Category::Data && ast.kind(node.primary_anchor()) == NodeKind::Literal
}

/// Builds both graphs (with closure edges) and the map edges.
pub fn build_change_graph(
    change_id: ChangeId,
    old_ast: Ast,
    new_ast: Ast,
    old_env: TypeEnv,
    new_env: TypeEnv,
    ast_map: AstMapping,
    opts: &GraphOptions,
) -> Result<ChangeGraph> {
    let old = build_closed(&old_ast, &old_env, opts)?;
    let new = build_closed(&new_ast, &new_env, opts)?;

    // candidate pairs with (primary-anchor pair?, number of supporting anchor pairs)
    let mut cands: BTreeMap<(usize, usize), (bool, usize)> = BTreeMap::new();
    for (a, b) in ast_map.pairs() {
        for &go in old.nodes_at(a) {
            for &gn in new.nodes_at(b) {
                let (no, nn) = (old.node(go), new.node(gn));
                if no.category != nn.category {
                    continue;
                }
                if no.category == Category::Data {
                    if no.label != nn.label {
                        continue;
                    }
                    let lit_o = is_literal(&old, &old_ast, go);
                    let lit_n = is_literal(&new, &new_ast, gn);
                    if lit_o != lit_n || (lit_o && no.text != nn.text) {
                        continue;
                    }
                }
                let e = cands.entry((go, gn)).or_insert((false, 0));
                e.0 |= no.primary_anchor() == a && nn.primary_anchor() == b;
                e.1 += 1;
            }
        }
    }
    let mut ranked: Vec<((usize, usize), (bool, usize))> = cands.into_iter().collect();
    ranked.sort_by_key(|&((o, n), (primary, support))| (Reverse(primary), Reverse(support), o, n));
    let mut used_o = HashSet::new();
    let mut used_n = HashSet::new();
    let mut map_edges = Vec::new();
    for ((o, n), _) in ranked {
        if used_o.insert(o) {
            if used_n.insert(n) {
                map_edges.push((o, n));
            } else {
                used_o.remove(&o);
            }
        }
    }
    map_edges.sort();
    Ok(ChangeGraph {
        change_id,
        old_ast,
        new_ast,
        old_env,
        new_env,
        old,
        new,
        map_edges,
        ast_map,
    })
}

/// Parses both versions, diffs them and builds the change graph.
pub fn change_graph_from_sources(
    change_id: ChangeId,
    old_src: &str,
    new_src: &str,
    signatures: &Signatures,
    opts: &GraphOptions,
) -> Result<ChangeGraph> {
    let old_ast = parse_method(old_src)?;
    let new_ast = parse_method(new_src)?;
    let old_env = build_type_env(&old_ast, signatures)?;
    let new_env = build_type_env(&new_ast, signatures)?;
    let ast_map = map_asts(&old_ast, &new_ast);
    build_change_graph(change_id, old_ast, new_ast, old_env, new_env, ast_map, opts)
}

/// Side of a change-graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Old,
    New,
}

/// Node description used for mining.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeInfo {
    pub side: Side,
    pub category: Category,
    pub label: String,
    /// No map edge touches the node.
    pub changed: bool,
}

impl NodeInfo {
    /// Label used for mining; the free-text label comes last so the
    /// encoding is unambiguous.
    pub fn mining_label(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            match self.side {
                Side::Old => "O",
                Side::New => "N",
            },
            self.category.as_str(),
            if self.changed { "+" } else { "=" },
            self.label
        )
    }
}

pub const MAP_EDGE: &str = "map";

/// A change graph flattened for the miner: old nodes first, then new ones.
#[derive(Debug, Clone)]
pub struct MiningGraph {
    pub change_id: ChangeId,
    pub graph: LGraph,
    pub info: Vec<NodeInfo>,
    pub n_old: usize,
}

impl MiningGraph {
    /// Nodes that can seed a valid pattern: changed nodes and endpoints of
    /// map edges whose labels differ.
    pub fn change_nodes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.info.len()).filter(|&v| self.info[v].changed).collect();
        for (s, d, l) in &self.graph.edges {
            if l == MAP_EDGE && self.info[*s].label != self.info[*d].label {
                out.push(*s);
                out.push(*d);
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl ChangeGraph {
    pub fn old_changed(&self, n: usize) -> bool {
        !self.map_edges.iter().any(|&(o, _)| o == n)
    }

    pub fn new_changed(&self, n: usize) -> bool {
        !self.map_edges.iter().any(|&(_, m)| m == n)
    }

    pub fn to_mining_graph(&self) -> MiningGraph {
        let mut graph = LGraph::new();
        let mut info = Vec::new();
        for (side, g) in [(Side::Old, &self.old), (Side::New, &self.new)] {
            for n in &g.nodes {
                let changed = match side {
                    Side::Old => self.old_changed(n.id),
                    Side::New => self.new_changed(n.id),
                };
                let ni = NodeInfo {
                    side,
                    category: n.category,
                    label: n.label.clone(),
                    changed,
                };
                graph.add_node(ni.mining_label());
                info.push(ni);
            }
        }
        let n_old = self.old.len();
        for e in &self.old.edges {
            graph.add_edge(e.src, e.dst, e.label.as_str());
        }
        for e in &self.new.edges {
            graph.add_edge(n_old + e.src, n_old + e.dst, e.label.as_str());
        }
        for &(o, n) in &self.map_edges {
            graph.add_edge(o, n_old + n, MAP_EDGE);
        }
        MiningGraph {
            change_id: self.change_id.clone(),
            graph,
            info,
            n_old,
        }
    }

    pub fn to_json(&self) -> Value {
        let old_order = self.old.canonical_order(&self.old_ast);
        let new_order = self.new.canonical_order(&self.new_ast);
        let rank = |order: &[usize], n: usize| order.iter().position(|&x| x == n).unwrap();
        let map: Vec<Value> = self
            .map_edges
            .iter()
            .map(|&(o, n)| json!([rank(&old_order, o), rank(&new_order, n)]))
            .collect();
        json!({
            "change_id": {"method_id": self.change_id.method_id, "time": self.change_id.time},
            "old": self.old.to_canonical_json(&self.old_ast),
            "new": self.new.to_canonical_json(&self.new_ast),
            "map": map,
        })
    }
}
