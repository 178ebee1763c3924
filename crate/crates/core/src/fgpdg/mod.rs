//! Fine-grained program dependence graphs.
//!
//! Nodes are data (variables per def region, literals), actions
//! (invocations, field accesses, operators, value-copying assignments) and
//! controls (`if`). Every node keeps the AST nodes it was built from, so the
//! transformer can move between the two representations.

mod build;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lang::{Ast, NodeId};

pub use build::{abstract_label, build_fgpdg};

/// Default cap on the length of paths summarized by closure edges.
pub const DEFAULT_CLOSURE_DEPTH: usize = 4;

/// Label abstraction scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Variables by type, invocations by receiver type and name.
    Sirius,
    /// Variables anonymous, invocations by name only.
    Cpatminer,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sirius => "sirius",
            Mode::Cpatminer => "cpatminer",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sirius" => Ok(Mode::Sirius),
            "cpatminer" => Ok(Mode::Cpatminer),
            other => Err(format!("unknown mode `{other}` (expected sirius or cpatminer)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Data,
    Action,
    Control,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Data => "data",
            Category::Action => "action",
            Category::Control => "control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Def,
    Ref,
    Recv,
    Para,
    Cond,
    Ctrl,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 6] = [
        EdgeLabel::Def,
        EdgeLabel::Ref,
        EdgeLabel::Recv,
        EdgeLabel::Para,
        EdgeLabel::Cond,
        EdgeLabel::Ctrl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Def => "def",
            EdgeLabel::Ref => "ref",
            EdgeLabel::Recv => "recv",
            EdgeLabel::Para => "para",
            EdgeLabel::Cond => "cond",
            EdgeLabel::Ctrl => "ctrl",
        }
    }

    /// Labels that get transitive closure edges.
    pub fn is_closed(self) -> bool {
        matches!(self, EdgeLabel::Def | EdgeLabel::Ref | EdgeLabel::Ctrl)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GNode {
    pub id: usize,
    pub category: Category,
    /// Abstracted label, e.g. `License` or `Context#add`.
    pub label: String,
    /// Concrete text: variable name, literal text, member name or operator.
    pub text: String,
    /// AST nodes this node stands for; `anchors[0]` is the primary anchor
    /// (declaration, defining occurrence, or the expression itself).
    pub anchors: Vec<NodeId>,
}

impl GNode {
    pub fn primary_anchor(&self) -> NodeId {
        self.anchors[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GEdge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
    pub transitive: bool,
}

#[derive(Debug, Clone)]
pub struct Fgpdg {
    pub method_id: String,
    pub mode: Mode,
    pub tree_id: u64,
    pub ast_root: NodeId,
    pub nodes: Vec<GNode>,
    pub edges: Vec<GEdge>,
    anchor_index: BTreeMap<NodeId, Vec<usize>>,
}

impl Fgpdg {
    pub(crate) fn new(method_id: String, mode: Mode, ast: &Ast) -> Self {
        Fgpdg {
            method_id,
            mode,
            tree_id: ast.tree_id(),
            ast_root: ast.root(),
            nodes: Vec::new(),
            edges: Vec::new(),
            anchor_index: BTreeMap::new(),
        }
    }

    pub(crate) fn add_node(
        &mut self,
        category: Category,
        label: String,
        text: String,
        anchor: NodeId,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(GNode {
            id,
            category,
            label,
            text,
            anchors: vec![anchor],
        });
        self.anchor_index.entry(anchor).or_default().push(id);
        id
    }

    pub(crate) fn add_anchor(&mut self, node: usize, anchor: NodeId) {
        if !self.nodes[node].anchors.contains(&anchor) {
            self.nodes[node].anchors.push(anchor);
            self.anchor_index.entry(anchor).or_default().push(node);
        }
    }

    /// Adds an edge unless it would be a self-loop or a duplicate triple.
    /// Returns true when the edge set changed.
    pub fn add_edge(&mut self, src: usize, dst: usize, label: EdgeLabel, transitive: bool) -> bool {
        if src == dst || self.has_edge(src, dst, label) {
            return false;
        }
        self.edges.push(GEdge {
            src,
            dst,
            label,
            transitive,
        });
        true
    }

    pub fn has_edge(&self, src: usize, dst: usize, label: EdgeLabel) -> bool {
        self.edges
            .iter()
            .any(|e| e.src == src && e.dst == dst && e.label == label)
    }

    pub fn node(&self, id: usize) -> &GNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes anchored at `ast_node`, without the ownership check.
    pub fn nodes_at(&self, ast_node: NodeId) -> &[usize] {
        self.anchor_index
            .get(&ast_node)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All graph nodes anchored at `ast_node`, which must belong to the
    /// method this graph was built from.
    pub fn get_g_nodes(&self, ast: &Ast, ast_node: NodeId) -> Result<Vec<&GNode>> {
        if ast.tree_id() != self.tree_id || ast.get(ast_node).is_none() {
            return Err(Error::ForeignAstNode(ast_node));
        }
        Ok(self.nodes_at(ast_node).iter().map(|&i| &self.nodes[i]).collect())
    }

    /// Removes every closure edge.
    pub fn strip_transitive(&mut self) {
        self.edges.retain(|e| !e.transitive);
    }

    /// Adds transitive edges per closed label: whenever a path of 2..=depth
    /// direct edges of one label joins two nodes, a flagged edge with that
    /// label joins them too.
    pub fn close(&mut self, depth: usize) {
        let mut adj: HashMap<(usize, EdgeLabel), Vec<usize>> = HashMap::new();
        for e in self.edges.iter().filter(|e| !e.transitive && e.label.is_closed()) {
            adj.entry((e.src, e.label)).or_default().push(e.dst);
        }
        let mut keys: Vec<_> = adj.keys().copied().collect();
        keys.sort();
        for (src, label) in keys {
            let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
            let mut queue = VecDeque::from([(src, 0usize)]);
            while let Some((n, d)) = queue.pop_front() {
                if d == depth {
                    continue;
                }
                for &m in adj.get(&(n, label)).map(Vec::as_slice).unwrap_or(&[]) {
                    if m != src && !dist.contains_key(&m) {
                        dist.insert(m, d + 1);
                        queue.push_back((m, d + 1));
                    }
                }
            }
            for (t, d) in dist {
                if d >= 2 {
                    self.add_edge(src, t, label, true);
                }
            }
        }
    }

    pub fn out_edges(&self, n: usize) -> impl Iterator<Item = &GEdge> + '_ {
        self.edges.iter().filter(move |e| e.src == n)
    }

    pub fn in_edges(&self, n: usize) -> impl Iterator<Item = &GEdge> + '_ {
        self.edges.iter().filter(move |e| e.dst == n)
    }

    /// Node order used by the canonical serialization.
    pub fn canonical_order(&self, ast: &Ast) -> Vec<usize> {
        let pos: HashMap<NodeId, usize> = ast
            .preorder()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let key = |n: &GNode| -> Vec<usize> {
            n.anchors
                .iter()
                .map(|a| pos.get(a).copied().unwrap_or(usize::MAX))
                .collect()
        };
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (&self.nodes[a], &self.nodes[b]);
            (na.category, &na.label, key(na)).cmp(&(nb.category, &nb.label, key(nb)))
        });
        order
    }

    /// Canonical JSON: nodes sorted by (category, label, anchor positions),
    /// anchors given as preorder positions, edges sorted lexicographically.
    pub fn to_canonical_json(&self, ast: &Ast) -> Value {
        let pos: HashMap<NodeId, usize> = ast
            .preorder()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let order = self.canonical_order(ast);
        let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let nodes: Vec<Value> = order
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let node = &self.nodes[n];
                let anchors: Vec<usize> = node.anchors.iter().filter_map(|a| pos.get(a).copied()).collect();
                json!({
                    "id": i,
                    "category": node.category.as_str(),
                    "label": node.label,
                    "anchors": anchors,
                })
            })
            .collect();
        let edges: BTreeSet<(usize, usize, &str, bool)> = self
            .edges
            .iter()
            .map(|e| (rank[&e.src], rank[&e.dst], e.label.as_str(), e.transitive))
            .collect();
        let edges: Vec<Value> = edges
            .into_iter()
            .map(|(s, d, l, t)| json!({"src": s, "dst": d, "label": l, "transitive": t}))
            .collect();
        json!({
            "method": self.method_id,
            "mode": self.mode.to_string(),
            "nodes": nodes,
            "edges": edges,
        })
    }
}

/// Options shared by everything that builds graphs from source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    pub mode: Mode,
    pub closure_depth: usize,
    /// Fail on receivers whose type cannot be resolved.
    pub strict: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            mode: Mode::Sirius,
            closure_depth: DEFAULT_CLOSURE_DEPTH,
            strict: false,
        }
    }
}

impl GraphOptions {
    pub fn with_mode(mode: Mode) -> Self {
        GraphOptions {
            mode,
            ..Default::default()
        }
    }
}

/// Builds the graph and adds closure edges.
pub fn build_closed(ast: &Ast, env: &crate::lang::TypeEnv, opts: &GraphOptions) -> Result<Fgpdg> {
    let mut g = build_fgpdg(ast, env, opts.mode, opts.strict)?;
    g.close(opts.closure_depth);
    Ok(g)
}
