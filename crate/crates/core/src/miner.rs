//! Frequent connected subgraph mining over change graphs.
//!
//! Patterns are node-induced: a pattern occurs where a set of nodes carries
//! exactly the pattern's labels and edges. Patterns grow one neighbouring
//! node at a time, driven by the embeddings of the parent pattern, and are
//! deduplicated by canonical code. Growth starts from the nodes that carry an
//! actual change; every valid pattern contains such a node and is connected,
//! so it is reachable from that seed.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_form_unchecked;
use crate::change_graph::{ChangeGraph, ChangeId, MiningGraph, NodeInfo, Side, MAP_EDGE};
use crate::fgpdg::{Category, EdgeLabel, Mode};
use crate::graph::LGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinerConfig {
    pub min_support: usize,
    pub max_nodes: usize,
    /// Report every valid frequent pattern, not only maximal ones.
    pub all_frequent: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_support: 3,
            max_nodes: 20,
            all_frequent: false,
        }
    }
}

/// `(graph index, image of each pattern node)`.
pub type Embedding = (usize, Vec<usize>);

#[derive(Debug, Clone)]
pub struct MinedPattern {
    /// Nodes in canonical order.
    pub graph: LGraph,
    pub code: String,
    pub embeddings: Vec<Embedding>,
    pub support: usize,
}

impl MinedPattern {
    /// Node descriptions, read off the first embedding.
    pub fn node_info(&self, graphs: &[MiningGraph]) -> Vec<NodeInfo> {
        let (gi, m) = &self.embeddings[0];
        m.iter().map(|&v| graphs[*gi].info[v].clone()).collect()
    }
}

#[derive(Clone)]
struct State {
    graph: LGraph,
    code: String,
    embeddings: Vec<Embedding>,
}

/// A one-node extension: the new node's label and its edges to existing
/// pattern nodes as `(pattern node, outgoing from the new node?, label)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Ext {
    node: String,
    links: Vec<(usize, bool, String)>,
}

fn support(embeddings: &[Embedding]) -> usize {
    embeddings.iter().map(|(g, _)| *g).collect::<BTreeSet<_>>().len()
}

/// Pattern validity: both sides present and an actual change included.
pub fn is_valid(graph: &LGraph, info: &[NodeInfo]) -> bool {
    let has_old = info.iter().any(|i| i.side == Side::Old);
    let has_new = info.iter().any(|i| i.side == Side::New);
    let has_change = info.iter().any(|i| i.changed)
        || graph
            .edges
            .iter()
            .any(|(s, d, l)| l == MAP_EDGE && info[*s].label != info[*d].label);
    has_old && has_new && has_change && graph.is_connected()
}

type Adjacency<'a> = Vec<Vec<Vec<(usize, bool, &'a str)>>>;

fn adjacency(graphs: &[MiningGraph]) -> Adjacency<'_> {
    graphs
        .iter()
        .map(|mg| {
            let mut adj = vec![Vec::new(); mg.graph.labels.len()];
            for (s, d, l) in &mg.graph.edges {
                adj[*s].push((*d, true, l.as_str()));
                adj[*d].push((*s, false, l.as_str()));
            }
            adj
        })
        .collect()
}

fn canonicalize(graph: LGraph, embeddings: Vec<Embedding>) -> State {
    let form = canonical_form_unchecked(&graph);
    let pos: Vec<usize> = {
        let mut p = vec![0; form.order.len()];
        for (i, &v) in form.order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let mut edges: Vec<(usize, usize, String)> = graph
        .edges
        .into_iter()
        .map(|(s, d, l)| (pos[s], pos[d], l))
        .collect();
    edges.sort();
    let labels = form.order.iter().map(|&v| graph.labels[v].clone()).collect();
    let mut embeddings: Vec<Embedding> = embeddings
        .into_iter()
        .map(|(g, m)| (g, form.order.iter().map(|&v| m[v]).collect()))
        .collect();
    embeddings.sort();
    embeddings.dedup();
    State {
        graph: LGraph { labels, edges },
        code: form.code,
        embeddings,
    }
}

/// Frequent one-node extensions of a pattern, canonicalized. The new node
/// brings every edge it has to the embedding's image, so patterns stay
/// induced subgraphs of their embeddings.
fn extensions(
    state: &State,
    graphs: &[MiningGraph],
    adj: &Adjacency<'_>,
    cfg: &MinerConfig,
) -> Vec<State> {
    if state.graph.labels.len() >= cfg.max_nodes {
        return Vec::new();
    }
    let mut groups: BTreeMap<Ext, Vec<Embedding>> = BTreeMap::new();
    for (gi, m) in &state.embeddings {
        let image: BTreeMap<usize, usize> = m.iter().enumerate().map(|(p, &t)| (t, p)).collect();
        let mut neighbours: BTreeSet<usize> = BTreeSet::new();
        for &t in m {
            for &(w, _, _) in &adj[*gi][t] {
                if !image.contains_key(&w) {
                    neighbours.insert(w);
                }
            }
        }
        for w in neighbours {
            let mut links: Vec<(usize, bool, String)> = adj[*gi][w]
                .iter()
                .filter_map(|&(t, outgoing, l)| image.get(&t).map(|&p| (p, outgoing, l.to_string())))
                .collect();
            links.sort();
            let mut m2 = m.clone();
            m2.push(w);
            groups
                .entry(Ext {
                    node: graphs[*gi].graph.labels[w].clone(),
                    links,
                })
                .or_default()
                .push((*gi, m2));
        }
    }
    groups
        .into_iter()
        .filter(|(_, embs)| support(embs) >= cfg.min_support)
        .map(|(ext, embs)| {
            let mut g = state.graph.clone();
            let v = g.add_node(ext.node);
            for (p, outgoing, l) in ext.links {
                if outgoing {
                    g.add_edge(v, p, l);
                } else {
                    g.add_edge(p, v, l);
                }
            }
            canonicalize(g, embs)
        })
        .collect()
}

/// Mines valid frequent patterns (maximal ones unless `all_frequent`),
/// sorted by canonical code.
pub fn mine_patterns(graphs: &[MiningGraph], cfg: &MinerConfig) -> Vec<MinedPattern> {
    let min_support = cfg.min_support.max(1);
    let cfg = MinerConfig {
        min_support,
        ..*cfg
    };
    if graphs.len() < min_support || cfg.max_nodes == 0 {
        return Vec::new();
    }
    let adj = adjacency(graphs);

    let mut seed_labels: BTreeSet<&str> = BTreeSet::new();
    for mg in graphs {
        for v in mg.change_nodes() {
            seed_labels.insert(&mg.graph.labels[v]);
        }
    }
    let mut visited: HashSet<String> = HashSet::new();
    let mut frontier: Vec<State> = Vec::new();
    for label in seed_labels {
        let embeddings: Vec<Embedding> = graphs
            .iter()
            .enumerate()
            .flat_map(|(gi, mg)| {
                mg.graph
                    .labels
                    .iter()
                    .enumerate()
                    .filter(move |(_, l)| l.as_str() == label)
                    .map(move |(v, _)| (gi, vec![v]))
            })
            .collect();
        if support(&embeddings) < min_support {
            continue;
        }
        let mut g = LGraph::new();
        g.add_node(label);
        let st = canonicalize(g, embeddings);
        if visited.insert(st.code.clone()) {
            frontier.push(st);
        }
    }

    let mut results = Vec::new();
    while !frontier.is_empty() {
        let expanded: Vec<Vec<State>> = frontier
            .par_iter()
            .map(|s| extensions(s, graphs, &adj, &cfg))
            .collect();
        let mut next = Vec::new();
        for (state, exts) in frontier.into_iter().zip(expanded) {
            let maximal = exts.is_empty();
            for ext in exts {
                if visited.insert(ext.code.clone()) {
                    next.push(ext);
                }
            }
            if !(cfg.all_frequent || maximal) {
                continue;
            }
            let (gi, m) = &state.embeddings[0];
            let info: Vec<NodeInfo> = m.iter().map(|&v| graphs[*gi].info[v].clone()).collect();
            if is_valid(&state.graph, &info) {
                results.push(MinedPattern {
                    support: support(&state.embeddings),
                    graph: state.graph,
                    code: state.code,
                    embeddings: state.embeddings,
                });
            }
        }
        next.sort_by(|a, b| a.code.cmp(&b.code));
        frontier = next;
    }
    results.sort_by(|a, b| a.code.cmp(&b.code));
    results
}

// ---- systematic edit patterns ------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    pub category: Category,
    pub label: String,
    /// No map edge touched the node in the mined change graphs.
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternEdge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternGraph {
    pub nodes: Vec<PatternNode>,
    pub edges: Vec<PatternEdge>,
}

/// Label used when matching pattern graphs against method graphs.
pub fn match_label(category: Category, label: &str) -> String {
    format!("{}|{}", category.as_str(), label)
}

impl PatternGraph {
    pub fn to_lgraph(&self) -> LGraph {
        LGraph {
            labels: self
                .nodes
                .iter()
                .map(|n| match_label(n.category, &n.label))
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.src, e.dst, e.label.as_str().to_string()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Where a pattern occurs in one change graph: images of the old-side and
/// new-side pattern nodes in the change graph's old and new fgPDGs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub change_id: ChangeId,
    pub old: Vec<usize>,
    pub new: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sep {
    pub id: String,
    pub mode: Mode,
    pub code: String,
    pub support: usize,
    pub old_graph: PatternGraph,
    pub new_graph: PatternGraph,
    /// `(old pattern node, new pattern node)`.
    pub map_edges: Vec<(usize, usize)>,
    /// Sorted chronologically; the first one is the reference instance.
    pub instances: Vec<Instance>,
}

impl Sep {
    /// Total node count of both sides.
    pub fn size(&self) -> usize {
        self.old_graph.len() + self.new_graph.len()
    }

    /// `(edge label, source label, target label)` triples of both sides,
    /// used to relate patterns mined from different corpora.
    pub fn edge_descriptors(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (tag, g) in [("O", &self.old_graph), ("N", &self.new_graph)] {
            for e in &g.edges {
                out.insert(format!(
                    "{tag}:{}:{}:{}",
                    e.label.as_str(),
                    match_label(g.nodes[e.src].category, &g.nodes[e.src].label),
                    match_label(g.nodes[e.dst].category, &g.nodes[e.dst].label)
                ));
            }
            for n in &g.nodes {
                out.insert(format!("{tag}:node:{}", match_label(n.category, &n.label)));
            }
        }
        for &(o, n) in &self.map_edges {
            out.insert(format!(
                "map:{}:{}",
                self.old_graph.nodes[o].label, self.new_graph.nodes[n].label
            ));
        }
        out
    }
}

/// Splits a mined pattern into its old and new sides.
pub fn pattern_to_sep(p: &MinedPattern, graphs: &[MiningGraph], mode: Mode, id: String) -> Sep {
    let info = p.node_info(graphs);
    let mut side_index = vec![0usize; info.len()];
    let mut old_graph = PatternGraph::default();
    let mut new_graph = PatternGraph::default();
    let mut old_nodes = Vec::new();
    let mut new_nodes = Vec::new();
    for (v, i) in info.iter().enumerate() {
        let node = PatternNode {
            category: i.category,
            label: i.label.clone(),
            changed: i.changed,
        };
        match i.side {
            Side::Old => {
                side_index[v] = old_graph.nodes.len();
                old_graph.nodes.push(node);
                old_nodes.push(v);
            }
            Side::New => {
                side_index[v] = new_graph.nodes.len();
                new_graph.nodes.push(node);
                new_nodes.push(v);
            }
        }
    }
    let mut map_edges = Vec::new();
    for (s, d, l) in &p.graph.edges {
        if l == MAP_EDGE {
            map_edges.push((side_index[*s], side_index[*d]));
            continue;
        }
        let label = EdgeLabel::ALL
            .into_iter()
            .find(|e| e.as_str() == l)
            .expect("mining edge labels come from fgPDG edges");
        let edge = PatternEdge {
            src: side_index[*s],
            dst: side_index[*d],
            label,
        };
        match info[*s].side {
            Side::Old => old_graph.edges.push(edge),
            Side::New => new_graph.edges.push(edge),
        }
    }
    old_graph.edges.sort();
    new_graph.edges.sort();
    map_edges.sort();
    let mut instances: Vec<Instance> = p
        .embeddings
        .iter()
        .map(|(gi, m)| {
            let mg = &graphs[*gi];
            Instance {
                change_id: mg.change_id.clone(),
                old: old_nodes.iter().map(|&v| m[v]).collect(),
                new: new_nodes.iter().map(|&v| m[v] - mg.n_old).collect(),
            }
        })
        .collect();
    instances.sort();
    Sep {
        id,
        mode,
        code: p.code.clone(),
        support: p.support,
        old_graph,
        new_graph,
        map_edges,
        instances,
    }
}

/// Mines systematic edit patterns from change graphs.
pub fn mine_seps(change_graphs: &[ChangeGraph], cfg: &MinerConfig) -> Vec<Sep> {
    let mode = change_graphs.first().map_or(Mode::Sirius, |c| c.old.mode);
    let graphs: Vec<MiningGraph> = change_graphs.iter().map(ChangeGraph::to_mining_graph).collect();
    mine_patterns(&graphs, cfg)
        .iter()
        .enumerate()
        .map(|(i, p)| pattern_to_sep(p, &graphs, mode, format!("sep-{:03}", i + 1)))
        .collect()
}
