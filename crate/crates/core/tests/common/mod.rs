//! Brute-force oracles and fixture helpers shared by the integration tests.
//! Nothing here calls the library's own search, canonicalization or
//! matching code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use sepforge::change_graph::{MiningGraph, Side, MAP_EDGE};
use sepforge::graph::LGraph;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

// ---- embeddings -------------------------------------------------------

/// Every injective, label- and edge-preserving map from `p` into `t`,
/// enumerated over all node tuples. Sorted.
pub fn brute_embeddings(p: &LGraph, t: &LGraph) -> Vec<Vec<usize>> {
    fn rec(p: &LGraph, t: &LGraph, m: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m.len() == p.labels.len() {
            let ok = p.edges.iter().all(|(s, d, l)| {
                t.edges
                    .iter()
                    .any(|(ts, td, tl)| *ts == m[*s] && *td == m[*d] && tl == l)
            });
            if ok {
                out.push(m.clone());
            }
            return;
        }
        for v in 0..t.labels.len() {
            if !m.contains(&v) && t.labels[v] == p.labels[m.len()] {
                m.push(v);
                rec(p, t, m, out);
                m.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(p, t, &mut Vec::new(), &mut out);
    out.sort();
    out
}

// ---- isomorphism classes ---------------------------------------------

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

type Form = (Vec<String>, Vec<(usize, usize, String)>);

/// Canonical key: lexicographic minimum of (labels, sorted edges) over all
/// node orders.
pub fn brute_key(g: &LGraph) -> String {
    let n = g.labels.len();
    let mut best: Option<Form> = None;
    for order in permutations(n) {
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let labels: Vec<String> = order.iter().map(|&v| g.labels[v].clone()).collect();
        let mut edges: Vec<_> = g
            .edges
            .iter()
            .map(|(s, d, l)| (pos[*s], pos[*d], l.clone()))
            .collect();
        edges.sort();
        let cand = (labels, edges);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    format!("{:?}", best.expect("at least one order"))
}

pub fn induced(g: &LGraph, nodes: &[usize]) -> LGraph {
    let idx: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    LGraph {
        labels: nodes.iter().map(|&v| g.labels[v].clone()).collect(),
        edges: g
            .edges
            .iter()
            .filter_map(|(s, d, l)| Some((*idx.get(s)?, *idx.get(d)?, l.clone())))
            .collect(),
    }
}

pub fn connected(g: &LGraph) -> bool {
    let n = g.labels.len();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for (s, d, _) in &g.edges {
            for (a, b) in [(*s, *d), (*d, *s)] {
                if a == v && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    seen.into_iter().all(|x| x)
}

// ---- miner ------------------------------------------------------------

struct Class {
    graphs: BTreeSet<usize>,
    rep: (usize, Vec<usize>),
    size: usize,
}

/// Valid frequent connected induced patterns by exhaustive subset
/// enumeration: key -> support. Only maximal ones unless `all_frequent`.
pub fn brute_mine(
    graphs: &[MiningGraph],
    min_support: usize,
    all_frequent: bool,
) -> BTreeMap<String, usize> {
    let mut seeds: BTreeSet<&str> = BTreeSet::new();
    for g in graphs {
        for (v, info) in g.info.iter().enumerate() {
            if info.changed {
                seeds.insert(&g.graph.labels[v]);
            }
        }
        for (s, d, l) in &g.graph.edges {
            if l == MAP_EDGE && g.info[*s].label != g.info[*d].label {
                seeds.insert(&g.graph.labels[*s]);
                seeds.insert(&g.graph.labels[*d]);
            }
        }
    }

    let mut classes: BTreeMap<String, Class> = BTreeMap::new();
    for (gi, g) in graphs.iter().enumerate() {
        let n = g.graph.labels.len();
        for mask in 1u32..(1 << n) {
            let nodes: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
            let sub = induced(&g.graph, &nodes);
            if !connected(&sub) {
                continue;
            }
            let c = classes.entry(brute_key(&sub)).or_insert_with(|| Class {
                graphs: BTreeSet::new(),
                rep: (gi, nodes.clone()),
                size: nodes.len(),
            });
            c.graphs.insert(gi);
        }
    }

    let frequent: BTreeSet<&String> = classes
        .iter()
        .filter(|(_, c)| {
            let (gi, nodes) = &c.rep;
            c.graphs.len() >= min_support
                && nodes.iter().any(|&v| seeds.contains(graphs[*gi].graph.labels[v].as_str()))
        })
        .map(|(k, _)| k)
        .collect();

    let mut out = BTreeMap::new();
    for key in &frequent {
        let c = &classes[*key];
        let (gi, nodes) = &c.rep;
        let g = &graphs[*gi];
        let infos: Vec<_> = nodes.iter().map(|&v| &g.info[v]).collect();
        let in_set: BTreeSet<usize> = nodes.iter().copied().collect();
        let has_change = infos.iter().any(|i| i.changed)
            || g.graph.edges.iter().any(|(s, d, l)| {
                l == MAP_EDGE && in_set.contains(s) && in_set.contains(d) && g.info[*s].label != g.info[*d].label
            });
        let valid = infos.iter().any(|i| i.side == Side::Old) && infos.iter().any(|i| i.side == Side::New) && has_change;
        if !valid {
            continue;
        }
        let maximal = !frequent.iter().any(|k2| {
            let c2 = &classes[*k2];
            if c2.size != c.size + 1 {
                return false;
            }
            let (g2, n2) = &c2.rep;
            (0..n2.len()).any(|drop| {
                let rest: Vec<usize> = n2.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, &v)| v).collect();
                brute_key(&induced(&graphs[*g2].graph, &rest)) == **key
            })
        });
        if all_frequent || maximal {
            out.insert((*key).clone(), c.graphs.len());
        }
    }
    out
}

// ---- bipartite matching ------------------------------------------------

/// Best matching over integer weights (0 = not allowed) by exhaustive
/// search: max cardinality, then max total weight, then lexicographically
/// smallest partner vector with "unmatched" last.
pub fn brute_matching(w: &[Vec<u32>]) -> Vec<(usize, usize)> {
    type Key = (usize, u64, Vec<usize>);
    fn rec(w: &[Vec<u32>], i: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut Option<Key>) {
        if i == w.len() {
            let card = cur.iter().filter(|&&j| j != usize::MAX).count();
            let score: u64 = cur
                .iter()
                .enumerate()
                .filter(|(_, &j)| j != usize::MAX)
                .map(|(r, &j)| w[r][j] as u64)
                .sum();
            let better = match best {
                None => true,
                Some((bc, bs, bv)) => (card, score) > (*bc, *bs) || ((card, score) == (*bc, *bs) && *cur < *bv),
            };
            if better {
                *best = Some((card, score, cur.clone()));
            }
            return;
        }
        for j in 0..w[i].len() {
            if w[i][j] > 0 && !used[j] {
                used[j] = true;
                cur.push(j);
                rec(w, i + 1, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
        cur.push(usize::MAX);
        rec(w, i + 1, used, cur, best);
        cur.pop();
    }
    let n_right = w.iter().map(Vec::len).max().unwrap_or(0);
    let mut best = None;
    rec(w, 0, &mut vec![false; n_right], &mut Vec::new(), &mut best);
    best.map(|(_, _, v)| {
        v.into_iter()
            .enumerate()
            .filter(|(_, j)| *j != usize::MAX)
            .collect()
    })
    .unwrap_or_default()
}
