//! Canonical codes for labeled digraphs.
//!
//! Colour refinement (node label, then multisets of labelled in/out
//! neighbours) splits nodes into cells. While a cell holds more than one
//! node, each of its members is individualized in turn and the
//! lexicographically smallest resulting edge list wins. Members whose swap
//! is an automorphism are tried only once.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::LGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub code: String,
    /// `order[i]` is the original node placed at canonical position `i`.
    pub order: Vec<usize>,
}

/// Best `(sorted coloured edges, node order)` found so far.
type Candidate = (Vec<(usize, usize, usize)>, Vec<usize>);
/// Own colour plus sorted `(outgoing, edge label, neighbour colour)`.
type ColorSig = (usize, Vec<(bool, usize, usize)>);

/// Canonical code of a connected fragment.
pub fn canonical_code(g: &LGraph) -> Result<String> {
    Ok(canonical_form(g)?.code)
}

pub fn canonical_form(g: &LGraph) -> Result<CanonicalForm> {
    if !g.is_connected() {
        return Err(Error::DisconnectedFragment);
    }
    Ok(canonical_form_unchecked(g))
}

/// Same as [`canonical_form`] but also accepts disconnected graphs.
pub fn canonical_form_unchecked(g: &LGraph) -> CanonicalForm {
    let n = g.labels.len();
    let ctx = Ctx::new(g);
    let mut label_rank: Vec<&str> = g.labels.iter().map(String::as_str).collect();
    label_rank.sort();
    label_rank.dedup();
    let colors: Vec<usize> = g
        .labels
        .iter()
        .map(|l| label_rank.binary_search(&l.as_str()).unwrap())
        .collect();
    let mut best: Option<Candidate> = None;
    ctx.explore(colors, &mut best);
    let (_, order) = best.unwrap_or((Vec::new(), Vec::new()));
    debug_assert_eq!(order.len(), n);
    let labels: Vec<&str> = order.iter().map(|&v| g.labels[v].as_str()).collect();
    let pos: Vec<usize> = {
        let mut p = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let mut edges: Vec<(usize, usize, &str)> = g
        .edges
        .iter()
        .map(|(s, d, l)| (pos[*s], pos[*d], l.as_str()))
        .collect();
    edges.sort();
    let code = serde_json::to_string(&(labels, edges)).expect("serializable");
    CanonicalForm { code, order }
}

struct Ctx<'a> {
    g: &'a LGraph,
    n: usize,
    edge_labels: Vec<&'a str>,
    /// (neighbour, outgoing?, edge label rank)
    adj: Vec<Vec<(usize, bool, usize)>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a LGraph) -> Self {
        let n = g.labels.len();
        let mut edge_labels: Vec<&str> = g.edges.iter().map(|(_, _, l)| l.as_str()).collect();
        edge_labels.sort();
        edge_labels.dedup();
        let mut adj = vec![Vec::new(); n];
        for (s, d, l) in &g.edges {
            let r = edge_labels.binary_search(&l.as_str()).unwrap();
            adj[*s].push((*d, true, r));
            adj[*d].push((*s, false, r));
        }
        Ctx {
            g,
            n,
            edge_labels,
            adj,
        }
    }

    /// Iterated colour refinement; colours are dense ranks.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        loop {
            let sigs: Vec<ColorSig> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<(bool, usize, usize)> = self.adj[v]
                        .iter()
                        .map(|&(w, out, l)| (out, l, colors[w]))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let mut distinct: Vec<&ColorSig> = sigs.iter().collect();
            distinct.sort();
            distinct.dedup();
            let new: Vec<usize> = sigs
                .iter()
                .map(|s| distinct.binary_search(&s).unwrap())
                .collect();
            let before = colors.iter().max().map_or(0, |m| m + 1);
            let after = distinct.len();
            colors = new;
            if after == before {
                return colors;
            }
        }
    }

    fn edges_under(&self, colors: &[usize]) -> Vec<(usize, usize, usize)> {
        let mut e: Vec<(usize, usize, usize)> = self
            .g
            .edges
            .iter()
            .map(|(s, d, l)| (colors[*s], colors[*d], self.edge_labels.binary_search(&l.as_str()).unwrap()))
            .collect();
        e.sort_unstable();
        e
    }

    fn explore(&self, colors: Vec<usize>, best: &mut Option<Candidate>) {
        let colors = self.refine(colors);
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            cells.entry(c).or_default().push(v);
        }
        let target = cells.iter().find(|(_, members)| members.len() > 1);
        let Some((&cell_color, members)) = target else {
            let edges = self.edges_under(&colors);
            let mut order = vec![0; self.n];
            for (v, &c) in colors.iter().enumerate() {
                order[c] = v;
            }
            if best.as_ref().is_none_or(|(b, _)| edges < *b) {
                *best = Some((edges, order));
            }
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in members {
            if tried.iter().any(|&u| self.swap_is_automorphism(u, v)) {
                continue;
            }
            tried.push(v);
            let split: Vec<usize> = colors
                .iter()
                .enumerate()
                .map(|(w, &c)| 2 * c + usize::from(c == cell_color && w != v))
                .collect();
            self.explore(split, best);
        }
    }

    fn swap_is_automorphism(&self, u: usize, v: usize) -> bool {
        if self.g.labels[u] != self.g.labels[v] {
            return false;
        }
        let sw = |x: usize| if x == u { v } else if x == v { u } else { x };
        self.g
            .edges
            .iter()
            .all(|(s, d, l)| self.g.has_edge(sw(*s), sw(*d), l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(labels: &[&str], edges: &[(usize, usize, &str)]) -> LGraph {
        LGraph {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            edges: edges.iter().map(|(s, d, l)| (*s, *d, l.to_string())).collect(),
        }
    }

    #[test]
    fn one_node_code_is_fixed() {
        assert_eq!(
            canonical_code(&g(&["Context#add"], &[])).unwrap(),
            r#"[["Context#add"],[]]"#
        );
    }

    #[test]
    fn permuted_ids_give_equal_codes() {
        let a = g(
            &["License", "License#getName", "Context#add", "Context"],
            &[(0, 1, "recv"), (1, 2, "para"), (3, 2, "recv")],
        );
        let b = g(
            &["Context", "Context#add", "License", "License#getName"],
            &[(2, 3, "recv"), (3, 1, "para"), (0, 1, "recv")],
        );
        assert_eq!(canonical_code(&a).unwrap(), canonical_code(&b).unwrap());
    }

    #[test]
    fn removing_an_edge_changes_the_code() {
        let a = g(&["A", "B", "C"], &[(0, 1, "x"), (1, 2, "y"), (0, 2, "z")]);
        let b = g(&["A", "B", "C"], &[(0, 1, "x"), (1, 2, "y")]);
        assert_ne!(canonical_code(&a).unwrap(), canonical_code(&b).unwrap());
    }

    #[test]
    fn symmetric_graphs_are_handled() {
        // directed 4-cycle with uniform labels, in two numberings
        let a = g(&["A"; 4], &[(0, 1, "e"), (1, 2, "e"), (2, 3, "e"), (3, 0, "e")]);
        let b = g(&["A"; 4], &[(2, 0, "e"), (0, 3, "e"), (3, 1, "e"), (1, 2, "e")]);
        assert_eq!(canonical_code(&a).unwrap(), canonical_code(&b).unwrap());
        let path = g(&["A"; 4], &[(0, 1, "e"), (1, 2, "e"), (2, 3, "e")]);
        assert_ne!(canonical_code(&a).unwrap(), canonical_code(&path).unwrap());
    }

    #[test]
    fn order_maps_canonical_positions_back() {
        let a = g(&["B", "A"], &[(0, 1, "e")]);
        let f = canonical_form(&a).unwrap();
        assert_eq!(f.order, vec![1, 0]);
    }

    #[test]
    fn disconnected_fragments_are_rejected() {
        assert_eq!(
            canonical_code(&g(&["A", "B"], &[])),
            Err(Error::DisconnectedFragment)
        );
    }
}
