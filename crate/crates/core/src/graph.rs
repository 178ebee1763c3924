//! Directed graphs with string node and edge labels, and a backtracking
//! search for label-preserving monomorphisms (non-induced subgraph
//! embeddings).

use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LGraph {
    pub labels: Vec<String>,
    /// `(src, dst, label)`; no duplicates, no self-loops.
    pub edges: Vec<(usize, usize, String)>,
}

impl LGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, label: impl Into<String>) -> bool {
        let label = label.into();
        if src == dst || self.has_edge(src, dst, &label) {
            return false;
        }
        self.edges.push((src, dst, label));
        true
    }

    pub fn has_edge(&self, src: usize, dst: usize, label: &str) -> bool {
        self.edges
            .iter()
            .any(|(s, d, l)| *s == src && *d == dst && l == label)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.labels.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for (s, d, _) in &self.edges {
            adj[*s].push(*d);
            adj[*d].push(*s);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Subgraph induced by a node subset; returns it with the old ids of its
    /// nodes in order.
    pub fn induced(&self, nodes: &[usize]) -> LGraph {
        let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        LGraph {
            labels: nodes.iter().map(|&n| self.labels[n].clone()).collect(),
            edges: self
                .edges
                .iter()
                .filter_map(|(s, d, l)| Some((*index.get(s)?, *index.get(d)?, l.clone())))
                .collect(),
        }
    }
}

/// Adjacency view of a target graph for repeated searches.
pub struct Target<'a> {
    pub graph: &'a LGraph,
    by_label: HashMap<&'a str, Vec<usize>>,
    edge_set: HashSet<(usize, usize, &'a str)>,
}

impl<'a> Target<'a> {
    pub fn new(graph: &'a LGraph) -> Self {
        let mut by_label: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, l) in graph.labels.iter().enumerate() {
            by_label.entry(l.as_str()).or_default().push(i);
        }
        let edge_set = graph
            .edges
            .iter()
            .map(|(s, d, l)| (*s, *d, l.as_str()))
            .collect();
        Target {
            graph,
            by_label,
            edge_set,
        }
    }

    pub fn has_edge(&self, s: usize, d: usize, l: &str) -> bool {
        self.edge_set.contains(&(s, d, l))
    }
}

/// Every injective map `m` (as `m[pattern node] = target node`) that keeps
/// node labels and sends each pattern edge onto a target edge with the same
/// label. Results are sorted lexicographically.
pub fn find_embeddings(pattern: &LGraph, target: &LGraph) -> Vec<Vec<usize>> {
    let t = Target::new(target);
    let mut out = Vec::new();
    search(pattern, &t, None, &mut |m| {
        out.push(m.to_vec());
        true
    });
    out.sort();
    out
}

/// True if at least one embedding exists.
pub fn embeds(pattern: &LGraph, target: &LGraph) -> bool {
    let t = Target::new(target);
    let mut found = false;
    search(pattern, &t, None, &mut |_| {
        found = true;
        false
    });
    found
}

/// Backtracking core. `fixed` pins some pattern nodes in advance. The
/// callback returns false to stop the search.
pub fn search(
    pattern: &LGraph,
    t: &Target<'_>,
    fixed: Option<&[(usize, usize)]>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    let n = pattern.labels.len();
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut cands: Vec<&[usize]> = Vec::with_capacity(n);
    for l in &pattern.labels {
        match t.by_label.get(l.as_str()) {
            Some(v) => cands.push(v.as_slice()),
            None => return,
        }
    }
    if n > t.graph.labels.len() {
        return;
    }
    // pattern adjacency: for each node, edges to other nodes
    let mut p_adj: Vec<Vec<(usize, bool, &str)>> = vec![Vec::new(); n];
    for (s, d, l) in &pattern.edges {
        p_adj[*s].push((*d, true, l.as_str()));
        p_adj[*d].push((*s, false, l.as_str()));
    }
    let order = search_order(n, &cands, &p_adj, fixed);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; t.graph.labels.len()];
    if let Some(f) = fixed {
        for &(p, c) in f {
            if pattern.labels[p] != t.graph.labels[c] || used[c] {
                return;
            }
            map[p] = c;
            used[c] = true;
        }
        for &(p, _) in f {
            for &(q, out, l) in &p_adj[p] {
                if map[q] != usize::MAX {
                    let ok = if out {
                        t.has_edge(map[p], map[q], l)
                    } else {
                        t.has_edge(map[q], map[p], l)
                    };
                    if !ok {
                        return;
                    }
                }
            }
        }
    }
    let mut stop = false;
    extend(0, &order, &cands, &p_adj, t, &mut map, &mut used, visit, &mut stop);
}

fn search_order(
    n: usize,
    cands: &[&[usize]],
    p_adj: &[Vec<(usize, bool, &str)>],
    fixed: Option<&[(usize, usize)]>,
) -> Vec<usize> {
    let mut placed = vec![false; n];
    if let Some(f) = fixed {
        for &(p, _) in f {
            placed[p] = true;
        }
    }
    let mut order = Vec::new();
    while placed.iter().any(|p| !p) {
        // most constrained: most links to placed nodes, then fewest candidates
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by(|&a, &b| {
                let links = |v: usize| p_adj[v].iter().filter(|(q, _, _)| placed[*q]).count();
                links(a)
                    .cmp(&links(b))
                    .then(cands[b].len().cmp(&cands[a].len()))
                    .then(b.cmp(&a))
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn extend(
    depth: usize,
    order: &[usize],
    cands: &[&[usize]],
    p_adj: &[Vec<(usize, bool, &str)>],
    t: &Target<'_>,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
    stop: &mut bool,
) {
    if *stop {
        return;
    }
    if depth == order.len() {
        if !visit(map) {
            *stop = true;
        }
        return;
    }
    let v = order[depth];
    for &c in cands[v] {
        if used[c] {
            continue;
        }
        let consistent = p_adj[v].iter().all(|&(q, out, l)| {
            let mq = map[q];
            if mq == usize::MAX {
                return true;
            }
            if out {
                t.has_edge(c, mq, l)
            } else {
                t.has_edge(mq, c, l)
            }
        });
        if !consistent {
            continue;
        }
        map[v] = c;
        used[c] = true;
        extend(depth + 1, order, cands, p_adj, t, map, used, visit, stop);
        map[v] = usize::MAX;
        used[c] = false;
        if *stop {
            return;
        }
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
    fn single_node_pattern_finds_every_occurrence() {
        let p = g(&["Context#add"], &[]);
        let t = g(&["Context#add", "License", "Context#add"], &[(1, 0, "para")]);
        assert_eq!(find_embeddings(&p, &t), vec![vec![0], vec![2]]);
    }

    #[test]
    fn edge_labels_and_direction_matter() {
        let p = g(&["A", "B"], &[(0, 1, "recv")]);
        let t = g(&["A", "B", "B"], &[(0, 1, "para"), (2, 0, "recv"), (0, 2, "recv")]);
        assert_eq!(find_embeddings(&p, &t), vec![vec![0, 2]]);
    }

    #[test]
    fn non_induced_and_injective() {
        let p = g(&["A", "A"], &[(0, 1, "x")]);
        let t = g(&["A", "A"], &[(0, 1, "x"), (1, 0, "x")]);
        assert_eq!(find_embeddings(&p, &t), vec![vec![0, 1], vec![1, 0]]);
        let lone = g(&["A", "A", "A"], &[]);
        assert!(find_embeddings(&lone, &t).is_empty());
    }

    #[test]
    fn disconnected_patterns_are_supported() {
        let p = g(&["A", "B"], &[]);
        let t = g(&["B", "A", "A"], &[]);
        assert_eq!(find_embeddings(&p, &t), vec![vec![1, 0], vec![2, 0]]);
        assert!(embeds(&p, &t));
    }

    #[test]
    fn fixed_pairs_restrict_the_search() {
        let p = g(&["A", "B"], &[(0, 1, "e")]);
        let t = g(&["A", "B", "A"], &[(0, 1, "e"), (2, 1, "e")]);
        let tt = Target::new(&t);
        let mut found = Vec::new();
        search(&p, &tt, Some(&[(0, 2)]), &mut |m| {
            found.push(m.to_vec());
            true
        });
        assert_eq!(found, vec![vec![2, 1]]);
    }

    #[test]
    fn connectivity() {
        assert!(g(&["A", "B"], &[(1, 0, "e")]).is_connected());
        assert!(!g(&["A", "B"], &[]).is_connected());
        assert!(LGraph::new().is_connected());
    }
}
