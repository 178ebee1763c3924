//! New-pattern-AST to client-AST mapping through the dependence graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::change_graph::ChangeGraph;
use crate::detector::Match;
use crate::diff::AstMapping;
use crate::fgpdg::Fgpdg;
use crate::lang::{Ast, NodeId, NodeKind};
use crate::matching::{best_matching, dice};
use crate::miner::{match_label, Instance};

/// All mappings the transplant step needs.
#[derive(Debug, Clone)]
pub struct NodeMappingSet {
    /// Pattern-instance AST mapping, new side to old side.
    pub a_new_old: AstMapping,
    /// Old instance graph node to client graph node.
    pub g_old_cli: BTreeMap<usize, usize>,
    /// New instance AST node to client AST node.
    pub a_new_cli: AstMapping,
    /// New AST nodes whose client image was reached through `a_new_old`
    /// (as opposed to the map-edge fallback).
    pub via_ast: BTreeSet<NodeId>,
}

/// `(outgoing?, L(g), L(e), L(other end))`.
pub type PathTriple = (bool, String, &'static str, String);

fn label_of(g: &Fgpdg, n: usize) -> String {
    let node = g.node(n);
    match_label(node.category, &node.label)
}

/// Single-edge paths between `node` and nodes of `inside`.
pub fn path_set(g: &Fgpdg, node: usize, inside: &BTreeSet<usize>) -> BTreeSet<PathTriple> {
    let me = label_of(g, node);
    let mut out = BTreeSet::new();
    for e in g.out_edges(node) {
        if inside.contains(&e.dst) {
            out.insert((true, me.clone(), e.label.as_str(), label_of(g, e.dst)));
        }
    }
    for e in g.in_edges(node) {
        if inside.contains(&e.src) {
            out.insert((false, me.clone(), e.label.as_str(), label_of(g, e.src)));
        }
    }
    out
}

/// Candidate pairs `(old, client, score)`: every old node paired with all
/// client nodes reaching its best positive Dice score.
pub fn calc_path_based_gmap(
    old_w: &Fgpdg,
    outside_old: &[usize],
    client: &Fgpdg,
    outside_cli: &[usize],
    internal: &BTreeMap<usize, usize>,
) -> Vec<(usize, usize, f64)> {
    let sep_old: BTreeSet<usize> = internal.keys().copied().collect();
    let sep_cli: BTreeSet<usize> = internal.values().copied().collect();
    let cli_paths: Vec<BTreeSet<PathTriple>> = outside_cli
        .iter()
        .map(|&c| path_set(client, c, &sep_cli))
        .collect();
    let mut out = Vec::new();
    for &o in outside_old {
        let p = path_set(old_w, o, &sep_old);
        if p.is_empty() {
            continue;
        }
        let scores: Vec<f64> = cli_paths.iter().map(|q| dice(&p, q)).collect();
        let best = scores.iter().copied().fold(0.0, f64::max);
        if best <= 0.0 {
            continue;
        }
        for (k, &s) in scores.iter().enumerate() {
            if s == best {
                out.push((o, outside_cli[k], s));
            }
        }
    }
    out
}

/// SEP-internal mapping extended with one-to-one mappings of outside nodes.
pub fn detect_old_to_client_gmap(
    old_w: &Fgpdg,
    client: &Fgpdg,
    internal: &BTreeMap<usize, usize>,
) -> BTreeMap<usize, usize> {
    let used: BTreeSet<usize> = internal.values().copied().collect();
    let outside_old: Vec<usize> = (0..old_w.len()).filter(|n| !internal.contains_key(n)).collect();
    let outside_cli: Vec<usize> = (0..client.len()).filter(|n| !used.contains(n)).collect();
    let cands = calc_path_based_gmap(old_w, &outside_old, client, &outside_cli, internal);
    let mut result = internal.clone();
    if cands.is_empty() {
        return result;
    }
    let row: HashMap<usize, usize> = outside_old.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let col: HashMap<usize, usize> = outside_cli.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut scores = vec![vec![0.0; outside_cli.len()]; outside_old.len()];
    for (o, c, s) in cands {
        scores[row[&o]][col[&c]] = s;
    }
    for (i, j) in best_matching(&scores) {
        result.insert(outside_old[i], outside_cli[j]);
    }
    result
}

fn is_literal(g: &Fgpdg, ast: &Ast, n: usize) -> bool {
    ast.kind(g.node(n).primary_anchor()) == NodeKind::Literal
}

/// Labels agree closely enough for a new node to inherit the old node's
/// client image.
fn consistent(cg: &ChangeGraph, gn: usize, go: usize) -> bool {
    let (a, b) = (cg.new.node(gn), cg.old.node(go));
    if a.category != b.category || a.label != b.label {
        return false;
    }
    let (lit_a, lit_b) = (
        is_literal(&cg.new, &cg.new_ast, gn),
        is_literal(&cg.old, &cg.old_ast, go),
    );
    lit_a == lit_b && (!lit_a || a.text == b.text)
}

fn substitutable(a: NodeKind, b: NodeKind) -> bool {
    a == b
}

/// Most frequent element; ties go to the smallest.
pub fn mode_of(votes: &[NodeId]) -> Option<NodeId> {
    let mut count: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &v in votes {
        *count.entry(v).or_default() += 1;
    }
    let max = count.values().copied().max()?;
    count.into_iter().find(|&(_, c)| c == max).map(|(v, _)| v)
}

/// Picks the client anchor of graph node `c` standing for a new AST node
/// of kind `kind`.
fn choose_anchor(
    client_ast: &Ast,
    client: &Fgpdg,
    c: usize,
    kind: NodeKind,
    parent_image: Option<NodeId>,
    prefer_primary: bool,
) -> Option<NodeId> {
    let node = client.node(c);
    let cands: Vec<NodeId> = node
        .anchors
        .iter()
        .copied()
        .filter(|&a| substitutable(kind, client_ast.kind(a)))
        .collect();
    if let Some(p) = parent_image {
        if let Some(&a) = cands.iter().find(|&&a| client_ast.parent(a) == Some(p)) {
            return Some(a);
        }
    }
    if prefer_primary && cands.contains(&node.primary_anchor()) {
        return Some(node.primary_anchor());
    }
    cands.first().copied()
}

/// Maps the new instance AST of `cg` to the client AST.
pub fn map_new_to_client(
    cg: &ChangeGraph,
    instance: &Instance,
    m: &Match,
    client_ast: &Ast,
    client: &Fgpdg,
) -> NodeMappingSet {
    let internal: BTreeMap<usize, usize> = instance
        .old
        .iter()
        .copied()
        .zip(m.g_map.iter().copied())
        .collect();
    let g_old_cli = detect_old_to_client_gmap(&cg.old, client, &internal);
    let a_new_old = cg.ast_map.reversed();
    let new_ast = &cg.new_ast;
    let mut a_new_cli = AstMapping::new(new_ast.tree_id(), client_ast.tree_id());
    let mut via_ast = BTreeSet::new();

    // nodes with an old counterpart claim client anchors first
    let order = new_ast.preorder();
    let pass1 = order.iter().filter(|&&a| a_new_old.contains_source(a));
    let pass2 = order.iter().filter(|&&a| !a_new_old.contains_source(a));
    for &a in pass1.chain(pass2) {
        let kind = new_ast.kind(a);
        let parent_image = new_ast.parent(a).and_then(|p| a_new_cli.get(p));
        let gns = cg.new.nodes_at(a);
        let mut votes = Vec::new();
        let mut through_ast = false;
        // (old graph node, new graph node) pairs that may carry the mapping
        let mut olds: Vec<(usize, usize)> = Vec::new();
        if let Some(a_old) = a_new_old.get(a) {
            through_ast = true;
            for &go in cg.old.nodes_at(a_old) {
                for &gn in gns {
                    if consistent(cg, gn, go) {
                        olds.push((go, gn));
                    }
                }
            }
        } else {
            for &gn in gns {
                for &(go, n) in &cg.map_edges {
                    if n == gn && consistent(cg, gn, go) {
                        olds.push((go, gn));
                    }
                }
            }
        }
        for (go, gn) in olds {
            let Some(&c) = g_old_cli.get(&go) else { continue };
            let primary = cg.new.node(gn).primary_anchor() == a;
            if let Some(x) = choose_anchor(client_ast, client, c, kind, parent_image, primary) {
                votes.push(x);
            }
        }
        if let Some(x) = mode_of(&votes) {
            if a_new_cli.insert(a, x) && through_ast {
                via_ast.insert(a);
            }
        }
    }
    NodeMappingSet {
        a_new_old,
        g_old_cli,
        a_new_cli,
        via_ast,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgpdg::{build_closed, GraphOptions};
    use crate::lang::{build_type_env, parse_method, Signatures};

    fn graph(src: &str, sigs: &Signatures) -> (Ast, Fgpdg) {
        let ast = parse_method(src).unwrap();
        let env = build_type_env(&ast, sigs).unwrap();
        let g = build_closed(&ast, &env, &GraphOptions::default()).unwrap();
        (ast, g)
    }

    fn find(g: &Fgpdg, label: &str) -> usize {
        g.nodes.iter().find(|n| n.label == label).unwrap().id
    }

    fn sigs() -> Signatures {
        Signatures::from_json(r#"{"App#getLicense": "License", "App#readLicense": "License", "License#getName": "String"}"#)
            .unwrap()
    }

    #[test]
    fn mode_prefers_most_frequent_then_smallest() {
        assert_eq!(mode_of(&[7, 3, 7]), Some(7));
        assert_eq!(mode_of(&[7, 3]), Some(3));
        assert_eq!(mode_of(&[]), None);
    }

    #[test]
    fn receiver_path_set_matches_worked_example() {
        let (_, g) = graph(
            "void m(App app, Context ctx) { License license = app.getLicense(); ctx.add(license.getName()); }",
            &sigs(),
        );
        let lic = find(&g, "License");
        let get_name = find(&g, "License#getName");
        let inside: BTreeSet<usize> = [lic].into();
        let p = path_set(&g, get_name, &inside);
        assert_eq!(
            p,
            [(false, "action|License#getName".to_string(), "recv", "data|License".to_string())].into()
        );
    }

    #[test]
    fn no_outside_nodes_leaves_internal_mapping() {
        let (_, g) = graph("void m(App app) { app.getLicense(); }", &sigs());
        let internal: BTreeMap<usize, usize> = (0..g.len()).map(|i| (i, i)).collect();
        assert_eq!(detect_old_to_client_gmap(&g, &g, &internal), internal);
    }

    #[test]
    fn two_old_nodes_competing_for_one_client_node() {
        // old: two getName calls on the SEP's license; client: one
        let (_, old) = graph(
            "void m(App app) { License l = app.getLicense(); l.getName(); l.getName(); }",
            &sigs(),
        );
        let (_, cli) = graph("void m(App app) { License l = app.getLicense(); l.getName(); }", &sigs());
        let internal: BTreeMap<usize, usize> = [
            (find(&old, "App"), find(&cli, "App")),
            (find(&old, "App#getLicense"), find(&cli, "App#getLicense")),
            (find(&old, "License"), find(&cli, "License")),
        ]
        .into();
        let got = detect_old_to_client_gmap(&old, &cli, &internal);
        assert_eq!(got.len(), internal.len() + 1);
        let names: Vec<usize> = old.nodes.iter().filter(|n| n.label == "License#getName").map(|n| n.id).collect();
        // positional tie-break: the first call wins
        assert_eq!(got.get(&names[0]), Some(&find(&cli, "License#getName")));
        assert!(!got.contains_key(&names[1]));
    }
}
