//! Choosing client-side names for transplanted variables and literals.

use std::collections::{BTreeMap, BTreeSet};

use super::mapping::NodeMappingSet;
use super::mts::Mts;
use crate::change_graph::ChangeGraph;
use crate::fgpdg::{Category, Fgpdg};
use crate::lang::{Ast, NodeId, NodeKind, TypeEnv};

fn is_variable(kind: NodeKind) -> bool {
    matches!(
        kind,
        NodeKind::Identifier | NodeKind::VarDeclFragment | NodeKind::Param
    )
}

/// `name` or `name_k` for the smallest `k >= 1` not in `taken`.
pub fn fresh_name(name: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(name) {
        return name.to_string();
    }
    (1..)
        .map(|k| format!("{name}_{k}"))
        .find(|c| !taken.contains(c))
        .expect("unbounded range")
}

/// Client text of the first old-instance data node named `text` that the
/// mapping carries into the client.
fn via_old_graph(
    old: &Fgpdg,
    old_ast: &Ast,
    client: &Fgpdg,
    maps: &NodeMappingSet,
    text: &str,
    literal: bool,
) -> Option<String> {
    old.nodes
        .iter()
        .filter(|n| {
            n.category == Category::Data
                && n.text == text
                && (old_ast.kind(n.primary_anchor()) == NodeKind::Literal) == literal
        })
        .find_map(|n| maps.g_old_cli.get(&n.id))
        .map(|&c| client.node(c).text.clone())
}

/// Renaming table for variables, keyed by the pattern name.
pub fn concretize_names(
    cg: &ChangeGraph,
    mts_set: &[Mts],
    maps: &NodeMappingSet,
    client_ast: &Ast,
    client: &Fgpdg,
    client_env: &TypeEnv,
) -> BTreeMap<String, String> {
    let new_ast = &cg.new_ast;
    let mut taken: BTreeSet<String> = client_env
        .vars
        .keys()
        .chain(client_env.unresolved.iter())
        .cloned()
        .collect();
    let mut names: BTreeSet<&str> = BTreeSet::new();
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    let mut nc_image: BTreeMap<&str, NodeId> = BTreeMap::new();
    for m in mts_set {
        for &x in &m.members {
            let kind = new_ast.kind(x);
            let label = new_ast.label(x);
            if !is_variable(kind) || cg.new_env.is_class_ref(label) {
                continue;
            }
            names.insert(label);
            match maps.a_new_cli.get(x) {
                Some(c) => {
                    nc_image.entry(label).or_insert(c);
                }
                None if kind != NodeKind::Identifier => {
                    declared.insert(label);
                }
                None => {}
            }
        }
    }
    let mut table = BTreeMap::new();
    for x in names {
        let chosen = if let Some(c) = via_old_graph(&cg.old, &cg.old_ast, client, maps, x, false) {
            c
        } else if declared.contains(x) {
            let f = fresh_name(x, &taken);
            taken.insert(f.clone());
            f
        } else if let Some(&c) = nc_image.get(x) {
            client_ast.label(c).to_string()
        } else {
            let f = fresh_name(x, &taken);
            taken.insert(f.clone());
            f
        };
        table.insert(x.to_string(), chosen);
    }
    table
}

/// Label an imported copy of new-AST node `x` gets in the client.
pub fn concrete_label(
    cg: &ChangeGraph,
    x: NodeId,
    table: &BTreeMap<String, String>,
    maps: &NodeMappingSet,
    client_ast: &Ast,
    client: &Fgpdg,
) -> String {
    let kind = cg.new_ast.kind(x);
    let label = cg.new_ast.label(x);
    if is_variable(kind) {
        return table.get(label).cloned().unwrap_or_else(|| label.to_string());
    }
    if kind == NodeKind::Literal {
        if let Some(c) = via_old_graph(&cg.old, &cg.old_ast, client, maps, label, true) {
            return c;
        }
        if let Some(c) = maps.a_new_cli.get(x) {
            return client_ast.label(c).to_string();
        }
    }
    label.to_string()
}
