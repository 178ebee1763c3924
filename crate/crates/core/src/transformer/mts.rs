//! Minimal transplantable subtrees.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::lang::{Ast, NodeId, NodeKind};

/// Smallest induced subtree of the new instance AST that contains an
/// anchor, is rooted at a mapped node, a statement or a parameter, and
/// stops at mapped nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mts {
    pub root: NodeId,
    pub members: BTreeSet<NodeId>,
    pub leaves: BTreeSet<NodeId>,
    /// New-graph node the subtree was computed for.
    pub source: usize,
}

impl Mts {
    pub fn contains(&self, other: &Mts) -> bool {
        other.members.is_subset(&self.members)
    }
}

/// Root rule: the walk from an anchor stops here.
pub fn is_root_stop(ast: &Ast, n: NodeId, nc: &dyn Fn(NodeId) -> bool) -> bool {
    nc(n) || ast.kind(n).is_statement() || ast.kind(n) == NodeKind::Param || ast.parent(n).is_none()
}

pub fn compute_mts(ast: &Ast, anchor: NodeId, source: usize, nc: &dyn Fn(NodeId) -> bool) -> Mts {
    if nc(anchor) {
        return Mts {
            root: anchor,
            members: [anchor].into(),
            leaves: [anchor].into(),
            source,
        };
    }
    let mut root = anchor;
    while !is_root_stop(ast, root, nc) {
        root = ast.parent(root).expect("non-root nodes have parents");
    }
    let mut members = BTreeSet::new();
    let mut leaves = BTreeSet::new();
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        members.insert(x);
        if x != root && nc(x) {
            leaves.insert(x);
            continue;
        }
        if ast.children(x).is_empty() {
            leaves.insert(x);
        }
        queue.extend(ast.children(x).iter().copied());
    }
    Mts {
        root,
        members,
        leaves,
        source,
    }
}

/// Drops duplicates and subtrees strictly contained in another one; the
/// rest is returned in document order of the roots.
pub fn reduce_mts(ast: &Ast, set: Vec<Mts>) -> Vec<Mts> {
    let mut unique: Vec<Mts> = Vec::new();
    for m in set {
        if !unique.iter().any(|u| u.members == m.members) {
            unique.push(m);
        }
    }
    let kept: Vec<Mts> = unique
        .iter()
        .filter(|m| {
            !unique
                .iter()
                .any(|o| o.members.len() > m.members.len() && o.contains(m))
        })
        .cloned()
        .collect();
    let order = ast.preorder();
    let rank = |n: NodeId| order.iter().position(|&x| x == n).unwrap_or(usize::MAX);
    let mut kept = kept;
    kept.sort_by_key(|m| rank(m.root));
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_method;

    fn find(ast: &Ast, kind: NodeKind, label: &str) -> NodeId {
        ast.preorder()
            .into_iter()
            .find(|&n| ast.kind(n) == kind && ast.label(n) == label)
            .unwrap()
    }

    #[test]
    fn walk_stops_at_statement_and_cuts_at_mapped_nodes() {
        let ast = parse_method("void m(Context ctx, V v) { if (v != null) { ctx.add(v); } }").unwrap();
        let add = find(&ast, NodeKind::MethodInvocation, "add");
        let neq = find(&ast, NodeKind::BinaryOp, "!=");
        let iff = find(&ast, NodeKind::IfStmt, "if");
        let nc = |n: NodeId| n == add;
        let m = compute_mts(&ast, neq, 0, &nc);
        assert_eq!(m.root, iff);
        assert!(m.leaves.contains(&add));
        assert!(!m.members.iter().any(|&x| ast.parent(x) == Some(add)));
        let single = compute_mts(&ast, add, 1, &nc);
        assert_eq!(single.members, [add].into());
        let reduced = reduce_mts(&ast, vec![single, m.clone(), m.clone()]);
        assert_eq!(reduced, vec![m]);
    }
}
