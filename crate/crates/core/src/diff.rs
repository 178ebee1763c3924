//! GumTree-style mapping between two versions of a method's syntax tree.
//!
//! Three steps:
//! 1. greedy top-down matching of isomorphic subtrees of height >= 2,
//!    largest first;
//! 2. bottom-up container matching scored with the Dice coefficient over
//!    already-mapped descendants (threshold 0.5), restricted to containers
//!    whose parents have the same kind;
//! 3. recovery inside every mapped container pair: unmatched children are
//!    paired by kind and label, then by kind and position.
//!
//! Mappings that contradict a mapped ancestor are dropped afterwards, and the
//! matcher is run in both directions so that the result size does not depend
//! on argument order.

use std::collections::{BTreeMap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::lang::{Ast, NodeId};

const MIN_DICE: f64 = 0.5;
const MIN_TOP_DOWN_HEIGHT: usize = 2;

/// One-to-one, kind-preserving node mapping from a source tree to a
/// destination tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AstMapping {
    pub source_tree: u64,
    pub dest_tree: u64,
    forward: BTreeMap<NodeId, NodeId>,
    backward: BTreeMap<NodeId, NodeId>,
}

impl AstMapping {
    pub fn new(source_tree: u64, dest_tree: u64) -> Self {
        AstMapping {
            source_tree,
            dest_tree,
            ..Default::default()
        }
    }

    /// Adds a pair; returns false if either side is already mapped.
    pub fn insert(&mut self, src: NodeId, dst: NodeId) -> bool {
        if self.forward.contains_key(&src) || self.backward.contains_key(&dst) {
            return false;
        }
        self.forward.insert(src, dst);
        self.backward.insert(dst, src);
        true
    }

    pub fn remove_source(&mut self, src: NodeId) {
        if let Some(dst) = self.forward.remove(&src) {
            self.backward.remove(&dst);
        }
    }

    pub fn get(&self, src: NodeId) -> Option<NodeId> {
        self.forward.get(&src).copied()
    }

    pub fn get_reverse(&self, dst: NodeId) -> Option<NodeId> {
        self.backward.get(&dst).copied()
    }

    pub fn contains_source(&self, src: NodeId) -> bool {
        self.forward.contains_key(&src)
    }

    pub fn contains_dest(&self, dst: NodeId) -> bool {
        self.backward.contains_key(&dst)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Pairs ordered by source node id.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.forward.iter().map(|(&a, &b)| (a, b))
    }

    pub fn reversed(&self) -> AstMapping {
        AstMapping {
            source_tree: self.dest_tree,
            dest_tree: self.source_tree,
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }
}

/// Computes the mapping from `old` to `new`.
pub fn map_asts(old: &Ast, new: &Ast) -> AstMapping {
    let forward = match_directed(old, new);
    let backward = match_directed(new, old).reversed();
    if backward.len() > forward.len() {
        backward
    } else {
        forward
    }
}

struct TreeInfo {
    order: Vec<NodeId>,
    pos: HashMap<NodeId, usize>,
    height: HashMap<NodeId, usize>,
    hash: HashMap<NodeId, u64>,
    desc_count: HashMap<NodeId, usize>,
}

impl TreeInfo {
    fn new(ast: &Ast) -> Self {
        let order = ast.preorder();
        let pos = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut height: HashMap<NodeId, usize> = HashMap::new();
        let mut hash: HashMap<NodeId, u64> = HashMap::new();
        let mut desc_count: HashMap<NodeId, usize> = HashMap::new();
        for n in ast.postorder() {
            let node = ast.node(n);
            let mut h = DefaultHasher::new();
            node.kind.hash(&mut h);
            node.label.hash(&mut h);
            node.literal.hash(&mut h);
            node.has_receiver.hash(&mut h);
            let mut ht = 0;
            let mut dc = 0;
            for c in &node.children {
                hash[c].hash(&mut h);
                ht = ht.max(height[c]);
                dc += 1 + desc_count[c];
            }
            height.insert(n, ht + 1);
            hash.insert(n, h.finish());
            desc_count.insert(n, dc);
        }
        TreeInfo {
            order,
            pos,
            height,
            hash,
            desc_count,
        }
    }
}

fn isomorphic(a: &Ast, x: NodeId, b: &Ast, y: NodeId) -> bool {
    let (nx, ny) = (a.node(x), b.node(y));
    nx.kind == ny.kind
        && nx.label == ny.label
        && nx.literal == ny.literal
        && nx.has_receiver == ny.has_receiver
        && nx.children.len() == ny.children.len()
        && nx
            .children
            .iter()
            .zip(&ny.children)
            .all(|(&cx, &cy)| isomorphic(a, cx, b, cy))
}

fn relative_pos(info: &TreeInfo, n: NodeId) -> f64 {
    info.pos[&n] as f64 / info.order.len().max(1) as f64
}

fn match_directed(a: &Ast, b: &Ast) -> AstMapping {
    let ia = TreeInfo::new(a);
    let ib = TreeInfo::new(b);
    let mut m = AstMapping::new(a.tree_id(), b.tree_id());

    top_down(a, b, &ia, &ib, &mut m);
    bottom_up(a, b, &ia, &ib, &mut m);
    if a.kind(a.root()) == b.kind(b.root()) {
        m.insert(a.root(), b.root());
    }
    if m.get(a.root()) == Some(b.root()) {
        recover(a, b, a.root(), b.root(), &mut m);
    }
    enforce_ancestry(a, b, &ia, &mut m);
    m
}

fn top_down(a: &Ast, b: &Ast, ia: &TreeInfo, ib: &TreeInfo, m: &mut AstMapping) {
    let max_h = ia.height[&a.root()].min(ib.height[&b.root()]);
    for h in (MIN_TOP_DOWN_HEIGHT..=max_h).rev() {
        let xs: Vec<NodeId> = ia
            .order
            .iter()
            .copied()
            .filter(|n| ia.height[n] == h && !m.contains_source(*n))
            .collect();
        for x in xs {
            if m.contains_source(x) {
                continue;
            }
            let best = ib
                .order
                .iter()
                .copied()
                .filter(|y| {
                    ib.height[y] == h
                        && !m.contains_dest(*y)
                        && ib.hash[y] == ia.hash[&x]
                        && isomorphic(a, x, b, *y)
                })
                .min_by(|&y1, &y2| {
                    let parent_bonus = |y: NodeId| -> u8 {
                        let same = match (a.parent(x), b.parent(y)) {
                            (Some(px), Some(py)) => {
                                a.kind(px) == b.kind(py) && a.label(px) == b.label(py)
                            }
                            (None, None) => true,
                            _ => false,
                        };
                        u8::from(!same)
                    };
                    let d = |y: NodeId| (relative_pos(ia, x) - relative_pos(ib, y)).abs();
                    parent_bonus(y1)
                        .cmp(&parent_bonus(y2))
                        .then(d(y1).total_cmp(&d(y2)))
                });
            if let Some(y) = best {
                map_subtree(a, b, x, y, m);
            }
        }
    }
}

fn map_subtree(a: &Ast, b: &Ast, x: NodeId, y: NodeId, m: &mut AstMapping) {
    m.insert(x, y);
    for (&cx, &cy) in a.children(x).iter().zip(b.children(y)) {
        map_subtree(a, b, cx, cy, m);
    }
}

fn dice(a: &Ast, b: &Ast, ia: &TreeInfo, ib: &TreeInfo, x: NodeId, y: NodeId, m: &AstMapping) -> f64 {
    let total = ia.desc_count[&x] + ib.desc_count[&y];
    if total == 0 {
        return 0.0;
    }
    let common = a
        .descendants(x)
        .into_iter()
        .filter_map(|d| m.get(d))
        .filter(|&d2| b.is_ancestor(y, d2))
        .count();
    2.0 * common as f64 / total as f64
}

fn bottom_up(a: &Ast, b: &Ast, ia: &TreeInfo, ib: &TreeInfo, m: &mut AstMapping) {
    for x in a.postorder() {
        if m.contains_source(x) || a.children(x).is_empty() || x == a.root() {
            continue;
        }
        // candidates: unmapped same-kind ancestors of images of mapped descendants
        let mut candidates: Vec<NodeId> = Vec::new();
        for d in a.descendants(x) {
            if let Some(img) = m.get(d) {
                for anc in b.ancestors(img) {
                    if anc != b.root()
                        && !m.contains_dest(anc)
                        && b.kind(anc) == a.kind(x)
                        && same_parent_kind(a, x, b, anc)
                        && !candidates.contains(&anc)
                    {
                        candidates.push(anc);
                    }
                }
            }
        }
        let best = candidates
            .into_iter()
            .map(|y| (y, dice(a, b, ia, ib, x, y, m)))
            .filter(|&(_, s)| s >= MIN_DICE)
            .min_by(|&(y1, s1), &(y2, s2)| {
                s2.total_cmp(&s1).then_with(|| {
                    let d = |y: NodeId| (relative_pos(ia, x) - relative_pos(ib, y)).abs();
                    d(y1).total_cmp(&d(y2))
                })
            });
        if let Some((y, _)) = best {
            m.insert(x, y);
            recover(a, b, x, y, m);
        }
    }
}

fn same_parent_kind(a: &Ast, x: NodeId, b: &Ast, y: NodeId) -> bool {
    a.parent(x).map(|p| a.kind(p)) == b.parent(y).map(|p| b.kind(p))
}

/// Pairs unmatched children of a mapped container pair, then recurses into
/// every mapped child pair.
fn recover(a: &Ast, b: &Ast, x: NodeId, y: NodeId, m: &mut AstMapping) {
    let free_a: Vec<NodeId> = a
        .children(x)
        .iter()
        .copied()
        .filter(|c| !m.contains_source(*c))
        .collect();
    let mut free_b: Vec<NodeId> = b
        .children(y)
        .iter()
        .copied()
        .filter(|c| !m.contains_dest(*c))
        .collect();
    let mut left = Vec::new();
    for cx in free_a {
        let found = free_b
            .iter()
            .position(|&cy| a.kind(cx) == b.kind(cy) && a.label(cx) == b.label(cy));
        match found {
            Some(i) => {
                let cy = free_b.remove(i);
                m.insert(cx, cy);
            }
            None => left.push(cx),
        }
    }
    for cx in left {
        if let Some(i) = free_b.iter().position(|&cy| a.kind(cx) == b.kind(cy)) {
            let cy = free_b.remove(i);
            m.insert(cx, cy);
        }
    }
    for &cx in a.children(x) {
        if let Some(cy) = m.get(cx) {
            if b.parent(cy) == Some(y) {
                recover(a, b, cx, cy, m);
            }
        }
    }
}

/// Drops pairs whose image escapes the image of the nearest mapped ancestor.
fn enforce_ancestry(a: &Ast, b: &Ast, ia: &TreeInfo, m: &mut AstMapping) {
    for &x in &ia.order {
        let Some(y) = m.get(x) else { continue };
        let anc = a.ancestors(x).into_iter().find(|p| m.contains_source(*p));
        if let Some(ax) = anc {
            let ay = m.get(ax).unwrap();
            if !b.is_ancestor(ay, y) {
                m.remove_source(x);
            }
        }
    }
}

/// Debug rendering: one line per pair, `kindA@span <-> kindB@span`.
pub fn render_mapping(old: &Ast, new: &Ast, mapping: &AstMapping) -> String {
    let mut out = String::new();
    let order: HashMap<NodeId, usize> = old
        .preorder()
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let mut pairs: Vec<_> = mapping.pairs().collect();
    pairs.sort_by_key(|(a, _)| order.get(a).copied().unwrap_or(usize::MAX));
    for (x, y) in pairs {
        let (nx, ny) = (old.node(x), new.node(y));
        let lx = if nx.label.is_empty() { String::new() } else { format!(":{}", nx.label) };
        let ly = if ny.label.is_empty() { String::new() } else { format!(":{}", ny.label) };
        out.push_str(&format!(
            "{:?}{}@{} \u{2194} {:?}{}@{}\n",
            nx.kind, lx, nx.span, ny.kind, ly, ny.span
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_method, NodeKind};

    fn check_invariants(a: &Ast, b: &Ast, m: &AstMapping) {
        let mut seen_b = std::collections::HashSet::new();
        for (x, y) in m.pairs() {
            assert_eq!(a.kind(x), b.kind(y), "kind mismatch");
            assert!(seen_b.insert(y), "destination mapped twice");
        }
    }

    #[test]
    fn identical_trees_map_positionally() {
        let src = "void m(App app) { License l = app.getLicense(); if (l != null) { l.use(1); } }";
        let a = parse_method(src).unwrap();
        let b = parse_method(src).unwrap();
        let m = map_asts(&a, &b);
        let pa = a.preorder();
        let pb = b.preorder();
        assert_eq!(m.len(), pa.len());
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(m.get(*x), Some(*y));
        }
    }

    #[test]
    fn renamed_invocation_maps_by_context() {
        let a = parse_method("void m(App app) { License l = app.getLicense(); }").unwrap();
        let b = parse_method("void m(App app) { License l = app.readLicense(); }").unwrap();
        let m = map_asts(&a, &b);
        assert_eq!(m.len(), a.preorder().len());
        let get = a.preorder().into_iter().find(|&n| a.label(n) == "getLicense").unwrap();
        let read = b.preorder().into_iter().find(|&n| b.label(n) == "readLicense").unwrap();
        assert_eq!(m.get(get), Some(read));
        check_invariants(&a, &b, &m);
    }

    #[test]
    fn moved_statement_keeps_its_mapping() {
        let a = parse_method("void m(C c, L l) { c.add(l.getName()); }").unwrap();
        let b = parse_method(
            "void m(C c, L l) { if (l.getType() == T.X) { c.add(l.getName()); } c.refresh(); }",
        )
        .unwrap();
        let m = map_asts(&a, &b);
        let add_a = a.preorder().into_iter().find(|&n| a.label(n) == "add").unwrap();
        let add_b = b.preorder().into_iter().find(|&n| b.label(n) == "add").unwrap();
        assert_eq!(m.get(add_a), Some(add_b));
        check_invariants(&a, &b, &m);
    }

    #[test]
    fn no_common_subtree_maps_only_the_skeleton() {
        let a = parse_method("void m() { return; }").unwrap();
        let b = parse_method("int n(A a) { x = 1; }").unwrap();
        let m = map_asts(&a, &b);
        let kinds: Vec<NodeKind> = m.pairs().map(|(x, _)| a.kind(x)).collect();
        assert!(kinds.contains(&NodeKind::MethodDecl));
        for k in kinds {
            assert!(matches!(
                k,
                NodeKind::MethodDecl | NodeKind::TypeName | NodeKind::Block
            ));
        }
    }

    #[test]
    fn render_uses_kind_and_span() {
        let a = parse_method("void m() { }").unwrap();
        let text = render_mapping(&a, &a, &map_asts(&a, &a));
        assert!(text.starts_with("MethodDecl:m@1:1 \u{2194} MethodDecl:m@1:1"));
    }
}
