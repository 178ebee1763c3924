//! Deletion of matched client code and transplantation of pattern code.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::mapping::NodeMappingSet;
use super::mts::{compute_mts, reduce_mts, Mts};
use super::naming::{concrete_label, concretize_names};
use crate::change_graph::ChangeGraph;
use crate::detector::Match;
use crate::error::{Error, Result};
use crate::fgpdg::{Category, Fgpdg};
use crate::lang::{build_type_env, parse_method, print_method, Ast, NodeId, NodeKind, TypeEnv};
use crate::miner::Instance;

/// Client AST node removed when graph node `c` is deleted, if any.
fn tombstone_anchor(ast: &Ast, g: &Fgpdg, c: usize) -> Option<NodeId> {
    let node = g.node(c);
    let a = node.primary_anchor();
    match node.category {
        Category::Action | Category::Control => Some(a),
        Category::Data => match ast.kind(a) {
            NodeKind::VarDeclFragment | NodeKind::Literal => Some(a),
            _ => None,
        },
    }
}

/// Where a transplanted statement goes.
enum Slot {
    Replace(NodeId),
    Before(NodeId),
    After(NodeId),
}

struct Work<'a> {
    cg: &'a ChangeGraph,
    maps: &'a NodeMappingSet,
    client_ast: &'a Ast,
    client: &'a Fgpdg,
    out: Ast,
    dead: HashSet<NodeId>,
    /// New-AST node -> its copy in `out`.
    placed: HashMap<NodeId, NodeId>,
    names: BTreeMap<String, String>,
    rank: HashMap<NodeId, usize>,
    /// New-AST anchors of the instance's new-side graph nodes.
    pattern_nodes: HashSet<NodeId>,
}

impl Work<'_> {
    fn nc(&self, n: NodeId) -> bool {
        self.maps.a_new_cli.contains_source(n)
    }

    fn resolve(&self, n: NodeId) -> Option<NodeId> {
        self.placed.get(&n).copied().or_else(|| self.maps.a_new_cli.get(n))
    }

    fn import(&mut self, x: NodeId) -> NodeId {
        let y = self.out.import_node(&self.cg.new_ast, x);
        let label = concrete_label(self.cg, x, &self.names, self.maps, self.client_ast, self.client);
        self.out.set_label(y, label);
        y
    }

    /// Client node `c` for a new parent: moved when dead, else copied.
    fn take(&mut self, c: NodeId) -> NodeId {
        if self.dead.contains(&c) {
            c
        } else {
            self.out.duplicate_subtree(c)
        }
    }

    /// Whether the subtree of pattern node `k` holds unmapped pattern code.
    fn carries_pattern(&self, k: NodeId) -> bool {
        let ast = &self.cg.new_ast;
        std::iter::once(k)
            .chain(ast.descendants(k))
            .any(|n| self.pattern_nodes.contains(&n) && !self.nc(n))
    }

    /// Copy of a mapped node. Children follow the pattern: mapped ones by
    /// their client images, pattern code freshly built, and context
    /// arguments taken from the client at the same position.
    fn build_leaf(&mut self, x: NodeId) -> NodeId {
        if let Some(&p) = self.placed.get(&x) {
            self.out.detach(p);
            return p;
        }
        let c = self.maps.a_new_cli.get(x).expect("leaf is mapped");
        let y = self.import(x);
        self.placed.insert(x, y);
        let client_kids: Vec<NodeId> = self.out.children(c).to_vec();
        let recv = self.out.node(c).has_receiver;
        if recv != self.cg.new_ast.node(x).has_receiver {
            self.out.set_has_receiver(y, recv);
            let kids = client_kids.into_iter().map(|k| self.take(k)).collect();
            self.out.set_children(y, kids);
            return y;
        }
        let pattern_kids: Vec<NodeId> = self.cg.new_ast.children(x).to_vec();
        let images: HashSet<NodeId> = pattern_kids
            .iter()
            .filter_map(|&k| self.maps.a_new_cli.get(k))
            .collect();
        let mut kids = Vec::with_capacity(pattern_kids.len());
        for (i, &k) in pattern_kids.iter().enumerate() {
            let positional = client_kids
                .get(i)
                .copied()
                .filter(|ck| !images.contains(ck) && !self.dead.contains(ck));
            let built = if self.nc(k) {
                self.build_leaf(k)
            } else if self.carries_pattern(k) {
                self.build_fresh(k)
            } else if let Some(ck) = positional {
                self.take(ck)
            } else {
                self.build_fresh(k)
            };
            kids.push(built);
        }
        self.out.set_children(y, kids);
        y
    }

    /// Pattern subtree of an unmapped node, down to mapped nodes.
    fn build_fresh(&mut self, x: NodeId) -> NodeId {
        if let Some(&p) = self.placed.get(&x) {
            self.out.detach(p);
            return p;
        }
        let y = self.import(x);
        self.placed.insert(x, y);
        let kids: Vec<NodeId> = self.cg.new_ast.children(x).to_vec();
        let built = kids
            .into_iter()
            .map(|k| if self.nc(k) { self.build_leaf(k) } else { self.build_fresh(k) })
            .collect();
        self.out.set_children(y, built);
        y
    }

    fn build(&mut self, x: NodeId, mts: &Mts) -> NodeId {
        let single = mts.members.len() == 1;
        if self.nc(x) && (x != mts.root || single) {
            return self.build_leaf(x);
        }
        let y = self.import(x);
        let kids: Vec<NodeId> = self
            .cg
            .new_ast
            .children(x)
            .iter()
            .filter(|c| mts.members.contains(c))
            .copied()
            .collect();
        let built: Vec<NodeId> = kids.into_iter().map(|k| self.build(k, mts)).collect();
        self.out.set_children(y, built);
        self.placed.insert(x, y);
        y
    }

    /// Nearest enclosing Block of `n` and the child of that block on the path.
    fn statement_of(&self, n: NodeId) -> Option<(NodeId, NodeId)> {
        let mut cur = n;
        while let Some(p) = self.out.parent(cur) {
            if self.out.kind(p) == NodeKind::Block {
                return Some((p, cur));
            }
            cur = p;
        }
        None
    }

    fn is_dead_stmt(&self, s: NodeId) -> bool {
        if self.dead.contains(&s) {
            return true;
        }
        match self.out.kind(s) {
            NodeKind::ExprStmt => self.out.children(s).iter().all(|c| self.dead.contains(c)),
            NodeKind::VarDeclStmt => self
                .out
                .children(s)
                .iter()
                .any(|&c| self.out.kind(c) == NodeKind::VarDeclFragment && self.dead.contains(&c)),
            _ => false,
        }
    }

    /// Client statement standing for new-AST statement `t`, if any of its
    /// nodes has an attached client image.
    fn counterpart(&self, t: NodeId) -> Option<NodeId> {
        std::iter::once(t)
            .chain(self.cg.new_ast.descendants(t))
            .filter_map(|u| self.resolve(u))
            .find(|&img| self.out.is_attached(img))
            .and_then(|img| self.statement_of(img).map(|(_, s)| s))
    }

    fn find_slot(&self, mts: &Mts) -> Option<Slot> {
        let mut leaves: Vec<NodeId> = mts.members.iter().copied().filter(|&m| self.nc(m)).collect();
        leaves.sort_by_key(|&m| {
            let img = self.resolve(m);
            let dead = img.is_some_and(|i| self.dead.contains(&i));
            (!dead, !self.maps.via_ast.contains(&m), self.rank[&m])
        });
        let images: Vec<NodeId> = leaves
            .iter()
            .filter_map(|&m| self.resolve(m))
            .filter(|&i| self.out.is_attached(i))
            .collect();
        for &img in &images {
            if let Some((_, s)) = self.statement_of(img) {
                if self.is_dead_stmt(s) {
                    return Some(Slot::Replace(s));
                }
            }
        }
        let new_ast = &self.cg.new_ast;
        if let Some(parent) = new_ast.parent(mts.root) {
            let sibs = new_ast.children(parent);
            let idx = sibs.iter().position(|&c| c == mts.root).unwrap_or(0);
            if let Some(s) = sibs[..idx].iter().rev().find_map(|&t| self.counterpart(t)) {
                return Some(Slot::After(s));
            }
            if let Some(s) = sibs[idx + 1..].iter().find_map(|&t| self.counterpart(t)) {
                return Some(Slot::Before(s));
            }
        }
        images
            .iter()
            .find_map(|&img| self.statement_of(img))
            .map(|(_, s)| Slot::Before(s))
    }

    fn transplant_mapped_root(&mut self, mts: &Mts) {
        // a single node already copied as another subtree's leaf is done
        if self.placed.contains_key(&mts.root) && mts.members.len() == 1 {
            return;
        }
        let Some(target) = self.resolve(mts.root) else { return };
        if !self.out.is_attached(target) {
            return;
        }
        if mts.members.len() == 1 {
            // the copy takes the image's place and children
            let y = self.build_leaf(mts.root);
            self.out.replace(target, y);
            return;
        }
        let y = self.build(mts.root, mts);
        self.out.replace(target, y);
    }

    fn transplant_unmapped_root(&mut self, mts: &Mts) -> Result<()> {
        if self.placed.contains_key(&mts.root) {
            return Ok(());
        }
        if self.cg.new_ast.kind(mts.root) == NodeKind::Param {
            let y = self.build(mts.root, mts);
            let root = self.out.root();
            let at = self
                .out
                .children(root)
                .iter()
                .position(|&c| self.out.kind(c) == NodeKind::Block)
                .unwrap_or(self.out.children(root).len());
            self.out.insert_child(root, at, y);
            return Ok(());
        }
        let slot = self.find_slot(mts).ok_or(Error::UnattachableMts(mts.root))?;
        let y = self.build(mts.root, mts);
        match slot {
            Slot::Replace(s) => {
                self.out.replace(s, y);
            }
            Slot::Before(s) | Slot::After(s) => {
                let block = self.out.parent(s).expect("statements sit in blocks");
                let mut at = self.out.index_in_parent(s).expect("attached");
                if matches!(slot, Slot::After(_)) {
                    at += 1;
                }
                self.out.insert_child(block, at, y);
            }
        }
        Ok(())
    }

    /// Replaces an `if` by the statements of its branches.
    fn splice_if(&mut self, s: NodeId) {
        let Some(block) = self.out.parent(s) else { return };
        let at = self.out.index_in_parent(s).expect("attached");
        let mut body = Vec::new();
        for &b in &self.out.children(s)[1..] {
            body.extend(self.out.children(b).iter().copied());
        }
        self.out.detach(s);
        for (k, st) in body.into_iter().enumerate() {
            self.out.insert_child(block, at + k, st);
        }
    }

    fn delete(&mut self, t: NodeId) {
        if self.out.kind(t) == NodeKind::IfStmt {
            self.splice_if(t);
            return;
        }
        let Some(p) = self.out.parent(t) else { return };
        match self.out.kind(p) {
            NodeKind::ExprStmt | NodeKind::VarDeclStmt => self.delete(p),
            NodeKind::MethodInvocation => {
                if self.out.node(p).has_receiver && self.out.children(p).first() == Some(&t) {
                    self.out.set_has_receiver(p, false);
                }
                self.out.detach(t);
            }
            NodeKind::FieldAccess | NodeKind::BinaryOp | NodeKind::Assign => self.delete(p),
            NodeKind::IfStmt => {
                if self.out.children(p).first() == Some(&t) {
                    self.delete(p);
                } else {
                    self.out.detach(t);
                }
            }
            _ => self.out.detach(t),
        }
    }

    fn cleanup(&mut self) {
        let mut dead: Vec<NodeId> = self.dead.iter().copied().collect();
        dead.sort();
        for t in dead {
            if self.out.is_attached(t) {
                self.delete(t);
            }
        }
        loop {
            let empty = self.out.preorder().into_iter().find(|&n| match self.out.kind(n) {
                NodeKind::ExprStmt => self.out.children(n).is_empty(),
                NodeKind::VarDeclStmt => !self
                    .out
                    .children(n)
                    .iter()
                    .any(|&c| self.out.kind(c) == NodeKind::VarDeclFragment),
                _ => false,
            });
            match empty {
                Some(n) => self.out.detach(n),
                None => break,
            }
        }
    }
}

/// Result of applying a pattern once.
#[derive(Debug, Clone)]
pub struct Repaired {
    pub ast: Ast,
    pub text: String,
}

/// Applies the pattern instance `cg`/`instance` at match `m` of the client.
#[allow(clippy::too_many_arguments)]
pub fn apply_sep(
    client_ast: &Ast,
    client_env: &TypeEnv,
    client: &Fgpdg,
    cg: &ChangeGraph,
    instance: &Instance,
    m: &Match,
    maps: &NodeMappingSet,
) -> Result<Repaired> {
    let new_ast = &cg.new_ast;
    let rank: HashMap<NodeId, usize> = new_ast
        .preorder()
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let nc = |n: NodeId| maps.a_new_cli.contains_source(n);
    let mts_set = mts_set_for(cg, instance, maps);
    let names = concretize_names(cg, &mts_set, maps, client_ast, client, client_env);
    let mut w = Work {
        cg,
        maps,
        client_ast,
        client,
        out: client_ast.clone(),
        dead: m
            .g_map
            .iter()
            .filter_map(|&c| tombstone_anchor(client_ast, client, c))
            .collect(),
        placed: HashMap::new(),
        names,
        rank,
        pattern_nodes: instance
            .new
            .iter()
            .flat_map(|&g| cg.new.node(g).anchors.iter().copied())
            .collect(),
    };
    for mts in mts_set.iter().filter(|s| nc(s.root)) {
        w.transplant_mapped_root(mts);
    }
    for mts in mts_set.iter().filter(|s| !nc(s.root)) {
        w.transplant_unmapped_root(mts)?;
    }
    w.cleanup();
    let text = print_method(&w.out).map_err(|e| Error::InvalidResult(e.to_string()))?;
    let ast = parse_method(&text).map_err(|e| Error::InvalidResult(e.to_string()))?;
    build_type_env(&ast, &client_env.signatures).map_err(|e| Error::InvalidResult(e.to_string()))?;
    Ok(Repaired { ast, text })
}

/// MTSs the repair of `instance` at a client would transplant, one per
/// primary anchor of the instance's new-side nodes. Other anchors (later
/// uses of a variable) may sit in code outside the pattern.
pub fn mts_set_for(cg: &ChangeGraph, instance: &Instance, maps: &NodeMappingSet) -> Vec<Mts> {
    let nc = |n: NodeId| maps.a_new_cli.contains_source(n);
    let mut all = Vec::new();
    for &gn in &instance.new {
        let a = cg.new.node(gn).primary_anchor();
        all.push(compute_mts(&cg.new_ast, a, gn, &nc));
    }
    reduce_mts(&cg.new_ast, all)
}
