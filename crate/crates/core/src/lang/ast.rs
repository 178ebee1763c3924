//! Arena-backed syntax tree for MiniJ methods.
//!
//! Nodes live in a flat vector and refer to each other by [`NodeId`]. Editing
//! operations (used by the transformer) may leave unreachable nodes in the
//! arena; everything that walks the tree starts at [`Ast::root`] and follows
//! child links, so orphans are invisible.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_tree_id() -> u64 {
    NEXT_TREE_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    MethodDecl,
    Param,
    Block,
    VarDeclStmt,
    ExprStmt,
    IfStmt,
    ReturnStmt,
    Assign,
    MethodInvocation,
    FieldAccess,
    Identifier,
    Literal,
    BinaryOp,
    TypeName,
    VarDeclFragment,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::VarDeclStmt | NodeKind::ExprStmt | NodeKind::IfStmt | NodeKind::ReturnStmt
        )
    }

    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::Assign
                | NodeKind::MethodInvocation
                | NodeKind::FieldAccess
                | NodeKind::Identifier
                | NodeKind::Literal
                | NodeKind::BinaryOp
        )
    }

    pub fn short_name(self) -> &'static str {
        match self {
            NodeKind::MethodDecl => "MD",
            NodeKind::Param => "PRM",
            NodeKind::Block => "BLK",
            NodeKind::VarDeclStmt => "VDS",
            NodeKind::ExprStmt => "ES",
            NodeKind::IfStmt => "IF",
            NodeKind::ReturnStmt => "RET",
            NodeKind::Assign => "ASN",
            NodeKind::MethodInvocation => "MI",
            NodeKind::FieldAccess => "FA",
            NodeKind::Identifier => "SN",
            NodeKind::Literal => "LIT",
            NodeKind::BinaryOp => "BIN",
            NodeKind::TypeName => "TN",
            NodeKind::VarDeclFragment => "VDF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Number,
    String,
    Boolean,
    Null,
}

impl LiteralKind {
    pub fn type_name(self) -> &'static str {
        match self {
            LiteralKind::Number => "number",
            LiteralKind::String => "String",
            LiteralKind::Boolean => "boolean",
            LiteralKind::Null => "null",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Name, operator or literal text; empty for purely structural nodes.
    pub label: String,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub span: Span,
    pub literal: Option<LiteralKind>,
    /// Only meaningful for `MethodInvocation`: when set, `children[0]` is the
    /// receiver expression and the remaining children are arguments.
    pub has_receiver: bool,
}

#[derive(Debug, Clone)]
pub struct Ast {
    tree_id: u64,
    nodes: Vec<AstNode>,
    root: NodeId,
}

impl Ast {
    pub(crate) fn from_nodes(nodes: Vec<AstNode>, root: NodeId) -> Self {
        Ast {
            tree_id: fresh_tree_id(),
            nodes,
            root,
        }
    }

    pub fn tree_id(&self) -> u64 {
        self.tree_id
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id]
    }

    pub fn get(&self, id: NodeId) -> Option<&AstNode> {
        self.nodes.get(id)
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id].kind
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id].label
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Method name carried by the root `MethodDecl`.
    pub fn method_name(&self) -> &str {
        &self.nodes[self.root].label
    }

    /// Reachable nodes in preorder.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in self.nodes[n].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn postorder(&self) -> Vec<NodeId> {
        fn go(ast: &Ast, n: NodeId, out: &mut Vec<NodeId>) {
            for &c in &ast.nodes[n].children {
                go(ast, c, out);
            }
            out.push(n);
        }
        let mut out = Vec::new();
        go(self, self.root, &mut out);
        out
    }

    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in self.nodes[n].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn subtree_size(&self, id: NodeId) -> usize {
        1 + self.descendants(id).len()
    }

    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.nodes[p].parent;
        }
        out
    }

    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        let mut cur = self.nodes[node].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    /// True when `id` is reachable from the root through child links.
    pub fn is_attached(&self, id: NodeId) -> bool {
        let mut cur = id;
        loop {
            if cur == self.root {
                return true;
            }
            match self.nodes[cur].parent {
                Some(p) if self.nodes[p].children.contains(&cur) => cur = p,
                _ => return false,
            }
        }
    }

    pub fn index_in_parent(&self, id: NodeId) -> Option<usize> {
        let p = self.nodes[id].parent?;
        self.nodes[p].children.iter().position(|&c| c == id)
    }

    pub fn height(&self, id: NodeId) -> usize {
        1 + self.nodes[id]
            .children
            .iter()
            .map(|&c| self.height(c))
            .max()
            .unwrap_or(0)
    }

    /// Receiver expression of a method invocation or field access.
    pub fn receiver(&self, id: NodeId) -> Option<NodeId> {
        let n = &self.nodes[id];
        match n.kind {
            NodeKind::MethodInvocation if n.has_receiver => n.children.first().copied(),
            NodeKind::FieldAccess => n.children.first().copied(),
            _ => None,
        }
    }

    pub fn arguments(&self, id: NodeId) -> &[NodeId] {
        let n = &self.nodes[id];
        match n.kind {
            NodeKind::MethodInvocation if n.has_receiver => &n.children[1.min(n.children.len())..],
            NodeKind::MethodInvocation => &n.children,
            _ => &[],
        }
    }

    /// Structural equality ignoring ids and spans.
    pub fn structurally_equal(&self, other: &Ast) -> bool {
        fn eq(a: &Ast, x: NodeId, b: &Ast, y: NodeId) -> bool {
            let (nx, ny) = (a.node(x), b.node(y));
            nx.kind == ny.kind
                && nx.label == ny.label
                && nx.literal == ny.literal
                && (nx.kind != NodeKind::MethodInvocation || nx.has_receiver == ny.has_receiver)
                && nx.children.len() == ny.children.len()
                && nx
                    .children
                    .iter()
                    .zip(&ny.children)
                    .all(|(&cx, &cy)| eq(a, cx, b, cy))
        }
        eq(self, self.root, other, other.root)
    }

    /// Checks parent/child consistency over the reachable tree.
    pub fn validate(&self) -> Result<()> {
        if self.nodes[self.root].kind != NodeKind::MethodDecl {
            return Err(Error::MalformedTree("root is not a MethodDecl".into()));
        }
        if self.nodes[self.root].parent.is_some() {
            return Err(Error::MalformedTree("root has a parent".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        for n in self.preorder() {
            if seen[n] {
                return Err(Error::MalformedTree(format!("node {n} reachable twice")));
            }
            seen[n] = true;
            for &c in &self.nodes[n].children {
                if self.nodes[c].parent != Some(n) {
                    return Err(Error::MalformedTree(format!(
                        "node {c} does not point back to parent {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    // ---- editing -------------------------------------------------------

    /// Appends a detached node and returns its id.
    pub fn add_node(&mut self, kind: NodeKind, label: impl Into<String>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(AstNode {
            id,
            kind,
            label: label.into(),
            children: Vec::new(),
            parent: None,
            span: Span::default(),
            literal: None,
            has_receiver: false,
        });
        id
    }

    /// Copies a single node (without children) from another tree.
    pub fn import_node(&mut self, other: &Ast, id: NodeId) -> NodeId {
        let src = other.node(id);
        let new = self.add_node(src.kind, src.label.clone());
        let n = &mut self.nodes[new];
        n.literal = src.literal;
        n.has_receiver = src.has_receiver;
        n.span = src.span;
        new
    }

    /// Deep-copies a subtree of this tree; the copy is detached.
    pub fn duplicate_subtree(&mut self, id: NodeId) -> NodeId {
        let src = self.nodes[id].clone();
        let copy = self.add_node(src.kind, src.label);
        self.nodes[copy].literal = src.literal;
        self.nodes[copy].has_receiver = src.has_receiver;
        self.nodes[copy].span = src.span;
        let children: Vec<NodeId> = src.children.iter().map(|&c| self.duplicate_subtree(c)).collect();
        self.set_children(copy, children);
        copy
    }

    pub fn set_label(&mut self, id: NodeId, label: impl Into<String>) {
        self.nodes[id].label = label.into();
    }

    pub fn set_has_receiver(&mut self, id: NodeId, value: bool) {
        self.nodes[id].has_receiver = value;
    }

    /// Replaces the child list of `parent`, re-parenting the new children.
    pub fn set_children(&mut self, parent: NodeId, children: Vec<NodeId>) {
        for &c in &children {
            self.detach(c);
        }
        for &old in &self.nodes[parent].children.clone() {
            if self.nodes[old].parent == Some(parent) {
                self.nodes[old].parent = None;
            }
        }
        for &c in &children {
            self.nodes[c].parent = Some(parent);
        }
        self.nodes[parent].children = children;
    }

    /// Removes `id` from its parent's child list.
    pub fn detach(&mut self, id: NodeId) {
        if let Some(p) = self.nodes[id].parent.take() {
            self.nodes[p].children.retain(|&c| c != id);
        }
    }

    pub fn insert_child(&mut self, parent: NodeId, index: usize, child: NodeId) {
        self.detach(child);
        let idx = index.min(self.nodes[parent].children.len());
        self.nodes[parent].children.insert(idx, child);
        self.nodes[child].parent = Some(parent);
    }

    /// Puts `new` where `old` currently sits; `old` becomes detached.
    pub fn replace(&mut self, old: NodeId, new: NodeId) -> bool {
        let Some(p) = self.nodes[old].parent else {
            return false;
        };
        let Some(idx) = self.nodes[p].children.iter().position(|&c| c == old) else {
            return false;
        };
        self.detach(new);
        // detaching `new` may have shifted `old` if they were siblings
        let idx = self.nodes[p]
            .children
            .iter()
            .position(|&c| c == old)
            .unwrap_or(idx);
        self.nodes[p].children[idx] = new;
        self.nodes[new].parent = Some(p);
        self.nodes[old].parent = None;
        true
    }
}
