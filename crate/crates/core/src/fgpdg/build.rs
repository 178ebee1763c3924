use std::collections::{BTreeMap, BTreeSet};

use super::{Category, EdgeLabel, Fgpdg, Mode};
use crate::error::{Error, Result};
use crate::lang::{Ast, NodeId, NodeKind, TypeEnv, UNKNOWN_TYPE};

/// Abstracted label of a variable, literal, invocation or field access
/// (operators, assignments and `if` keep their own text).
pub fn abstract_label(ast: &Ast, id: NodeId, env: &TypeEnv, mode: Mode) -> String {
    let node = ast.node(id);
    match node.kind {
        NodeKind::Identifier | NodeKind::VarDeclFragment | NodeKind::Param => match mode {
            Mode::Sirius => env.var_type(&node.label).to_string(),
            Mode::Cpatminer => "*".to_string(),
        },
        NodeKind::Literal => env.type_of(ast, id),
        NodeKind::MethodInvocation | NodeKind::FieldAccess => match mode {
            Mode::Sirius => format!("{}#{}", env.receiver_type(ast, id), node.label),
            Mode::Cpatminer => node.label.clone(),
        },
        NodeKind::Assign => "=".to_string(),
        NodeKind::IfStmt => "if".to_string(),
        _ => node.label.clone(),
    }
}

/// Builds the fgPDG of a method (no closure edges).
pub fn build_fgpdg(ast: &Ast, env: &TypeEnv, mode: Mode, strict: bool) -> Result<Fgpdg> {
    let mut b = Builder {
        ast,
        env,
        mode,
        strict,
        g: Fgpdg::new(ast.method_name().to_string(), mode, ast),
        current: BTreeMap::new(),
        controls: Vec::new(),
    };
    let root = ast.root();
    for &c in ast.children(root) {
        match ast.kind(c) {
            NodeKind::Param => {
                let label = b.var_label(ast.label(c));
                let d = b.g.add_node(Category::Data, label, ast.label(c).to_string(), c);
                b.current.insert(ast.label(c).to_string(), d);
            }
            NodeKind::Block => b.block(c)?,
            _ => {}
        }
    }
    Ok(b.g)
}

#[derive(Clone, Copy)]
enum Val {
    Data(usize),
    Action(usize),
}

impl Val {
    fn id(self) -> usize {
        match self {
            Val::Data(i) | Val::Action(i) => i,
        }
    }
}

struct Builder<'a> {
    ast: &'a Ast,
    env: &'a TypeEnv,
    mode: Mode,
    strict: bool,
    g: Fgpdg,
    /// Variable name -> data node of its current def region.
    current: BTreeMap<String, usize>,
    /// Enclosing `if` control nodes.
    controls: Vec<usize>,
}

impl Builder<'_> {
    fn var_label(&self, name: &str) -> String {
        match self.mode {
            Mode::Sirius => self.env.var_type(name).to_string(),
            Mode::Cpatminer => "*".into(),
        }
    }

    fn block(&mut self, block: NodeId) -> Result<()> {
        let before: BTreeSet<String> = self.current.keys().cloned().collect();
        for &s in self.ast.children(block) {
            self.stmt(s)?;
        }
        // names declared in the block go out of scope
        self.current.retain(|k, _| before.contains(k));
        Ok(())
    }

    fn stmt(&mut self, id: NodeId) -> Result<()> {
        let ast = self.ast;
        match ast.kind(id) {
            NodeKind::VarDeclStmt => {
                for &frag in &ast.children(id)[1..] {
                    let init = match ast.children(frag).first() {
                        Some(&e) => self.expr(e)?,
                        None => None,
                    };
                    let name = ast.label(frag).to_string();
                    let label = self.var_label(&name);
                    let d = self.g.add_node(Category::Data, label, name.clone(), frag);
                    if let Some(v) = init {
                        self.g.add_edge(v.id(), d, EdgeLabel::Def, false);
                    }
                    self.current.insert(name, d);
                }
            }
            NodeKind::ExprStmt | NodeKind::ReturnStmt => {
                if let Some(&e) = ast.children(id).first() {
                    self.expr(e)?;
                }
            }
            NodeKind::IfStmt => {
                let children = ast.children(id);
                let cond = self.expr(children[0])?;
                let c = self.g.add_node(Category::Control, "if".into(), "if".into(), id);
                if let Some(&outer) = self.controls.last() {
                    self.g.add_edge(outer, c, EdgeLabel::Ctrl, false);
                }
                match cond {
                    Some(Val::Action(a)) => {
                        self.g.add_edge(a, c, EdgeLabel::Cond, false);
                    }
                    Some(Val::Data(d)) => {
                        self.g.add_edge(d, c, EdgeLabel::Ref, false);
                    }
                    None => {}
                }
                self.controls.push(c);
                for &b in &children[1..] {
                    self.block(b)?;
                }
                self.controls.pop();
            }
            NodeKind::Block => self.block(id)?,
            _ => {}
        }
        Ok(())
    }

    fn action(&mut self, id: NodeId, label: String) -> usize {
        let text = self.ast.label(id).to_string();
        let a = self.g.add_node(Category::Action, label, text, id);
        if let Some(&c) = self.controls.last() {
            self.g.add_edge(c, a, EdgeLabel::Ctrl, false);
        }
        a
    }

    fn check_receiver(&self, id: NodeId) -> Result<()> {
        if self.strict && self.mode == Mode::Sirius {
            if let Some(r) = self.ast.receiver(id) {
                if self.env.type_of(self.ast, r) == UNKNOWN_TYPE {
                    return Err(Error::UnresolvedReceiver(format!(
                        "receiver of `{}` at {}",
                        self.ast.label(id),
                        self.ast.node(id).span
                    )));
                }
            }
        }
        Ok(())
    }

    fn expr(&mut self, id: NodeId) -> Result<Option<Val>> {
        let ast = self.ast;
        let node = ast.node(id);
        let v = match node.kind {
            NodeKind::Identifier => {
                let name = &node.label;
                if self.env.is_class_ref(name) {
                    return Ok(None);
                }
                match self.current.get(name) {
                    Some(&d) => {
                        self.g.add_anchor(d, id);
                        Some(Val::Data(d))
                    }
                    None => {
                        let label = self.var_label(name);
                        let d = self.g.add_node(Category::Data, label, name.clone(), id);
                        self.current.insert(name.clone(), d);
                        Some(Val::Data(d))
                    }
                }
            }
            NodeKind::Literal => {
                let label = abstract_label(ast, id, self.env, self.mode);
                Some(Val::Data(self.g.add_node(Category::Data, label, node.label.clone(), id)))
            }
            NodeKind::MethodInvocation | NodeKind::FieldAccess => {
                self.check_receiver(id)?;
                let recv = match ast.receiver(id) {
                    Some(r) => self.expr(r)?,
                    None => None,
                };
                let mut args = Vec::new();
                for &a in ast.arguments(id) {
                    args.push(self.expr(a)?);
                }
                let label = abstract_label(ast, id, self.env, self.mode);
                let a = self.action(id, label);
                if let Some(r) = recv {
                    self.g.add_edge(r.id(), a, EdgeLabel::Recv, false);
                }
                for v in args.into_iter().flatten() {
                    self.g.add_edge(v.id(), a, EdgeLabel::Para, false);
                }
                Some(Val::Action(a))
            }
            NodeKind::BinaryOp => {
                let l = self.expr(node.children[0])?;
                let r = self.expr(node.children[1])?;
                let a = self.action(id, node.label.clone());
                for v in [l, r].into_iter().flatten() {
                    self.g.add_edge(v.id(), a, EdgeLabel::Ref, false);
                }
                Some(Val::Action(a))
            }
            NodeKind::Assign => {
                let target = node.children[0];
                let rhs = self.expr(node.children[1])?;
                let definer = match rhs {
                    Some(Val::Data(d)) => {
                        let eq = self.action(id, "=".into());
                        self.g.add_edge(d, eq, EdgeLabel::Ref, false);
                        Some(eq)
                    }
                    Some(Val::Action(a)) => Some(a),
                    None => None,
                };
                let name = ast.label(target).to_string();
                let label = self.var_label(&name);
                let d = self.g.add_node(Category::Data, label, name.clone(), target);
                if let Some(a) = definer {
                    self.g.add_edge(a, d, EdgeLabel::Def, false);
                }
                self.current.insert(name, d);
                definer.map(Val::Action)
            }
            _ => None,
        };
        Ok(v)
    }
}
