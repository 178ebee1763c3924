//! Variable typing for a single method plus the builtin signature table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ast::{Ast, NodeId, NodeKind};
use crate::error::{Error, Result};

pub const UNKNOWN_TYPE: &str = "Unknown";
/// Receiver type used for invocations without an explicit receiver.
pub const SELF_TYPE: &str = "This";

/// Maps `"ReceiverType#member"` to the member's return (or field) type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signatures {
    entries: BTreeMap<String, String>,
}

impl Signatures {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, receiver: &str, member: &str, ret: &str) {
        self.entries
            .insert(format!("{receiver}#{member}"), ret.to_string());
    }

    pub fn lookup(&self, receiver: &str, member: &str) -> Option<&str> {
        self.entries
            .get(&format!("{receiver}#{member}"))
            .map(String::as_str)
    }

    /// Adds `other`'s entries, overriding existing ones.
    pub fn merge(&mut self, other: Signatures) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| Error::Signatures(e.to_string()))?;
        for key in entries.keys() {
            match key.split_once('#') {
                Some((r, m)) if !r.is_empty() && !m.is_empty() => {}
                _ => {
                    return Err(Error::Signatures(format!(
                        "key `{key}` is not of the form Receiver#member"
                    )))
                }
            }
        }
        Ok(Signatures { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Per-method variable types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv {
    /// Parameters and locals, name -> declared type.
    pub vars: BTreeMap<String, String>,
    /// Lower-case names used but never declared; they type as `Unknown`.
    pub unresolved: BTreeSet<String>,
    pub signatures: Signatures,
}

impl TypeEnv {
    pub fn is_declared(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    /// Capitalized names that are not variables denote classes (static receivers).
    pub fn is_class_ref(&self, name: &str) -> bool {
        !self.vars.contains_key(name) && name.starts_with(|c: char| c.is_ascii_uppercase())
    }

    pub fn var_type<'a>(&'a self, name: &'a str) -> &'a str {
        if let Some(t) = self.vars.get(name) {
            t
        } else if self.is_class_ref(name) {
            name
        } else {
            UNKNOWN_TYPE
        }
    }

    /// Static type of an expression node.
    pub fn type_of(&self, ast: &Ast, id: NodeId) -> String {
        let node = ast.node(id);
        match node.kind {
            NodeKind::Identifier => self.var_type(&node.label).to_string(),
            NodeKind::Literal => node
                .literal
                .map(|l| l.type_name().to_string())
                .unwrap_or_else(|| UNKNOWN_TYPE.into()),
            NodeKind::MethodInvocation | NodeKind::FieldAccess => {
                let recv = self.receiver_type(ast, id);
                self.signatures
                    .lookup(&recv, &node.label)
                    .unwrap_or(UNKNOWN_TYPE)
                    .to_string()
            }
            NodeKind::BinaryOp => match node.label.as_str() {
                "+" | "-" => {
                    let any_string = node
                        .children
                        .iter()
                        .any(|&c| self.type_of(ast, c) == "String");
                    if any_string && node.label == "+" {
                        "String".into()
                    } else {
                        "number".into()
                    }
                }
                _ => "boolean".into(),
            },
            NodeKind::Assign => node
                .children
                .first()
                .map(|&c| self.type_of(ast, c))
                .unwrap_or_else(|| UNKNOWN_TYPE.into()),
            _ => UNKNOWN_TYPE.into(),
        }
    }

    /// Receiver type of an invocation or field access.
    pub fn receiver_type(&self, ast: &Ast, id: NodeId) -> String {
        match ast.receiver(id) {
            Some(r) => self.type_of(ast, r),
            None => SELF_TYPE.into(),
        }
    }
}

/// Collects parameter and local declarations. Redeclaring a name that is
/// visible in an enclosing scope is an error; sibling blocks may reuse names.
pub fn build_type_env(ast: &Ast, signatures: &Signatures) -> Result<TypeEnv> {
    let mut env = TypeEnv {
        signatures: signatures.clone(),
        ..TypeEnv::default()
    };
    let mut scopes: Vec<BTreeSet<String>> = vec![BTreeSet::new()];
    walk(ast, ast.root(), &mut env, &mut scopes)?;
    Ok(env)
}

fn declare(
    env: &mut TypeEnv,
    scopes: &mut [BTreeSet<String>],
    name: &str,
    ty: &str,
) -> Result<()> {
    if scopes.iter().any(|s| s.contains(name)) {
        return Err(Error::DuplicateDeclaration(name.to_string()));
    }
    scopes.last_mut().unwrap().insert(name.to_string());
    env.vars
        .entry(name.to_string())
        .or_insert_with(|| ty.to_string());
    Ok(())
}

fn walk(
    ast: &Ast,
    id: NodeId,
    env: &mut TypeEnv,
    scopes: &mut Vec<BTreeSet<String>>,
) -> Result<()> {
    let node = ast.node(id);
    match node.kind {
        NodeKind::Param => {
            let ty = node.children.first().map(|&t| ast.label(t)).unwrap_or(UNKNOWN_TYPE);
            declare(env, scopes, &node.label, ty)?;
        }
        NodeKind::VarDeclStmt => {
            let ty = node.children.first().map(|&t| ast.label(t)).unwrap_or(UNKNOWN_TYPE);
            for &c in &node.children[1..] {
                // initializer is evaluated before the name comes into scope
                for &init in ast.children(c) {
                    walk(ast, init, env, scopes)?;
                }
                declare(env, scopes, ast.label(c), ty)?;
            }
        }
        NodeKind::Block => {
            scopes.push(BTreeSet::new());
            for &c in &node.children {
                walk(ast, c, env, scopes)?;
            }
            scopes.pop();
        }
        NodeKind::Identifier => {
            let visible = scopes.iter().any(|s| s.contains(&node.label));
            if !visible && !node.label.starts_with(|c: char| c.is_ascii_uppercase()) {
                env.unresolved.insert(node.label.clone());
            }
        }
        _ => {
            for &c in &node.children {
                walk(ast, c, env, scopes)?;
            }
        }
    }
    Ok(())
}
