//! Canonical pretty-printer. Four-space indentation, braces on every `if`
//! body, minimal parentheses derived from operator precedence.

use super::ast::{Ast, NodeId, NodeKind};
use crate::error::{Error, Result};

pub fn print_method(ast: &Ast) -> Result<String> {
    let root = ast.root();
    if ast.kind(root) != NodeKind::MethodDecl {
        return Err(Error::MalformedTree("root is not a MethodDecl".into()));
    }
    let children = ast.children(root);
    if children.len() < 2 {
        return Err(Error::MalformedTree("method needs a return type and a body".into()));
    }
    let ret = children[0];
    let body = *children.last().unwrap();
    expect_kind(ast, ret, NodeKind::TypeName)?;
    expect_kind(ast, body, NodeKind::Block)?;
    let mut params = Vec::new();
    for &p in &children[1..children.len() - 1] {
        expect_kind(ast, p, NodeKind::Param)?;
        let ty = single_child(ast, p)?;
        expect_kind(ast, ty, NodeKind::TypeName)?;
        params.push(format!("{} {}", ast.label(ty), ast.label(p)));
    }
    let mut out = format!(
        "{} {}({}) {{\n",
        ast.label(ret),
        ast.label(root),
        params.join(", ")
    );
    for &s in ast.children(body) {
        print_stmt_into(ast, s, 1, &mut out)?;
    }
    out.push_str("}\n");
    Ok(out)
}

/// Prints one statement at indentation level zero.
pub fn print_statement(ast: &Ast, stmt: NodeId) -> Result<String> {
    let mut out = String::new();
    print_stmt_into(ast, stmt, 0, &mut out)?;
    Ok(out)
}

pub fn print_expression(ast: &Ast, expr: NodeId) -> Result<String> {
    expr_text(ast, expr, 0)
}

fn expect_kind(ast: &Ast, id: NodeId, kind: NodeKind) -> Result<()> {
    if ast.kind(id) == kind {
        Ok(())
    } else {
        Err(Error::MalformedTree(format!(
            "node {id} is {:?}, expected {kind:?}",
            ast.kind(id)
        )))
    }
}

fn single_child(ast: &Ast, id: NodeId) -> Result<NodeId> {
    match ast.children(id) {
        [c] => Ok(*c),
        other => Err(Error::MalformedTree(format!(
            "{:?} node {id} has {} children, expected 1",
            ast.kind(id),
            other.len()
        ))),
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block_body(ast: &Ast, block: NodeId, level: usize, out: &mut String) -> Result<()> {
    expect_kind(ast, block, NodeKind::Block)?;
    out.push_str("{\n");
    for &s in ast.children(block) {
        print_stmt_into(ast, s, level + 1, out)?;
    }
    indent(level, out);
    out.push('}');
    Ok(())
}

fn print_stmt_into(ast: &Ast, id: NodeId, level: usize, out: &mut String) -> Result<()> {
    indent(level, out);
    let node = ast.node(id);
    match node.kind {
        NodeKind::VarDeclStmt => {
            let [ty, frag] = node.children[..] else {
                return Err(Error::MalformedTree(format!(
                    "declaration {id} needs a type and one fragment"
                )));
            };
            expect_kind(ast, ty, NodeKind::TypeName)?;
            expect_kind(ast, frag, NodeKind::VarDeclFragment)?;
            out.push_str(ast.label(ty));
            out.push(' ');
            out.push_str(ast.label(frag));
            match ast.children(frag) {
                [] => {}
                [init] => {
                    out.push_str(" = ");
                    out.push_str(&expr_text(ast, *init, 0)?);
                }
                _ => return Err(Error::MalformedTree(format!("fragment {frag} has extra children"))),
            }
            out.push_str(";\n");
        }
        NodeKind::ExprStmt => {
            let e = single_child(ast, id)?;
            out.push_str(&expr_text(ast, e, 0)?);
            out.push_str(";\n");
        }
        NodeKind::ReturnStmt => match node.children[..] {
            [] => out.push_str("return;\n"),
            [e] => {
                out.push_str("return ");
                out.push_str(&expr_text(ast, e, 0)?);
                out.push_str(";\n");
            }
            _ => return Err(Error::MalformedTree(format!("return {id} has extra children"))),
        },
        NodeKind::IfStmt => {
            let (cond, then_b, else_b) = match node.children[..] {
                [c, t] => (c, t, None),
                [c, t, e] => (c, t, Some(e)),
                _ => {
                    return Err(Error::MalformedTree(format!(
                        "if {id} needs a condition and one or two blocks"
                    )))
                }
            };
            out.push_str("if (");
            out.push_str(&expr_text(ast, cond, 0)?);
            out.push_str(") ");
            print_block_body(ast, then_b, level, out)?;
            if let Some(e) = else_b {
                out.push_str(" else ");
                print_block_body(ast, e, level, out)?;
            }
            out.push('\n');
        }
        other => {
            return Err(Error::MalformedTree(format!(
                "{other:?} node {id} is not a statement"
            )))
        }
    }
    Ok(())
}

fn precedence(op: &str) -> usize {
    match op {
        "||" => 1,
        "&&" => 2,
        "==" | "!=" => 3,
        "<" | ">" => 4,
        "+" | "-" => 5,
        _ => 0,
    }
}

/// Renders an expression; `min_prec` is the binding power required by the
/// enclosing context, anything weaker gets parenthesized.
fn expr_text(ast: &Ast, id: NodeId, min_prec: usize) -> Result<String> {
    let node = ast.node(id);
    let text = match node.kind {
        NodeKind::Identifier | NodeKind::Literal => {
            if !node.children.is_empty() {
                return Err(Error::MalformedTree(format!("leaf {id} has children")));
            }
            if node.label.is_empty() {
                return Err(Error::MalformedTree(format!("leaf {id} has an empty label")));
            }
            node.label.clone()
        }
        NodeKind::FieldAccess => {
            let recv = single_child(ast, id)?;
            format!("{}.{}", expr_text(ast, recv, 6)?, node.label)
        }
        NodeKind::MethodInvocation => {
            let (recv, args) = if node.has_receiver {
                let Some((r, rest)) = node.children.split_first() else {
                    return Err(Error::MalformedTree(format!("invocation {id} lost its receiver")));
                };
                (Some(*r), rest)
            } else {
                (None, &node.children[..])
            };
            let args = args
                .iter()
                .map(|&a| expr_text(ast, a, 0))
                .collect::<Result<Vec<_>>>()?
                .join(", ");
            match recv {
                Some(r) => format!("{}.{}({})", expr_text(ast, r, 6)?, node.label, args),
                None => format!("{}({})", node.label, args),
            }
        }
        NodeKind::BinaryOp => {
            let [l, r] = node.children[..] else {
                return Err(Error::MalformedTree(format!(
                    "binary operator {id} needs two operands"
                )));
            };
            let p = precedence(&node.label);
            if p == 0 {
                return Err(Error::MalformedTree(format!("unknown operator `{}`", node.label)));
            }
            let s = format!(
                "{} {} {}",
                expr_text(ast, l, p)?,
                node.label,
                expr_text(ast, r, p + 1)?
            );
            if p < min_prec {
                format!("({s})")
            } else {
                s
            }
        }
        NodeKind::Assign => {
            let [l, r] = node.children[..] else {
                return Err(Error::MalformedTree(format!("assignment {id} needs two sides")));
            };
            expect_kind(ast, l, NodeKind::Identifier)?;
            if min_prec > 0 {
                return Err(Error::MalformedTree(format!(
                    "assignment {id} used inside an expression"
                )));
            }
            format!("{} = {}", ast.label(l), expr_text(ast, r, 0)?)
        }
        other => {
            return Err(Error::MalformedTree(format!(
                "{other:?} node {id} is not an expression"
            )))
        }
    };
    Ok(text)
}
