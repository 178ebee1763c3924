//! Recursive-descent parser for MiniJ.
//!
//! ```text
//! method  := type IDENT '(' [param {',' param}] ')' block
//! param   := type IDENT
//! block   := '{' {stmt} '}'
//! stmt    := 'if' '(' expr ')' body ['else' (if | body)]
//!          | 'return' [expr] ';'
//!          | type IDENT ['=' expr] ';'
//!          | expr ['=' expr] ';'
//! body    := block | stmt                      (normalized to a block)
//! expr    := or ; or := and {'||' and} ; and := eq {'&&' eq}
//! eq      := rel {('=='|'!=') rel} ; rel := add {('<'|'>') add}
//! add     := postfix {('+'|'-') postfix}
//! postfix := primary {'.' IDENT ['(' args ')']}
//! primary := IDENT ['(' args ')'] | literal | '(' expr ')'
//! ```

use super::ast::{Ast, AstNode, LiteralKind, NodeId, NodeKind, Span};
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Result};

const KEYWORDS: &[&str] = &["if", "else", "return", "true", "false", "null"];

/// Parses a source file holding exactly one method.
pub fn parse_method(source: &str) -> Result<Ast> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        nodes: Vec::new(),
    };
    let root = p.method()?;
    if !p.at_eof() {
        // count how many further methods follow, for a precise error
        let mut count = 1;
        while !p.at_eof() {
            p.method()?;
            count += 1;
        }
        return Err(Error::MultipleMethods(count));
    }
    Ok(Ast::from_nodes(p.nodes, root))
}

/// Parses a single statement inside a synthetic method `void __stmt() { ... }`.
pub fn parse_statement(source: &str) -> Result<(Ast, NodeId)> {
    let ast = parse_method(&format!("void __stmt() {{ {source} }}"))?;
    let body = *ast
        .children(ast.root())
        .last()
        .ok_or_else(|| Error::MalformedTree("missing body".into()))?;
    let stmt = *ast.children(body).first().ok_or_else(|| Error::Syntax {
        line: 1,
        column: 1,
        message: "expected a statement".into(),
    })?;
    Ok((ast, stmt))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nodes: Vec<AstNode>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek().kind, TokenKind::Sym(x) if x == s)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected `{s}`, found {}", describe(&self.peek().kind))))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Token)> {
        match &self.peek().kind {
            TokenKind::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                Ok((name, self.bump()))
            }
            other => Err(self.error_here(format!("expected {what}, found {}", describe(other)))),
        }
    }

    fn span_from(&self, start: &Token) -> Span {
        let end = if self.pos == 0 {
            start.end
        } else {
            self.tokens[self.pos - 1].end.max(start.end)
        };
        Span {
            start: start.start,
            end,
            line: start.line,
            column: start.column,
        }
    }

    fn new_node(&mut self, kind: NodeKind, label: impl Into<String>, span: Span) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(AstNode {
            id,
            kind,
            label: label.into(),
            children: Vec::new(),
            parent: None,
            span,
            literal: None,
            has_receiver: false,
        });
        id
    }

    fn adopt(&mut self, parent: NodeId, child: NodeId) {
        self.nodes[child].parent = Some(parent);
        self.nodes[parent].children.push(child);
    }

    fn type_name(&mut self) -> Result<NodeId> {
        let (name, tok) = self.expect_ident("a type name")?;
        let span = self.span_from(&tok);
        Ok(self.new_node(NodeKind::TypeName, name, span))
    }

    fn method(&mut self) -> Result<NodeId> {
        let start = self.peek().clone();
        let ret = self.type_name()?;
        let (name, _) = self.expect_ident("a method name")?;
        let decl = self.new_node(NodeKind::MethodDecl, name, Span::default());
        self.adopt(decl, ret);
        self.expect_sym("(")?;
        if !self.is_sym(")") {
            loop {
                let pstart = self.peek().clone();
                let ty = self.type_name()?;
                let (pname, _) = self.expect_ident("a parameter name")?;
                let span = self.span_from(&pstart);
                let param = self.new_node(NodeKind::Param, pname, span);
                self.adopt(param, ty);
                self.adopt(decl, param);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let body = self.block()?;
        self.adopt(decl, body);
        self.nodes[decl].span = self.span_from(&start);
        Ok(decl)
    }

    fn block(&mut self) -> Result<NodeId> {
        let start = self.expect_sym("{")?;
        let block = self.new_node(NodeKind::Block, "", Span::default());
        while !self.is_sym("}") {
            if self.at_eof() {
                return Err(self.error_here("unexpected end of input, expected `}`"));
            }
            let s = self.statement()?;
            self.adopt(block, s);
        }
        self.bump();
        self.nodes[block].span = self.span_from(&start);
        Ok(block)
    }

    /// Either a braced block or a single statement wrapped into a block.
    fn body(&mut self) -> Result<NodeId> {
        if self.is_sym("{") {
            return self.block();
        }
        let start = self.peek().clone();
        if self.is_sym("}") || self.at_eof() {
            return Err(self.error_here("expected a statement"));
        }
        let stmt = self.statement()?;
        let span = self.span_from(&start);
        let block = self.new_node(NodeKind::Block, "", span);
        self.adopt(block, stmt);
        Ok(block)
    }

    fn statement(&mut self) -> Result<NodeId> {
        let start = self.peek().clone();
        if self.is_keyword("if") {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let then_block = self.body()?;
            let node = self.new_node(NodeKind::IfStmt, "if", Span::default());
            self.adopt(node, cond);
            self.adopt(node, then_block);
            if self.is_keyword("else") {
                self.bump();
                let else_block = self.body()?;
                self.adopt(node, else_block);
            }
            self.nodes[node].span = self.span_from(&start);
            return Ok(node);
        }
        if self.is_keyword("return") {
            self.bump();
            let node = self.new_node(NodeKind::ReturnStmt, "return", Span::default());
            if !self.is_sym(";") {
                let e = self.expr()?;
                self.adopt(node, e);
            }
            self.expect_sym(";")?;
            self.nodes[node].span = self.span_from(&start);
            return Ok(node);
        }
        if self.is_keyword("else") {
            return Err(self.error_here("`else` without `if`"));
        }
        if self.is_sym("{") {
            return Err(self.error_here("nested blocks are not supported"));
        }
        // `Type name ...` starts a declaration
        let is_decl = matches!(&self.peek().kind, TokenKind::Ident(a) if !KEYWORDS.contains(&a.as_str()))
            && matches!(&self.peek_at(1).kind, TokenKind::Ident(b) if !KEYWORDS.contains(&b.as_str()));
        if is_decl {
            let ty = self.type_name()?;
            let fstart = self.peek().clone();
            let (name, _) = self.expect_ident("a variable name")?;
            let frag = self.new_node(NodeKind::VarDeclFragment, name, Span::default());
            if self.eat_sym("=") {
                let init = self.expr()?;
                self.adopt(frag, init);
            }
            self.nodes[frag].span = self.span_from(&fstart);
            self.expect_sym(";")?;
            let node = self.new_node(NodeKind::VarDeclStmt, "", self.span_from(&start));
            self.adopt(node, ty);
            self.adopt(node, frag);
            return Ok(node);
        }
        let lhs = self.expr()?;
        let expr = if self.is_sym("=") {
            if self.nodes[lhs].kind != NodeKind::Identifier {
                return Err(self.error_here("left side of `=` must be a variable"));
            }
            self.bump();
            let rhs = self.expr()?;
            let node = self.new_node(NodeKind::Assign, "=", self.span_from(&start));
            self.adopt(node, lhs);
            self.adopt(node, rhs);
            node
        } else {
            lhs
        };
        self.expect_sym(";")?;
        let node = self.new_node(NodeKind::ExprStmt, "", self.span_from(&start));
        self.adopt(node, expr);
        Ok(node)
    }

    fn expr(&mut self) -> Result<NodeId> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<NodeId> {
        const LEVELS: &[&[&str]] = &[&["||"], &["&&"], &["==", "!="], &["<", ">"], &["+", "-"]];
        if level == LEVELS.len() {
            return self.postfix();
        }
        let start = self.peek().clone();
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = LEVELS[level].iter().find(|op| self.is_sym(op)).copied();
            let Some(op) = op else { break };
            self.bump();
            let rhs = self.binary(level + 1)?;
            let node = self.new_node(NodeKind::BinaryOp, op, Span::default());
            self.adopt(node, lhs);
            self.adopt(node, rhs);
            self.nodes[node].span = self.span_from(&start);
            lhs = node;
        }
        Ok(lhs)
    }

    fn args(&mut self, call: NodeId) -> Result<()> {
        self.expect_sym("(")?;
        if !self.is_sym(")") {
            loop {
                let a = self.expr()?;
                self.adopt(call, a);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(())
    }

    fn postfix(&mut self) -> Result<NodeId> {
        let start = self.peek().clone();
        let mut e = self.primary()?;
        while self.eat_sym(".") {
            let (name, _) = self.expect_ident("a member name")?;
            if self.is_sym("(") {
                let call = self.new_node(NodeKind::MethodInvocation, name, Span::default());
                self.nodes[call].has_receiver = true;
                self.adopt(call, e);
                self.args(call)?;
                self.nodes[call].span = self.span_from(&start);
                e = call;
            } else {
                let fa = self.new_node(NodeKind::FieldAccess, name, Span::default());
                self.adopt(fa, e);
                self.nodes[fa].span = self.span_from(&start);
                e = fa;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<NodeId> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(text) => {
                let text = text.clone();
                self.bump();
                Ok(self.literal(text, LiteralKind::Number, &tok))
            }
            TokenKind::Str(text) => {
                let text = text.clone();
                self.bump();
                Ok(self.literal(text, LiteralKind::String, &tok))
            }
            TokenKind::Ident(word) if word == "true" || word == "false" => {
                let text = word.clone();
                self.bump();
                Ok(self.literal(text, LiteralKind::Boolean, &tok))
            }
            TokenKind::Ident(word) if word == "null" => {
                self.bump();
                Ok(self.literal("null".into(), LiteralKind::Null, &tok))
            }
            TokenKind::Ident(word) if !KEYWORDS.contains(&word.as_str()) => {
                let name = word.clone();
                self.bump();
                if self.is_sym("(") {
                    let call = self.new_node(NodeKind::MethodInvocation, name, Span::default());
                    self.args(call)?;
                    self.nodes[call].span = self.span_from(&tok);
                    Ok(call)
                } else {
                    let span = self.span_from(&tok);
                    Ok(self.new_node(NodeKind::Identifier, name, span))
                }
            }
            TokenKind::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            other => Err(self.error_here(format!("expected an expression, found {}", describe(other)))),
        }
    }

    fn literal(&mut self, text: String, kind: LiteralKind, tok: &Token) -> NodeId {
        let span = self.span_from(tok);
        let id = self.new_node(NodeKind::Literal, text, span);
        self.nodes[id].literal = Some(kind);
        id
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Ident(s) | TokenKind::Number(s) | TokenKind::Str(s) => format!("`{s}`"),
        TokenKind::Sym(s) => format!("`{s}`"),
        TokenKind::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds_under(ast: &Ast, id: NodeId) -> Vec<NodeKind> {
        ast.children(id).iter().map(|&c| ast.kind(c)).collect()
    }

    #[test]
    fn nested_invocation_in_declaration() {
        let ast =
            parse_method("void m(App app) { License li = app.getLicense(Env.getDefault()); }")
                .unwrap();
        let body = *ast.children(ast.root()).last().unwrap();
        let decl = ast.children(body)[0];
        assert_eq!(ast.kind(decl), NodeKind::VarDeclStmt);
        let frag = ast.children(decl)[1];
        assert_eq!(ast.kind(frag), NodeKind::VarDeclFragment);
        assert_eq!(ast.label(frag), "li");
        let call = ast.children(frag)[0];
        assert_eq!(ast.kind(call), NodeKind::MethodInvocation);
        assert_eq!(ast.label(call), "getLicense");
        let arg = ast.arguments(call)[0];
        assert_eq!(ast.kind(arg), NodeKind::MethodInvocation);
        assert_eq!(ast.label(arg), "getDefault");
        assert_eq!(ast.label(ast.receiver(arg).unwrap()), "Env");
    }

    #[test]
    fn empty_method() {
        let ast = parse_method("void m() { }").unwrap();
        assert_eq!(ast.kind(ast.root()), NodeKind::MethodDecl);
        assert_eq!(kinds_under(&ast, ast.root()), vec![NodeKind::TypeName, NodeKind::Block]);
        let body = ast.children(ast.root())[1];
        assert!(ast.children(body).is_empty());
    }

    #[test]
    fn missing_if_body_is_a_syntax_error() {
        let err = parse_method("void m() { if (x) }").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (1, 19)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn more_than_one_method() {
        let err = parse_method("void a() { } void b() { }").unwrap_err();
        assert_eq!(err, Error::MultipleMethods(2));
    }

    #[test]
    fn single_statement_bodies_are_normalized() {
        let ast = parse_method("void m(V v) { if (v != null) add(v); else x = 1; }").unwrap();
        let body = *ast.children(ast.root()).last().unwrap();
        let ifs = ast.children(body)[0];
        assert_eq!(
            kinds_under(&ast, ifs),
            vec![NodeKind::BinaryOp, NodeKind::Block, NodeKind::Block]
        );
        let call = ast.children(ast.children(ast.children(ifs)[1])[0])[0];
        assert_eq!(ast.kind(call), NodeKind::MethodInvocation);
        assert!(!ast.node(call).has_receiver);
    }

    #[test]
    fn precedence_and_parentheses() {
        let ast = parse_method("void m() { x = a + b == c && (d || e); }").unwrap();
        let body = *ast.children(ast.root()).last().unwrap();
        let assign = ast.children(ast.children(body)[0])[0];
        let top = ast.children(assign)[1];
        assert_eq!(ast.label(top), "&&");
        let eq = ast.children(top)[0];
        assert_eq!(ast.label(eq), "==");
        assert_eq!(ast.label(ast.children(eq)[0]), "+");
        assert_eq!(ast.label(ast.children(top)[1]), "||");
    }

    #[test]
    fn assignment_target_must_be_identifier() {
        assert!(parse_method("void m() { a.b() = 1; }").is_err());
    }

    #[test]
    fn literal_categories() {
        let ast = parse_method("void m() { f(1, \"s\", true, null); }").unwrap();
        let body = *ast.children(ast.root()).last().unwrap();
        let call = ast.children(ast.children(body)[0])[0];
        let cats: Vec<_> = ast
            .arguments(call)
            .iter()
            .map(|&a| ast.node(a).literal.unwrap())
            .collect();
        assert_eq!(
            cats,
            vec![LiteralKind::Number, LiteralKind::String, LiteralKind::Boolean, LiteralKind::Null]
        );
    }

    #[test]
    fn parent_links_are_consistent() {
        let ast = parse_method(
            "License f(App app) { License l = app.get(); if (l != null) { return l; } return null; }",
        )
        .unwrap();
        ast.validate().unwrap();
        for n in ast.preorder() {
            if n != ast.root() {
                let p = ast.parent(n).unwrap();
                assert!(ast.children(p).contains(&n));
            }
        }
    }
}
