use std::sync::Arc;

use super::lexer::{is_unsupported_keyword, tokenize, Tok, Token};
use super::{Ast, AstError, Node, NodeKind, Span};

/// Parse source text into a tree with byte spans on every node.
///
/// Comments at statement level become `Comment` statements placed before the
/// statement they precede; comments inside expressions are dropped.
pub fn parse(source: &str) -> Result<Ast, AstError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let statements = p.statement_list(None)?;
    let mut root = Node::program(Vec::new());
    root.children = statements.into_iter().map(Arc::new).collect();
    root.span = Some(Span::new(0, source.len()));
    Ok(Ast::new(root))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" | "??" => 3,
        "&&" => 4,
        "==" | "!=" | "===" | "!==" => 5,
        "<" | ">" | "<=" | ">=" => 6,
        "+" | "-" => 7,
        "*" | "/" | "%" => 8,
        _ => return None,
    })
}

impl Parser {
    /// Next token, skipping comments.
    fn peek_index(&self) -> usize {
        let mut i = self.pos;
        while matches!(self.tokens[i].tok, Tok::Comment(_)) {
            i += 1;
        }
        i
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.peek_index()]
    }

    fn peek_nth(&self, n: usize) -> &Token {
        let mut i = self.pos;
        let mut seen = 0;
        loop {
            if !matches!(self.tokens[i].tok, Tok::Comment(_)) {
                if seen == n || self.tokens[i].tok == Tok::Eof {
                    return &self.tokens[i];
                }
                seen += 1;
            }
            i += 1;
        }
    }

    fn next(&mut self) -> Token {
        let i = self.peek_index();
        self.pos = if self.tokens[i].tok == Tok::Eof {
            i
        } else {
            i + 1
        };
        self.tokens[i].clone()
    }

    fn last_end(&self) -> usize {
        self.tokens[..self.pos]
            .iter()
            .rev()
            .find(|t| !matches!(t.tok, Tok::Comment(_)))
            .map(|t| t.end)
            .unwrap_or(0)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek().tok, Tok::Punct(q) if q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, AstError> {
        if self.is_punct(p) {
            Ok(self.next())
        } else {
            Err(self.unexpected(&format!("expected `{p}`")))
        }
    }

    fn lexeme(t: &Token) -> String {
        match &t.tok {
            Tok::Ident(s) | Tok::Number(s) | Tok::Comment(s) => s.clone(),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Keyword(k) | Tok::Punct(k) => k.to_string(),
            Tok::Placeholder(s) => format!("{{{{{s}}}}}"),
            Tok::Eof => "<end of input>".to_string(),
        }
    }

    fn unexpected(&self, message: &str) -> AstError {
        let t = self.peek();
        if let Tok::Ident(word) = &t.tok {
            if is_unsupported_keyword(word) {
                return self.unsupported(t, word);
            }
        }
        if let Tok::Punct(p) = t.tok {
            if matches!(
                p,
                "`" | "..." | "?." | "++" | "--" | "**" | "**=" | "@" | "#" | "&" | "|" | "^" | "~"
            ) {
                return self.unsupported(t, p);
            }
        }
        AstError::Syntax {
            line: t.line,
            column: t.column,
            lexeme: Self::lexeme(t),
            message: message.to_string(),
        }
    }

    fn unsupported(&self, t: &Token, construct: &str) -> AstError {
        AstError::UnsupportedConstruct {
            line: t.line,
            column: t.column,
            construct: construct.to_string(),
        }
    }

    fn finish(&self, mut node: Node, start: usize) -> Node {
        node.span = Some(Span::new(start, self.last_end()));
        node
    }

    fn statement_list(&mut self, close: Option<&str>) -> Result<Vec<Node>, AstError> {
        let mut out = Vec::new();
        loop {
            let raw = &self.tokens[self.pos];
            if let Tok::Comment(text) = &raw.tok {
                let mut node = Node::comment(text.clone());
                node.span = Some(Span::new(raw.start, raw.end));
                out.push(node);
                self.pos += 1;
                continue;
            }
            match (&raw.tok, close) {
                (Tok::Eof, None) => return Ok(out),
                (Tok::Eof, Some(c)) => return Err(self.unexpected(&format!("expected `{c}`"))),
                (Tok::Punct(p), Some(c)) if *p == c => return Ok(out),
                _ => {}
            }
            if self.eat_punct(";") {
                continue;
            }
            out.push(self.statement()?);
        }
    }

    fn statement(&mut self) -> Result<Node, AstError> {
        let start = self.peek().start;
        match self.peek().tok.clone() {
            Tok::Keyword(kw @ ("const" | "let" | "var")) => {
                self.next();
                let name_tok = self.next();
                let name = match &name_tok.tok {
                    Tok::Ident(n) => {
                        let mut id = Node::ident(n.clone());
                        id.span = Some(Span::new(name_tok.start, name_tok.end));
                        id
                    }
                    Tok::Punct("{" | "[") => {
                        return Err(self.unsupported(&name_tok, "destructuring declaration"))
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("expected a variable name"));
                    }
                };
                let mut children = vec![name];
                if self.eat_punct("=") {
                    children.push(self.expression()?);
                }
                if self.is_punct(",") {
                    let t = self.peek().clone();
                    return Err(self.unsupported(&t, "multiple declarators"));
                }
                self.end_statement()?;
                Ok(self.finish(
                    Node::new(
                        NodeKind::VariableDeclaration,
                        Some(kw.to_string()),
                        children,
                    ),
                    start,
                ))
            }
            Tok::Keyword("return") => {
                let ret = self.next();
                let mut children = Vec::new();
                let t = self.peek();
                let ends = matches!(t.tok, Tok::Punct(";" | "}") | Tok::Eof)
                    || (t.newline_before && t.start > ret.end);
                if !ends {
                    children.push(self.expression()?);
                }
                self.end_statement()?;
                Ok(self.finish(Node::new(NodeKind::ReturnStatement, None, children), start))
            }
            Tok::Keyword("function") => {
                let f = self.function_expression()?;
                self.eat_punct(";");
                Ok(self.finish(Node::expression_statement(f), start))
            }
            Tok::Punct("{") => {
                let t = self.peek().clone();
                Err(self.unsupported(&t, "block statement"))
            }
            _ => {
                let expr = self.expression()?;
                self.end_statement()?;
                Ok(self.finish(Node::expression_statement(expr), start))
            }
        }
    }

    /// `;`, or a line break / closing brace / end of input.
    fn end_statement(&mut self) -> Result<(), AstError> {
        if self.eat_punct(";") {
            return Ok(());
        }
        let t = self.peek();
        if t.newline_before || matches!(t.tok, Tok::Punct("}") | Tok::Eof) {
            Ok(())
        } else {
            Err(self.unexpected("expected `;`"))
        }
    }

    fn expression(&mut self) -> Result<Node, AstError> {
        self.assignment()
    }

    fn assignment(&mut self) -> Result<Node, AstError> {
        if let Some(f) = self.try_arrow()? {
            return Ok(f);
        }
        let start = self.peek().start;
        let target = self.conditional()?;
        if let Tok::Punct(op) = self.peek().tok {
            if ASSIGN_OPS.contains(&op) {
                if !matches!(
                    target.kind,
                    NodeKind::Identifier | NodeKind::MemberExpression | NodeKind::IndexExpression
                ) {
                    return Err(self.unexpected("invalid assignment target"));
                }
                self.next();
                let value = self.assignment()?;
                let node = Node::new(
                    NodeKind::AssignmentExpression,
                    Some(op.to_string()),
                    vec![target, value],
                );
                return Ok(self.finish(node, start));
            }
        }
        Ok(target)
    }

    fn conditional(&mut self) -> Result<Node, AstError> {
        let start = self.peek().start;
        let test = self.binary(3)?;
        if self.eat_punct("?") {
            let yes = self.assignment()?;
            self.expect_punct(":")?;
            let no = self.assignment()?;
            let node = Node::new(NodeKind::ConditionalExpression, None, vec![test, yes, no]);
            return Ok(self.finish(node, start));
        }
        Ok(test)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Node, AstError> {
        let start = self.peek().start;
        let mut left = self.unary()?;
        while let Tok::Punct(op) = self.peek().tok {
            let Some(prec) = binary_precedence(op) else {
                break;
            };
            if prec < min_prec {
                break;
            }
            self.next();
            let right = self.binary(prec + 1)?;
            let node = Node::new(
                NodeKind::BinaryExpression,
                Some(op.to_string()),
                vec![left, right],
            );
            left = self.finish(node, start);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Node, AstError> {
        let start = self.peek().start;
        let op = match self.peek().tok {
            Tok::Punct(op @ ("!" | "-" | "+")) => Some(op),
            Tok::Keyword("typeof") => Some("typeof"),
            _ => None,
        };
        if let Some(op) = op {
            self.next();
            let arg = self.unary()?;
            let node = Node::new(NodeKind::UnaryExpression, Some(op.to_string()), vec![arg]);
            return Ok(self.finish(node, start));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Node, AstError> {
        let start = self.peek().start;
        let mut node = self.primary()?;
        loop {
            if self.eat_punct(".") {
                let t = self.next();
                let mut prop = match &t.tok {
                    Tok::Ident(n) => Node::ident(n.clone()),
                    Tok::Keyword(k) => Node::ident(*k),
                    Tok::Placeholder(n) => Node::placeholder(n.clone()),
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("expected a property name"));
                    }
                };
                prop.span = Some(Span::new(t.start, t.end));
                node = self.finish(
                    Node::new(NodeKind::MemberExpression, None, vec![node, prop]),
                    start,
                );
            } else if self.is_punct("[") && !self.peek().newline_before {
                self.next();
                let index = self.expression()?;
                self.expect_punct("]")?;
                node = self.finish(
                    Node::new(NodeKind::IndexExpression, None, vec![node, index]),
                    start,
                );
            } else if self.is_punct("(") && !self.peek().newline_before {
                self.next();
                let mut children = vec![node];
                children.extend(self.comma_list(")")?);
                node = self.finish(Node::new(NodeKind::CallExpression, None, children), start);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn comma_list(&mut self, close: &str) -> Result<Vec<Node>, AstError> {
        let mut items = Vec::new();
        while !self.is_punct(close) {
            items.push(self.expression()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(close)?;
        Ok(items)
    }

    fn primary(&mut self) -> Result<Node, AstError> {
        let t = self.peek().clone();
        let node = match &t.tok {
            Tok::Ident(name) => {
                if is_unsupported_keyword(name) {
                    return Err(self.unsupported(&t, name));
                }
                self.next();
                Node::ident(name.clone())
            }
            Tok::Keyword(kw @ ("this" | "undefined")) => {
                self.next();
                Node::ident(*kw)
            }
            Tok::Keyword(kw @ ("true" | "false")) => {
                self.next();
                Node::leaf(NodeKind::BooleanLiteral, *kw)
            }
            Tok::Keyword("null") => {
                self.next();
                Node::leaf(NodeKind::NullLiteral, "null")
            }
            Tok::Keyword("function") => return self.function_expression(),
            Tok::Number(n) => {
                self.next();
                Node::number(n.clone())
            }
            Tok::Str(s) => {
                self.next();
                Node::string(s.clone())
            }
            Tok::Placeholder(name) => {
                self.next();
                Node::placeholder(name.clone())
            }
            Tok::Punct("(") => {
                self.next();
                let inner = self.expression()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            Tok::Punct("[") => {
                self.next();
                let items = self.comma_list("]")?;
                Node::new(NodeKind::ArrayLiteral, None, items)
            }
            Tok::Punct("{") => {
                self.next();
                self.object_body()?
            }
            _ => return Err(self.unexpected("expected an expression")),
        };
        Ok(self.finish(node, t.start))
    }

    fn object_body(&mut self) -> Result<Node, AstError> {
        let mut props = Vec::new();
        while !self.is_punct("}") {
            let kt = self.next();
            let key = match &kt.tok {
                Tok::Ident(k) | Tok::Str(k) | Tok::Number(k) => k.clone(),
                Tok::Keyword(k) => k.to_string(),
                Tok::Punct("...") => return Err(self.unsupported(&kt, "...")),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("expected a property key"));
                }
            };
            if !self.is_punct(":") {
                return Err(self.unsupported(&kt, "shorthand property"));
            }
            self.next();
            let value = self.expression()?;
            let prop = Node::new(NodeKind::Property, Some(key), vec![value]);
            props.push(self.finish(prop, kt.start));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(Node::new(NodeKind::ObjectLiteral, None, props))
    }

    fn params(&mut self) -> Result<Vec<Node>, AstError> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.is_punct(")") {
            let t = self.next();
            match &t.tok {
                Tok::Ident(n) => {
                    let mut id = Node::ident(n.clone());
                    id.span = Some(Span::new(t.start, t.end));
                    params.push(id);
                }
                _ => return Err(self.unsupported(&t, "non-identifier parameter")),
            }
            if self.is_punct("=") {
                let t = self.peek().clone();
                return Err(self.unsupported(&t, "default parameter"));
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(params)
    }

    fn block(&mut self) -> Result<Node, AstError> {
        let open = self.expect_punct("{")?;
        let statements = self.statement_list(Some("}"))?;
        self.expect_punct("}")?;
        let mut block = Node::new(NodeKind::Block, None, statements);
        block.span = Some(Span::new(open.start, self.last_end()));
        Ok(block)
    }

    fn function_expression(&mut self) -> Result<Node, AstError> {
        let kw = self.next();
        let name = match &self.peek().tok {
            Tok::Ident(n) => {
                let n = n.clone();
                self.next();
                Some(n)
            }
            _ => None,
        };
        if self.is_punct("*") {
            let t = self.peek().clone();
            return Err(self.unsupported(&t, "generator"));
        }
        let mut children = self.params()?;
        children.push(self.block()?);
        Ok(self.finish(
            Node::new(NodeKind::FunctionExpression, name, children),
            kw.start,
        ))
    }

    /// Arrow functions need lookahead: `x =>` or `( ... ) =>`.
    fn try_arrow(&mut self) -> Result<Option<Node>, AstError> {
        let start = self.peek().start;
        let params = match self.peek().tok.clone() {
            Tok::Ident(name) if matches!(self.peek_nth(1).tok, Tok::Punct("=>")) => {
                let t = self.next();
                let mut id = Node::ident(name);
                id.span = Some(Span::new(t.start, t.end));
                vec![id]
            }
            Tok::Punct("(") if self.paren_followed_by_arrow() => self.params()?,
            _ => return Ok(None),
        };
        self.expect_punct("=>")?;
        let body = if self.is_punct("{") {
            self.block()?
        } else {
            self.assignment()?
        };
        let mut children = params;
        children.push(body);
        Ok(Some(self.finish(
            Node::new(NodeKind::ArrowFunction, None, children),
            start,
        )))
    }

    fn paren_followed_by_arrow(&self) -> bool {
        let mut depth = 0usize;
        let mut n = 0;
        loop {
            let t = self.peek_nth(n);
            match t.tok {
                Tok::Punct("(" | "[" | "{") => depth += 1,
                Tok::Punct(")" | "]" | "}") => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return matches!(self.peek_nth(n + 1).tok, Tok::Punct("=>"));
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            n += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stmt(src: &str) -> Node {
        let ast = parse(src).unwrap();
        ast.root.children[0].as_ref().clone()
    }

    #[test]
    fn minimal_declaration() {
        let ast = parse("const w = 450;").unwrap();
        let expected = Node::program(vec![Node::new(
            NodeKind::VariableDeclaration,
            Some("const".into()),
            vec![Node::ident("w"), Node::number("450")],
        )]);
        assert_eq!(*ast.root, expected);
    }

    #[test]
    fn invalid_token_column() {
        match parse("const x = ???;").unwrap_err() {
            AstError::Syntax {
                line,
                column,
                lexeme,
                ..
            } => {
                assert_eq!((line, column), (1, 11));
                assert_eq!(lexeme, "??");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "if (a) { b(); }",
            "const p = new Date();",
            "for (;;) {}",
            "const s = `x`;",
            "let a = 1, b = 2;",
        ] {
            assert!(
                matches!(parse(src), Err(AstError::UnsupportedConstruct { .. })),
                "{src}"
            );
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let s = stmt("a - b - c * d;");
        let e = s.child(0).unwrap();
        assert_eq!(e.token(), "-");
        assert_eq!(e.child(0).unwrap().token(), "-");
        assert_eq!(e.child(1).unwrap().token(), "*");
    }

    #[test]
    fn arrow_forms() {
        let s = stmt("f((a, b) => a + b, d => ({ k: d }), () => { return 1; });");
        let call = s.child(0).unwrap();
        let kinds: Vec<_> = call.args().iter().map(|a| a.kind).collect();
        assert_eq!(kinds, vec![NodeKind::ArrowFunction; 3]);
        let (params, body) = call.args()[0].function_parts().unwrap();
        assert_eq!(params.len(), 2);
        assert_eq!(body.kind, NodeKind::BinaryExpression);
        assert_eq!(
            call.args()[1].function_parts().unwrap().1.kind,
            NodeKind::ObjectLiteral
        );
        assert_eq!(
            call.args()[2].function_parts().unwrap().1.kind,
            NodeKind::Block
        );
    }

    #[test]
    fn statement_comments_are_nodes() {
        let ast = parse("// width\nconst w = 1; // trailing\n").unwrap();
        let kinds: Vec<_> = ast.statements().iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            vec![
                NodeKind::Comment,
                NodeKind::VariableDeclaration,
                NodeKind::Comment
            ]
        );
    }

    #[test]
    fn semicolons_optional_at_line_end() {
        let ast = parse("const a = 1\nconst b = a\n  .foo()\nb").unwrap();
        assert_eq!(ast.statements().len(), 3);
        assert!(parse("const a = 1 const b = 2").is_err());
    }

    #[test]
    fn spans_cover_source() {
        let src = "const w = 450;";
        let ast = parse(src).unwrap();
        let decl = &ast.statements()[0];
        assert_eq!(decl.span, Some(Span::new(0, src.len())));
        let num = decl.child(1).unwrap();
        assert_eq!(&src[num.span.unwrap().start..num.span.unwrap().end], "450");
    }
}
