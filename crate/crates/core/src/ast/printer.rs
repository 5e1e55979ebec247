//! Deterministic source printer.
//!
//! Two-space indentation, one statement per line, a blank line before a
//! comment that follows code, and method chains with more than two calls
//! broken one call per line.

use super::{is_identifier_name, Ast, AstError, Node, NodeKind};

const INDENT: &str = "  ";
const MAX_INLINE_CHAIN_CALLS: usize = 2;

#[derive(Debug, Clone, Copy, Default)]
pub struct PrintOptions {
    /// Render placeholders as `{{NAME}}` instead of failing.
    pub allow_placeholders: bool,
}

/// Print a placeholder-free tree.
pub fn print(ast: &Ast) -> Result<String, AstError> {
    print_with(ast, PrintOptions::default())
}

pub fn print_with(ast: &Ast, options: PrintOptions) -> Result<String, AstError> {
    let p = Printer { options };
    if ast.root.kind == NodeKind::Program {
        let body = p.statements(&ast.root.children, 0)?;
        Ok(if body.is_empty() { body } else { body + "\n" })
    } else {
        p.fragment(&ast.root, 0)
    }
}

/// Print a single statement, statement list or expression at `indent`
/// levels. The first line carries no leading indentation.
pub fn print_fragment(
    node: &Node,
    indent: usize,
    options: PrintOptions,
) -> Result<String, AstError> {
    Printer { options }.fragment(node, indent)
}

struct Printer {
    options: PrintOptions,
}

fn precedence(node: &Node) -> u8 {
    match node.kind {
        NodeKind::AssignmentExpression | NodeKind::ArrowFunction | NodeKind::FunctionExpression => {
            1
        }
        NodeKind::ConditionalExpression => 2,
        NodeKind::BinaryExpression => match node.token() {
            "||" | "??" => 3,
            "&&" => 4,
            "==" | "!=" | "===" | "!==" => 5,
            "<" | ">" | "<=" | ">=" => 6,
            "+" | "-" => 7,
            _ => 8,
        },
        NodeKind::UnaryExpression => 9,
        NodeKind::CallExpression | NodeKind::MemberExpression | NodeKind::IndexExpression => 10,
        _ => 11,
    }
}

pub(crate) fn quote(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

enum Link<'a> {
    Member(&'a Node),
    Index(&'a Node),
    Call(&'a [std::sync::Arc<Node>]),
}

impl Printer {
    fn pad(indent: usize) -> String {
        INDENT.repeat(indent)
    }

    fn fragment(&self, node: &Node, indent: usize) -> Result<String, AstError> {
        match node.kind {
            NodeKind::Program | NodeKind::Block => self.statements(&node.children, indent),
            k if k.is_statement() => self.statement(node, indent),
            _ => self.expr(node, indent, 0),
        }
    }

    /// Statements separated by newlines; every line indented.
    fn statements(
        &self,
        stmts: &[std::sync::Arc<Node>],
        indent: usize,
    ) -> Result<String, AstError> {
        let mut out = String::new();
        for (i, s) in stmts.iter().enumerate() {
            if i > 0 {
                out.push('\n');
                if s.kind == NodeKind::Comment && stmts[i - 1].kind != NodeKind::Comment {
                    out.push('\n');
                }
            }
            out.push_str(&Self::pad(indent));
            out.push_str(&self.statement(s, indent)?);
        }
        Ok(out)
    }

    fn statement(&self, node: &Node, indent: usize) -> Result<String, AstError> {
        Ok(match node.kind {
            NodeKind::Comment => node.token().to_string(),
            NodeKind::VariableDeclaration => {
                let name = self.expr(&node.children[0], indent, 11)?;
                match node.child(1) {
                    Some(init) => format!(
                        "{} {} = {};",
                        node.token(),
                        name,
                        self.expr(init, indent, 1)?
                    ),
                    None => format!("{} {};", node.token(), name),
                }
            }
            NodeKind::ReturnStatement => match node.child(0) {
                Some(e) => format!("return {};", self.expr(e, indent, 1)?),
                None => "return;".to_string(),
            },
            NodeKind::ExpressionStatement => {
                let e = &node.children[0];
                if e.kind == NodeKind::FunctionExpression && e.token.is_some() {
                    self.expr(e, indent, 1)?
                } else if e.kind == NodeKind::ObjectLiteral {
                    format!("({});", self.expr(e, indent, 1)?)
                } else {
                    format!("{};", self.expr(e, indent, 1)?)
                }
            }
            _ => format!("{};", self.expr(node, indent, 1)?),
        })
    }

    fn block(&self, node: &Node, indent: usize) -> Result<String, AstError> {
        if node.children.is_empty() {
            return Ok("{}".to_string());
        }
        Ok(format!(
            "{{\n{}\n{}}}",
            self.statements(&node.children, indent + 1)?,
            Self::pad(indent)
        ))
    }

    /// Print `node`, parenthesized when its precedence is below `min_prec`.
    fn expr(&self, node: &Node, indent: usize, min_prec: u8) -> Result<String, AstError> {
        let text = self.expr_inner(node, indent)?;
        Ok(if precedence(node) < min_prec {
            format!("({text})")
        } else {
            text
        })
    }

    fn expr_inner(&self, node: &Node, indent: usize) -> Result<String, AstError> {
        Ok(match node.kind {
            NodeKind::Identifier
            | NodeKind::NumberLiteral
            | NodeKind::BooleanLiteral
            | NodeKind::NullLiteral => node.token().to_string(),
            NodeKind::StringLiteral => quote(node.token()),
            NodeKind::Placeholder => {
                if self.options.allow_placeholders {
                    format!("{{{{{}}}}}", node.token())
                } else {
                    return Err(AstError::PlaceholderRemaining(node.token().to_string()));
                }
            }
            NodeKind::CallExpression | NodeKind::MemberExpression | NodeKind::IndexExpression => {
                self.chain(node, indent)?
            }
            NodeKind::ArrowFunction => {
                let (params, body) = node.function_parts().expect("arrow has a body");
                let params_text = self.params(params, indent)?;
                let head = if params.len() == 1 {
                    params_text
                } else {
                    format!("({params_text})")
                };
                let body_text = match body.kind {
                    NodeKind::Block => self.block(body, indent)?,
                    NodeKind::ObjectLiteral => format!("({})", self.expr(body, indent, 1)?),
                    _ => self.expr(body, indent, 1)?,
                };
                format!("{head} => {body_text}")
            }
            NodeKind::FunctionExpression => {
                let (params, body) = node.function_parts().expect("function has a body");
                let name = node
                    .token
                    .as_deref()
                    .map(|n| format!(" {n}"))
                    .unwrap_or_default();
                format!(
                    "function{}({}) {}",
                    name,
                    self.params(params, indent)?,
                    self.block(body, indent)?
                )
            }
            NodeKind::ObjectLiteral => {
                if node.children.is_empty() {
                    "{}".to_string()
                } else {
                    let props = node
                        .children
                        .iter()
                        .map(|p| {
                            let key = p.token();
                            let key = if is_identifier_name(key)
                                || (!key.is_empty() && key.chars().all(|c| c.is_ascii_digit()))
                            {
                                key.to_string()
                            } else {
                                quote(key)
                            };
                            Ok(format!(
                                "{}: {}",
                                key,
                                self.expr(&p.children[0], indent, 1)?
                            ))
                        })
                        .collect::<Result<Vec<_>, AstError>>()?;
                    format!("{{ {} }}", props.join(", "))
                }
            }
            NodeKind::ArrayLiteral => format!("[{}]", self.args(&node.children, indent)?),
            NodeKind::BinaryExpression => {
                let p = precedence(node);
                format!(
                    "{} {} {}",
                    self.expr(&node.children[0], indent, p)?,
                    node.token(),
                    self.expr(&node.children[1], indent, p + 1)?
                )
            }
            NodeKind::UnaryExpression => {
                let op = node.token();
                let arg = &node.children[0];
                let clash = arg.kind == NodeKind::UnaryExpression
                    && (arg.token() == op
                        || (op == "-" || op == "+") && arg.token().starts_with(op));
                let arg_text = if clash {
                    format!("({})", self.expr(arg, indent, 0)?)
                } else {
                    self.expr(arg, indent, 9)?
                };
                if op == "typeof" {
                    format!("typeof {arg_text}")
                } else {
                    format!("{op}{arg_text}")
                }
            }
            NodeKind::AssignmentExpression => format!(
                "{} {} {}",
                self.expr(&node.children[0], indent, 10)?,
                node.token(),
                self.expr(&node.children[1], indent, 1)?
            ),
            NodeKind::ConditionalExpression => format!(
                "{} ? {} : {}",
                self.expr(&node.children[0], indent, 3)?,
                self.expr(&node.children[1], indent, 1)?,
                self.expr(&node.children[2], indent, 1)?
            ),
            NodeKind::Property => format!(
                "{}: {}",
                node.token(),
                self.expr(&node.children[0], indent, 1)?
            ),
            NodeKind::Program | NodeKind::Block => self.block(node, indent)?,
            NodeKind::VariableDeclaration
            | NodeKind::ExpressionStatement
            | NodeKind::ReturnStatement
            | NodeKind::Comment => self.statement(node, indent)?,
        })
    }

    fn params(&self, params: &[std::sync::Arc<Node>], indent: usize) -> Result<String, AstError> {
        self.args(params, indent)
    }

    fn args(&self, items: &[std::sync::Arc<Node>], indent: usize) -> Result<String, AstError> {
        Ok(items
            .iter()
            .map(|a| self.expr(a, indent, 1))
            .collect::<Result<Vec<_>, _>>()?
            .join(", "))
    }

    fn chain(&self, node: &Node, indent: usize) -> Result<String, AstError> {
        let mut links = Vec::new();
        let mut cur = node;
        loop {
            match cur.kind {
                NodeKind::CallExpression => {
                    links.push(Link::Call(&cur.children[1..]));
                    cur = &cur.children[0];
                }
                NodeKind::MemberExpression => {
                    links.push(Link::Member(&cur.children[1]));
                    cur = &cur.children[0];
                }
                NodeKind::IndexExpression => {
                    links.push(Link::Index(&cur.children[1]));
                    cur = &cur.children[0];
                }
                _ => break,
            }
        }
        links.reverse();

        let method_calls = links
            .windows(2)
            .filter(|w| matches!((&w[0], &w[1]), (Link::Member(_), Link::Call(_))))
            .count();
        let broken = method_calls > MAX_INLINE_CHAIN_CALLS;

        let mut out = if cur.kind == NodeKind::NumberLiteral {
            format!("({})", cur.token())
        } else {
            self.expr(cur, indent, 10)?
        };
        let mut seen_method = false;
        let mut line_indent = indent;
        for (i, link) in links.iter().enumerate() {
            match link {
                Link::Member(prop) => {
                    let starts_method = matches!(links.get(i + 1), Some(Link::Call(_)));
                    if starts_method {
                        if broken && seen_method {
                            line_indent = indent + 1;
                            out.push('\n');
                            out.push_str(&Self::pad(line_indent));
                        }
                        seen_method = true;
                    }
                    out.push('.');
                    out.push_str(&self.expr(prop, line_indent, 11)?);
                }
                Link::Index(idx) => {
                    out.push('[');
                    out.push_str(&self.expr(idx, line_indent, 1)?);
                    out.push(']');
                }
                Link::Call(args) => {
                    out.push('(');
                    out.push_str(&self.args(args, line_indent)?);
                    out.push(')');
                }
            }
        }
        Ok(out)
    }
}
