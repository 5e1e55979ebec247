//! Syntax tree for the scripting subset used by visualization templates and
//! user programs.
//!
//! Trees are immutable and share structure through [`Arc`], so a rewrite only
//! copies the path from the root to the edited node. Parsed nodes carry the
//! byte range they were read from; nodes created by rewriting carry none.
//!
//! The supported grammar is documented in `docs/grammar.md` at the repository
//! root.

mod lexer;
mod parser;
mod pattern;
mod printer;
mod rewrite;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parser::parse;
pub use pattern::{ArgConstraint, CallStep, LiteralValue, MatchScope, NodePattern};
pub use printer::{print, print_fragment, print_with, PrintOptions};
pub use rewrite::{rewrite, substitute, InsertMode};

/// Byte range into the source text a node was parsed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Program,
    VariableDeclaration,
    ExpressionStatement,
    ReturnStatement,
    Block,
    Comment,
    CallExpression,
    /// `object.property`; children are `[object, property]` where the
    /// property is an `Identifier` or a `Placeholder`.
    MemberExpression,
    /// `object[index]`.
    IndexExpression,
    Identifier,
    StringLiteral,
    NumberLiteral,
    BooleanLiteral,
    NullLiteral,
    /// Children are the parameters followed by the body.
    ArrowFunction,
    /// Token holds the optional name; children are parameters then a `Block`.
    FunctionExpression,
    ObjectLiteral,
    /// Token is the key; the single child is the value.
    Property,
    ArrayLiteral,
    BinaryExpression,
    UnaryExpression,
    AssignmentExpression,
    ConditionalExpression,
    /// Named template slot, written `{{NAME}}` in template sources.
    Placeholder,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::VariableDeclaration
                | NodeKind::ExpressionStatement
                | NodeKind::ReturnStatement
                | NodeKind::Comment
        )
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub token: Option<String>,
    pub children: Vec<Arc<Node>>,
    pub span: Option<Span>,
}

/// Structural equality: kind, token and children. Spans are ignored.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.token == other.token
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| Arc::ptr_eq(a, b) || a == b)
    }
}

impl Eq for Node {}

impl Node {
    pub fn new(kind: NodeKind, token: Option<String>, children: Vec<Node>) -> Self {
        Node {
            kind,
            token,
            children: children.into_iter().map(Arc::new).collect(),
            span: None,
        }
    }

    pub fn leaf(kind: NodeKind, token: impl Into<String>) -> Self {
        Node::new(kind, Some(token.into()), Vec::new())
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Node::leaf(NodeKind::Identifier, name)
    }

    pub fn string(value: impl Into<String>) -> Self {
        Node::leaf(NodeKind::StringLiteral, value)
    }

    pub fn number(lexeme: impl Into<String>) -> Self {
        Node::leaf(NodeKind::NumberLiteral, lexeme)
    }

    pub fn placeholder(slot: impl Into<String>) -> Self {
        Node::leaf(NodeKind::Placeholder, slot)
    }

    pub fn comment(text: impl Into<String>) -> Self {
        Node::leaf(NodeKind::Comment, text)
    }

    pub fn member(object: Node, property: impl Into<String>) -> Self {
        Node::new(
            NodeKind::MemberExpression,
            None,
            vec![object, Node::ident(property)],
        )
    }

    pub fn call(callee: Node, args: Vec<Node>) -> Self {
        let mut children = vec![callee];
        children.extend(args);
        Node::new(NodeKind::CallExpression, None, children)
    }

    /// `object.method(args...)`
    pub fn method_call(object: Node, method: &str, args: Vec<Node>) -> Self {
        Node::call(Node::member(object, method), args)
    }

    pub fn program(statements: Vec<Node>) -> Self {
        Node::new(NodeKind::Program, None, statements)
    }

    pub fn expression_statement(expr: Node) -> Self {
        Node::new(NodeKind::ExpressionStatement, None, vec![expr])
    }

    pub fn token(&self) -> &str {
        self.token.as_deref().unwrap_or("")
    }

    pub fn child(&self, index: usize) -> Option<&Node> {
        self.children.get(index).map(|c| c.as_ref())
    }

    /// Callee of a call, object of a member or index access.
    pub fn head(&self) -> Option<&Node> {
        match self.kind {
            NodeKind::CallExpression | NodeKind::MemberExpression | NodeKind::IndexExpression => {
                self.child(0)
            }
            _ => None,
        }
    }

    /// Method name of `x.name(...)` calls.
    pub fn method_name(&self) -> Option<&str> {
        if self.kind != NodeKind::CallExpression {
            return None;
        }
        let callee = self.child(0)?;
        if callee.kind != NodeKind::MemberExpression {
            return None;
        }
        let prop = callee.child(1)?;
        (prop.kind == NodeKind::Identifier).then(|| prop.token())
    }

    /// Arguments of a call expression.
    pub fn args(&self) -> &[Arc<Node>] {
        if self.kind == NodeKind::CallExpression {
            &self.children[1..]
        } else {
            &[]
        }
    }

    /// Parameters and body of a function node.
    pub fn function_parts(&self) -> Option<(&[Arc<Node>], &Node)> {
        match self.kind {
            NodeKind::ArrowFunction | NodeKind::FunctionExpression => {
                let (body, params) = self.children.split_last()?;
                Some((params, body))
            }
            _ => None,
        }
    }

    pub fn without_spans(&self) -> Node {
        Node {
            kind: self.kind,
            token: self.token.clone(),
            children: self
                .children
                .iter()
                .map(|c| Arc::new(c.without_spans()))
                .collect(),
            span: None,
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Node)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn placeholders(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if n.kind == NodeKind::Placeholder && !out.iter().any(|s| s == n.token()) {
                out.push(n.token().to_string());
            }
        });
        out
    }

    /// Method names of the call links on this node's head spine, innermost
    /// first. `a.b(1).c(2)` yields `[b-call, c-call]`.
    pub fn chain_calls(&self) -> Vec<&Node> {
        let mut calls = Vec::new();
        let mut cur = Some(self);
        while let Some(n) = cur {
            if n.method_name().is_some() {
                calls.push(n);
            }
            cur = n.head();
        }
        calls.reverse();
        calls
    }
}

/// Path of child indices from the root to a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeRef(pub Vec<usize>);

impl NodeRef {
    pub fn root() -> Self {
        NodeRef(Vec::new())
    }

    pub fn child(&self, index: usize) -> NodeRef {
        let mut p = self.0.clone();
        p.push(index);
        NodeRef(p)
    }

    pub fn parent(&self) -> Option<NodeRef> {
        let mut p = self.0.clone();
        p.pop()?;
        Some(NodeRef(p))
    }

    pub fn is_ancestor_of(&self, other: &NodeRef) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/")?;
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub root: Arc<Node>,
}

impl Ast {
    pub fn new(root: Node) -> Self {
        Ast {
            root: Arc::new(root),
        }
    }

    pub fn empty() -> Self {
        Ast::new(Node::program(Vec::new()))
    }

    pub fn get(&self, at: &NodeRef) -> Option<&Node> {
        let mut cur: &Node = &self.root;
        for &i in &at.0 {
            cur = cur.children.get(i)?;
        }
        Some(cur)
    }

    pub fn statements(&self) -> &[Arc<Node>] {
        &self.root.children
    }

    /// All nodes matching `pattern`, in document order.
    pub fn find(&self, pattern: &NodePattern) -> Vec<NodeRef> {
        pattern::find(self, pattern)
    }

    /// Index of the top-level statement containing `at`.
    pub fn top_level_index(&self, at: &NodeRef) -> Option<usize> {
        at.0.first().copied()
    }

    /// Path to the nearest statement that contains `at` (or `at` itself).
    pub fn enclosing_statement(&self, at: &NodeRef) -> Option<NodeRef> {
        let mut cur = at.clone();
        loop {
            let parent = cur.parent()?;
            let pnode = self.get(&parent)?;
            if matches!(pnode.kind, NodeKind::Program | NodeKind::Block) {
                return Some(cur);
            }
            cur = parent;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("syntax error at {line}:{column} near `{lexeme}`: {message}")]
    Syntax {
        line: usize,
        column: usize,
        lexeme: String,
        message: String,
    },
    #[error("unsupported construct `{construct}` at {line}:{column}")]
    UnsupportedConstruct {
        line: usize,
        column: usize,
        construct: String,
    },
    #[error("placeholder {0} was never filled")]
    PlaceholderRemaining(String),
    #[error("rewrite target is not a node of this tree")]
    TargetNotInTree,
}

impl AstError {
    pub fn code(&self) -> &'static str {
        match self {
            AstError::Syntax { .. } => "SyntaxError",
            AstError::UnsupportedConstruct { .. } => "UnsupportedConstruct",
            AstError::PlaceholderRemaining(_) => "PlaceholderRemaining",
            AstError::TargetNotInTree => "TargetNotInTree",
        }
    }
}

/// True when `name` can be written as a bare property or identifier.
pub fn is_identifier_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$') && !lexer::is_reserved(name)
}
