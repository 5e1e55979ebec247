use serde::{Deserialize, Serialize};

use super::{Ast, Node, NodeKind, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LiteralValue {
    Bool(bool),
    Str(String),
}

impl LiteralValue {
    fn matches(&self, node: &Node) -> bool {
        match self {
            LiteralValue::Str(s) => match node.kind {
                NodeKind::StringLiteral | NodeKind::NumberLiteral => node.token() == s,
                _ => false,
            },
            LiteralValue::Bool(b) => {
                node.kind == NodeKind::BooleanLiteral
                    && node.token() == if *b { "true" } else { "false" }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgConstraint {
    pub index: usize,
    pub value: LiteralValue,
}

/// One `.method(args...)` link of a call chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStep {
    pub method: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<ArgConstraint>,
}

impl CallStep {
    pub fn new(method: impl Into<String>) -> Self {
        CallStep {
            method: method.into(),
            args: Vec::new(),
        }
    }

    pub fn arg(mut self, index: usize, value: impl Into<String>) -> Self {
        self.args.push(ArgConstraint {
            index,
            value: LiteralValue::Str(value.into()),
        });
        self
    }

    fn matches(&self, call: &Node) -> bool {
        call.method_name() == Some(self.method.as_str())
            && self
                .args
                .iter()
                .all(|c| call.args().get(c.index).is_some_and(|a| c.value.matches(a)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchScope {
    /// The node is itself the last step; earlier steps appear below it in
    /// its callee chain.
    #[default]
    Node,
    /// The node is the outermost expression of a chain that contains every
    /// step somewhere along its spine.
    Chain,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodePattern {
    #[serde(default, skip)]
    pub kind: Option<NodeKind>,
    #[serde(default)]
    pub steps: Vec<CallStep>,
    #[serde(default)]
    pub scope: MatchScope,
}

impl NodePattern {
    pub fn kind(kind: NodeKind) -> Self {
        NodePattern {
            kind: Some(kind),
            ..Default::default()
        }
    }

    /// Call nodes ending in `step` (method-chain suffix match).
    pub fn call_suffix(step: CallStep) -> Self {
        NodePattern {
            kind: None,
            steps: vec![step],
            scope: MatchScope::Node,
        }
    }

    /// Outermost chain expressions containing every step.
    pub fn chain_containing(steps: Vec<CallStep>) -> Self {
        NodePattern {
            kind: None,
            steps,
            scope: MatchScope::Chain,
        }
    }

    fn matches(&self, node: &Node, is_chain_top: bool) -> bool {
        if let Some(k) = self.kind {
            if node.kind != k {
                return false;
            }
        }
        if self.steps.is_empty() {
            return true;
        }
        match self.scope {
            MatchScope::Node => {
                let (last, earlier) = self.steps.split_last().expect("non-empty");
                if !last.matches(node) {
                    return false;
                }
                let below = node.head().map(|h| h.chain_calls()).unwrap_or_default();
                contains_in_order(&below, earlier)
            }
            MatchScope::Chain => {
                if !is_chain_top {
                    return false;
                }
                let calls = node.chain_calls();
                !calls.is_empty()
                    && self
                        .steps
                        .iter()
                        .all(|s| calls.iter().any(|c| s.matches(c)))
            }
        }
    }
}

fn contains_in_order(calls: &[&Node], steps: &[CallStep]) -> bool {
    let mut it = calls.iter();
    steps.iter().all(|s| it.any(|c| s.matches(c)))
}

pub(super) fn find(ast: &Ast, pattern: &NodePattern) -> Vec<NodeRef> {
    let mut out = Vec::new();
    visit(&ast.root, NodeRef::root(), true, pattern, &mut out);
    out
}

fn visit(
    node: &Node,
    at: NodeRef,
    is_chain_top: bool,
    pattern: &NodePattern,
    out: &mut Vec<NodeRef>,
) {
    if pattern.matches(node, is_chain_top) {
        out.push(at.clone());
    }
    let continues_chain = matches!(
        node.kind,
        NodeKind::CallExpression | NodeKind::MemberExpression | NodeKind::IndexExpression
    );
    for (i, child) in node.children.iter().enumerate() {
        let top = !(continues_chain && i == 0);
        visit(child, at.child(i), top, pattern, out);
    }
}
