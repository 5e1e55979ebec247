//! Splicing interaction code into user programs.
//!
//! The pipeline has four steps: resolve the template inputs from the user's
//! code ([`identify_variables`]), fill the interaction template
//! ([`populate_interaction_template`]), find the unique anchor node
//! ([`locate_anchor`]) and rewrite around it ([`augment`]).
//!
//! The rewritten tree is not re-printed as a whole. Only the new code is
//! printed and spliced into the original text at the anchor's byte offsets,
//! so everything outside [`AugmentResult::inserted_ranges`] keeps the user's
//! formatting byte for byte. The spliced text is re-parsed and checked
//! against the rewritten tree.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::ast::{
    parse, print_fragment, rewrite, substitute, Ast, AstError, CallStep, InsertMode, Node,
    NodeKind, NodePattern, NodeRef, PrintOptions, Span,
};
use crate::templates::{AnchorSpec, Template, TemplateError, TemplateLibrary, ANCHOR_SLOT};
use crate::vocab::{InteractionState, InteractionType, VizType};

/// Fallback values used when an input cannot be found in the user's code.
pub mod defaults {
    pub const MARK_COLOR: &str = "#69b3a2";
    pub const HIGHLIGHT: &str = "orange";
    pub const SELECT_COLOR: &str = "black";
    pub const FADE_OPACITY: f64 = 0.3;
    pub const TRANSITION_MS: u32 = 200;
    pub const ZOOM_EXTENT: [u32; 2] = [1, 8];
    pub const SVG: &str = "svg";
    pub const DATA: &str = "data";
    pub const WIDTH: u32 = 640;
    pub const HEIGHT: u32 = 400;
    pub const COLOR_ATTR: &str = "fill";
    pub const Y_POS_ATTR: &str = "cy";
    pub const Y_SCALE_VAR: &str = "y";
    pub const LINE_GEN: &str = "line";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FoundInCode,
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedInput {
    #[serde(with = "node_text")]
    pub value: Node,
    pub provenance: Provenance,
}

mod node_text {
    use super::*;

    pub fn serialize<S: serde::Serializer>(node: &Node, s: S) -> Result<S::Ok, S::Error> {
        let text =
            print_fragment(node, 0, PrintOptions::default()).map_err(serde::ser::Error::custom)?;
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Node, D::Error> {
        let text = String::deserialize(d)?;
        let ast = parse(&format!("({text});")).map_err(serde::de::Error::custom)?;
        let stmt = ast
            .statements()
            .first()
            .ok_or_else(|| serde::de::Error::custom("empty"))?;
        Ok(stmt.children[0].without_spans())
    }
}

/// Template input name → resolved expression.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableBindings {
    pub inputs: BTreeMap<String, ResolvedInput>,
}

impl VariableBindings {
    pub fn get(&self, name: &str) -> Option<&ResolvedInput> {
        self.inputs.get(name)
    }

    pub fn set(&mut self, name: &str, value: Node, provenance: Provenance) {
        self.inputs
            .insert(name.to_string(), ResolvedInput { value, provenance });
    }

    pub fn remove(&mut self, name: &str) -> Option<ResolvedInput> {
        self.inputs.remove(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorLocation {
    pub path: Vec<usize>,
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("{0} is already implemented")]
    AlreadyImplemented(InteractionType),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("no {viz} mark-creation chain in the program")]
    NoMarkFound { viz: VizType },
    #[error("anchor not found")]
    AnchorNotFound,
    #[error("anchor is ambiguous: {count} matches")]
    AnchorAmbiguous {
        count: usize,
        locations: Vec<AnchorLocation>,
    },
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("internal error: {0}")]
    Internal(String),
}

impl AugmentError {
    pub fn code(&self) -> &'static str {
        match self {
            AugmentError::AlreadyImplemented(_) => "AlreadyImplemented",
            AugmentError::Template(e) => e.code(),
            AugmentError::NoMarkFound { .. } => "NoMarkFound",
            AugmentError::AnchorNotFound => "AnchorNotFound",
            AugmentError::AnchorAmbiguous { .. } => "AnchorAmbiguous",
            AugmentError::Ast(e) => e.code(),
            AugmentError::NothingToUndo => "NothingToUndo",
            AugmentError::Internal(_) => "Internal",
        }
    }
}

fn number(n: impl ToString) -> Node {
    Node::number(n.to_string())
}

/// Chain-top expressions of every mark-creation chain for `viz`.
fn mark_chains(ast: &Ast, viz: VizType, lib: &TemplateLibrary) -> Vec<NodeRef> {
    let pattern = lib.viz_template(viz).mark.clone().unwrap_or_default();
    ast.find(&pattern)
}

fn string_arg(call: &Node, index: usize) -> Option<&str> {
    call.args()
        .get(index)
        .filter(|a| a.kind == NodeKind::StringLiteral)
        .map(|a| a.token())
}

/// Last `.attr(name, v)` / `.style(name, v)` value along a chain.
fn chain_setting<'a>(chain: &'a Node, name: &str) -> Option<&'a Node> {
    chain
        .chain_calls()
        .into_iter()
        .filter(|c| {
            matches!(c.method_name(), Some("attr" | "style")) && string_arg(c, 0) == Some(name)
        })
        .filter_map(|c| c.args().get(1).map(|a| a.as_ref()))
        .next_back()
}

/// `d => scale(d.field)` and friends: the scale identifier and field name.
fn accessor_parts(f: &Node) -> Option<(String, Option<String>)> {
    let (_, body) = f.function_parts()?;
    let expr = match body.kind {
        NodeKind::Block => body
            .children
            .iter()
            .find(|s| s.kind == NodeKind::ReturnStatement)
            .and_then(|r| r.child(0))?,
        _ => body,
    };
    if expr.kind != NodeKind::CallExpression || expr.children[0].kind != NodeKind::Identifier {
        return None;
    }
    let scale = expr.children[0].token().to_string();
    let mut arg = expr.args().first().map(|a| a.as_ref())?;
    if arg.kind == NodeKind::UnaryExpression {
        arg = &arg.children[0];
    }
    let field = match arg.kind {
        NodeKind::MemberExpression => Some(arg.children[1].token().to_string()),
        NodeKind::IndexExpression if arg.children[1].kind == NodeKind::StringLiteral => {
            Some(arg.children[1].token().to_string())
        }
        _ => None,
    };
    Some((scale, field))
}

fn declaration_init<'a>(ast: &'a Ast, name: &str) -> Option<&'a Node> {
    let mut found = None;
    ast.root.walk(&mut |n| {
        if found.is_none()
            && n.kind == NodeKind::VariableDeclaration
            && n.child(0).map(|c| c.token()) == Some(name)
        {
            found = n.child(1);
        }
    });
    found
}

fn declared_name_where(ast: &Ast, pred: impl Fn(&Node) -> bool) -> Option<String> {
    let mut found = None;
    ast.root.walk(&mut |n| {
        if found.is_none() && n.kind == NodeKind::VariableDeclaration {
            if let Some(init) = n.child(1) {
                if pred(init) {
                    found = n.child(0).map(|c| c.token().to_string());
                }
            }
        }
    });
    found
}

/// First parameter of the callback handed to a `d3.csv/json/tsv(...).then`.
fn data_parameter(ast: &Ast) -> Option<String> {
    let mut found = None;
    ast.root.walk(&mut |n| {
        if found.is_some() || n.method_name() != Some("then") {
            return;
        }
        let loads = n
            .head()
            .map(|h| {
                h.chain_calls()
                    .iter()
                    .any(|c| matches!(c.method_name(), Some("csv" | "json" | "tsv")))
            })
            .unwrap_or(false);
        if !loads {
            return;
        }
        if let Some((params, _)) = n.args().first().and_then(|f| f.function_parts()) {
            found = params.first().map(|p| p.token().to_string());
        }
    });
    found
}

fn mark_selector(chain: &Node, viz: VizType, ast: &Ast) -> Option<String> {
    let calls = chain.chain_calls();
    let tag = calls
        .iter()
        .find(|c| matches!(c.method_name(), Some("append" | "join")))
        .and_then(|c| string_arg(c, 0))?;
    let class = calls
        .iter()
        .filter(|c| c.method_name() == Some("attr") && string_arg(c, 0) == Some("class"))
        .filter_map(|c| string_arg(c, 1))
        .next_back()
        .and_then(|c| c.split_whitespace().next());
    let mut selector = match class {
        Some(c) => format!("{tag}.{c}"),
        None => tag.to_string(),
    };
    if viz == VizType::Graph {
        let links = NodePattern::chain_containing(vec![CallStep::new("append").arg(0, "line")]);
        if !ast.find(&links).is_empty() {
            selector.push_str(", line");
        }
    }
    Some(selector)
}

fn param_node(value: &serde_json::Value) -> Option<Node> {
    match value {
        serde_json::Value::String(s) => Some(Node::string(s.clone())),
        serde_json::Value::Number(n) => Some(Node::number(n.to_string())),
        _ => None,
    }
}

fn table_default(input: &str) -> Option<Node> {
    use defaults as d;
    Some(match input {
        "SVG" => Node::ident(d::SVG),
        "DATA" => Node::ident(d::DATA),
        "WIDTH" => number(d::WIDTH),
        "HEIGHT" => number(d::HEIGHT),
        "MARK_COLOR" => Node::string(d::MARK_COLOR),
        "HIGHLIGHT" => Node::string(d::HIGHLIGHT),
        "SELECT_COLOR" => Node::string(d::SELECT_COLOR),
        "FADE_OPACITY" => number(d::FADE_OPACITY),
        "DURATION" => number(d::TRANSITION_MS),
        "ZOOM_MIN" => number(d::ZOOM_EXTENT[0]),
        "ZOOM_MAX" => number(d::ZOOM_EXTENT[1]),
        "COLOR_ATTR" => Node::string(d::COLOR_ATTR),
        "Y_POS_ATTR" => Node::string(d::Y_POS_ATTR),
        "Y_SCALE_VAR" => Node::ident(d::Y_SCALE_VAR),
        "Y_FIELD" => Node::leaf(NodeKind::NullLiteral, "null"),
        "LINE_GEN" => Node::ident(d::LINE_GEN),
        _ => return None,
    })
}

/// Resolve every input of the `(i, viz)` template.
pub fn identify_variables(
    ast: &Ast,
    i: InteractionType,
    viz: VizType,
) -> Result<VariableBindings, AugmentError> {
    identify_variables_in(TemplateLibrary::builtin(), ast, i, viz)
}

pub fn identify_variables_in(
    lib: &TemplateLibrary,
    ast: &Ast,
    i: InteractionType,
    viz: VizType,
) -> Result<VariableBindings, AugmentError> {
    let template = lib.interaction_template(i, viz)?;
    let marks = mark_chains(ast, viz, lib);
    let mark = marks.first().ok_or(AugmentError::NoMarkFound { viz })?;
    let chain = ast.get(mark).expect("found node exists");
    let param = |name: &str| template.params.get(name).and_then(param_node);
    let text_of = |n: &Node| (n.kind == NodeKind::StringLiteral).then(|| n.token().to_string());
    let color_attr = param("COLOR_ATTR")
        .and_then(|n| text_of(&n))
        .unwrap_or(defaults::COLOR_ATTR.into());
    let y_attr = param("Y_POS_ATTR")
        .and_then(|n| text_of(&n))
        .unwrap_or(defaults::Y_POS_ATTR.into());
    let line_gen = chain_setting(chain, "d")
        .filter(|n| n.kind == NodeKind::Identifier)
        .map(|n| n.token().to_string());
    let y_accessor = match &line_gen {
        Some(gen) if template.slot_signature.iter().any(|s| s.name == "LINE_GEN") => {
            declaration_init(ast, gen).and_then(|init| {
                init.chain_calls()
                    .into_iter()
                    .rfind(|c| matches!(c.method_name(), Some("y" | "y1")))
                    .and_then(|c| c.args().first().and_then(|f| accessor_parts(f)))
            })
        }
        _ => chain_setting(chain, &y_attr).and_then(accessor_parts),
    };

    let mut out = VariableBindings::default();
    for slot in &template.slot_signature {
        let name = slot.name.as_str();
        let found: Option<Node> = match name {
            "SVG" => declared_name_where(ast, |init| {
                init.chain_calls()
                    .iter()
                    .any(|c| c.method_name() == Some("append") && string_arg(c, 0) == Some("svg"))
            })
            .map(Node::ident),
            "DATA" => data_parameter(ast).map(Node::ident),
            "WIDTH" | "HEIGHT" => {
                let var = name.to_ascii_lowercase();
                declaration_init(ast, &var).map(|_| Node::ident(var))
            }
            "MARK_COLOR" => chain_setting(chain, &color_attr).map(Node::without_spans),
            "MARK_SELECTOR" => mark_selector(chain, viz, ast).map(Node::string),
            "LINE_GEN" => line_gen.clone().map(Node::ident),
            "Y_SCALE_VAR" => y_accessor.as_ref().map(|(s, _)| Node::ident(s.clone())),
            "Y_FIELD" => y_accessor
                .as_ref()
                .and_then(|(_, f)| f.clone())
                .map(Node::string),
            _ => None,
        };
        let (value, provenance) = match found {
            Some(v) => (v, Provenance::FoundInCode),
            None => match param(name).or_else(|| table_default(name)) {
                Some(v) => (v, Provenance::Default),
                None => continue,
            },
        };
        out.set(name, value, provenance);
    }
    Ok(out)
}

/// Fill every input of `t`; the anchor hole of replace templates stays.
pub fn populate_interaction_template(
    t: &Template,
    b: &VariableBindings,
) -> Result<Ast, AugmentError> {
    let values: HashMap<String, Node> = b
        .inputs
        .iter()
        .map(|(k, v)| (k.clone(), v.value.clone()))
        .collect();
    let filled = substitute(&t.body, &values);
    if let Some(missing) = filled
        .root
        .placeholders()
        .into_iter()
        .find(|p| p != ANCHOR_SLOT)
    {
        return Err(AstError::PlaceholderRemaining(missing).into());
    }
    Ok(filled)
}

/// The unique node matching `spec`.
pub fn locate_anchor(ast: &Ast, spec: &AnchorSpec) -> Result<NodeRef, AugmentError> {
    let hits = ast.find(&spec.pattern);
    match hits.len() {
        0 => Err(AugmentError::AnchorNotFound),
        1 => Ok(hits.into_iter().next().expect("one hit")),
        count => Err(AugmentError::AnchorAmbiguous {
            count,
            locations: hits
                .iter()
                .map(|h| AnchorLocation {
                    path: h.0.clone(),
                    span: ast.get(h).and_then(|n| n.span),
                })
                .collect(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentResult {
    pub source: String,
    /// Byte ranges of `source` holding the new code.
    pub inserted_ranges: Vec<Range<usize>>,
    pub summary: String,
    pub interaction: InteractionType,
    pub new_state: InteractionState,
}

/// Add interaction `i` to a `viz` program in which `state` is implemented.
pub fn augment(
    source: &str,
    i: InteractionType,
    viz: VizType,
    state: InteractionState,
) -> Result<AugmentResult, AugmentError> {
    augment_in(TemplateLibrary::builtin(), source, i, viz, state)
}

pub fn augment_in(
    lib: &TemplateLibrary,
    source: &str,
    i: InteractionType,
    viz: VizType,
    state: InteractionState,
) -> Result<AugmentResult, AugmentError> {
    if state.contains(i) {
        return Err(AugmentError::AlreadyImplemented(i));
    }
    let template = lib.interaction_template(i, viz)?;
    let ast = parse(source)?;
    let bindings = identify_variables_in(lib, &ast, i, viz)?;
    let populated = populate_interaction_template(template, &bindings)?;
    let spec = template
        .anchor()
        .expect("interaction templates carry an anchor");
    let anchor = locate_anchor(&ast, spec)?;
    let anchor_node = ast.get(&anchor).expect("anchor exists");

    let (rewritten, insertion) = match spec.mode {
        InsertMode::Replace => {
            let body = populated
                .statements()
                .iter()
                .find(|s| s.kind == NodeKind::ExpressionStatement)
                .expect("validated replace template");
            let mut values = HashMap::new();
            values.insert(ANCHOR_SLOT.to_string(), anchor_node.clone());
            let expr = substitute(&Ast::new(body.children[0].as_ref().clone()), &values)
                .root
                .as_ref()
                .clone();
            let suffix = chain_suffix(&expr, anchor_node, line_level(source, anchor_node))?;
            let at = anchor_node
                .span
                .ok_or_else(|| AugmentError::Internal("anchor without span".into()))?
                .end;
            (
                rewrite(&ast, &anchor, expr, InsertMode::Replace)?,
                (at, suffix),
            )
        }
        mode => {
            let stmt_ref = ast
                .enclosing_statement(&anchor)
                .ok_or(AugmentError::AnchorNotFound)?;
            let stmt = ast.get(&stmt_ref).expect("statement exists");
            let span = stmt
                .span
                .ok_or_else(|| AugmentError::Internal("statement without span".into()))?;
            let level = line_level(source, stmt);
            let printed = print_fragment(&populated.root, level, PrintOptions::default())?;
            let starts_with_comment = populated
                .statements()
                .first()
                .is_some_and(|s| s.kind == NodeKind::Comment);
            let text = if mode == InsertMode::Append {
                let gap = if starts_with_comment { "\n\n" } else { "\n" };
                (span.end, format!("{gap}{printed}"))
            } else {
                let pad = "  ".repeat(level);
                (span.start, format!("{}\n\n{pad}", printed.trim_start()))
            };
            (
                rewrite(&ast, &anchor, populated.root.as_ref().clone(), mode)?,
                text,
            )
        }
    };

    let (at, text) = insertion;
    let mut out = String::with_capacity(source.len() + text.len());
    out.push_str(&source[..at]);
    out.push_str(&text);
    out.push_str(&source[at..]);
    let check = parse(&out)?;
    if check.root.as_ref() != rewritten.root.as_ref() {
        return Err(AugmentError::Internal(
            "spliced text diverges from the rewritten tree".into(),
        ));
    }
    Ok(AugmentResult {
        source: out,
        inserted_ranges: vec![Range {
            start: at,
            end: at + text.len(),
        }],
        summary: template.summary.clone(),
        interaction: i,
        new_state: state.with(i),
    })
}

/// Indentation level of the line on which `node` starts.
fn line_level(source: &str, node: &Node) -> usize {
    let start = node.span.map(|s| s.start).unwrap_or(0);
    let line_start = source[..start].rfind('\n').map(|p| p + 1).unwrap_or(0);
    let width: usize = source[line_start..]
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .map(|c| if c == '\t' { 2 } else { 1 })
        .sum();
    width / 2
}

/// Printed `.method(args)` links that `expr` adds on top of `inner`, one per
/// line at continuation indentation.
fn chain_suffix(expr: &Node, inner: &Node, level: usize) -> Result<String, AugmentError> {
    let mut links = Vec::new();
    let mut cur = expr;
    while cur != inner {
        if cur.kind != NodeKind::CallExpression
            || cur.children[0].kind != NodeKind::MemberExpression
        {
            return Err(AugmentError::Internal(
                "replace template must extend the anchor chain".into(),
            ));
        }
        links.push(cur);
        cur = &cur.children[0].children[0];
    }
    let mut out = String::new();
    for call in links.iter().rev() {
        let args = call
            .args()
            .iter()
            .map(|a| print_fragment(a, level + 1, PrintOptions::default()))
            .collect::<Result<Vec<_>, _>>()?;
        out.push('\n');
        out.push_str(&"  ".repeat(level + 1));
        out.push('.');
        out.push_str(call.method_name().expect("member call"));
        out.push('(');
        out.push_str(&args.join(", "));
        out.push(')');
    }
    Ok(out)
}

/// Source and state before one augmentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub source: String,
    pub state: InteractionState,
    pub interaction: InteractionType,
}

/// Snapshot stack; undo restores the exact prior bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct History {
    entries: Vec<Snapshot>,
}

impl History {
    pub fn push(&mut self, source: String, state: InteractionState, interaction: InteractionType) {
        self.entries.push(Snapshot {
            source,
            state,
            interaction,
        });
    }

    pub fn pop(&mut self) -> Result<Snapshot, AugmentError> {
        self.entries.pop().ok_or(AugmentError::NothingToUndo)
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.entries.last()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Pop the last augmentation and return the source it replaced.
pub fn undo(history: &mut History) -> Result<String, AugmentError> {
    history.pop().map(|s| s.source)
}

/// Count handler registrations of `i` in `ast`.
pub fn registration_count(ast: &Ast, i: InteractionType) -> usize {
    TemplateLibrary::builtin()
        .registration(i)
        .map(|p| ast.find(p).len())
        .unwrap_or(0)
}
