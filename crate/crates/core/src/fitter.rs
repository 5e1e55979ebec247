//! Binding visualization templates to datasets.
//!
//! Scale kinds follow a fixed rule table: a slot that declares a categorical
//! scale uses it (band for bar categories, point for graph groups and pie
//! categories); otherwise quantitative attributes get a linear scale and
//! temporal attributes a time scale.
//!
//! Rows whose bound values are missing or do not parse under the
//! attribute's type are filtered out by the emitted program, behind a
//! comment stating how many rows are dropped.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ast::{is_identifier_name, parse, print, substitute, AstError, Node, NodeKind};
use crate::dataset::{
    is_missing, parse_date, parse_number, Attribute, AttributeType, Dataset, DateFormat,
};
use crate::templates::{
    SlotSpec, Template, TemplateKind, TemplateLibrary, DATA_URL_SLOT, ROW_FILTER_SLOT,
};
use crate::vocab::VizType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Linear,
    Band,
    Point,
    Time,
}

impl ScaleKind {
    pub fn constructor(self) -> &'static str {
        match self {
            ScaleKind::Linear => "scaleLinear",
            ScaleKind::Band => "scaleBand",
            ScaleKind::Point => "scalePoint",
            ScaleKind::Time => "scaleTime",
        }
    }

    fn admits(self, a: &Attribute) -> bool {
        match self {
            ScaleKind::Linear => a.inferred_type == AttributeType::Quantitative,
            ScaleKind::Time => a.inferred_type == AttributeType::Temporal,
            ScaleKind::Band | ScaleKind::Point => a.inferred_type != AttributeType::Temporal,
        }
    }
}

/// Scale kind for `attr` placed in `slot`.
pub fn scale_kind(slot: &SlotSpec, attr: &Attribute) -> ScaleKind {
    if let Some(kind) = slot.categorical_scale {
        return kind;
    }
    match attr.inferred_type {
        AttributeType::Quantitative => ScaleKind::Linear,
        AttributeType::Temporal => ScaleKind::Time,
        AttributeType::Nominal | AttributeType::Ordinal => ScaleKind::Point,
    }
}

/// Slot name → attribute name, plus the scale kind chosen per slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeBinding {
    pub slots: BTreeMap<String, String>,
    #[serde(default)]
    pub scales: BTreeMap<String, ScaleKind>,
}

/// `x` and `X_ATTR` both name the `X_ATTR` slot.
pub fn normalize_slot(name: &str) -> String {
    if name.ends_with("_ATTR") {
        name.to_string()
    } else {
        format!("{}_ATTR", name.to_ascii_uppercase())
    }
}

impl AttributeBinding {
    /// Binding without explicit scale kinds; the rule table fills them in.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        AttributeBinding {
            slots: pairs
                .into_iter()
                .map(|(s, a)| (normalize_slot(s), a.to_string()))
                .collect(),
            scales: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, slot: &str, attribute: &str, scale: ScaleKind) {
        let slot = normalize_slot(slot);
        self.slots.insert(slot.clone(), attribute.to_string());
        self.scales.insert(slot, scale);
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.slots.get(&normalize_slot(slot)).map(String::as_str)
    }

    pub fn scale(&self, slot: &str) -> Option<ScaleKind> {
        self.scales.get(&normalize_slot(slot)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FittedProgram {
    pub source: String,
    pub binding: AttributeBinding,
    pub viz: VizType,
    /// Rows removed by the emitted filter.
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("attribute {attribute} ({found}) does not fit slot {slot} (requires {required})")]
    SlotTypeMismatch {
        slot: String,
        attribute: String,
        found: String,
        required: String,
    },
    #[error("dataset has no attribute `{0}`")]
    UnknownAttribute(String),
    #[error("binding leaves slot {0} empty")]
    MissingSlot(String),
    #[error("template {0} is not a visualization template")]
    NotAVizTemplate(String),
    #[error(transparent)]
    Ast(#[from] AstError),
}

impl FitError {
    pub fn code(&self) -> &'static str {
        match self {
            FitError::SlotTypeMismatch { .. } => "SlotTypeMismatch",
            FitError::UnknownAttribute(_) => "UnknownAttribute",
            FitError::MissingSlot(_) => "MissingSlot",
            FitError::NotAVizTemplate(_) => "NotAVizTemplate",
            FitError::Ast(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitOptions {
    /// URL passed to the data-load call.
    pub data_url: String,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            data_url: "data.csv".into(),
        }
    }
}

pub fn fit_template(
    template: &Template,
    dataset: &Dataset,
    binding: &AttributeBinding,
) -> Result<FittedProgram, FitError> {
    fit_template_with(template, dataset, binding, &FitOptions::default())
}

/// Fit a shipped visualization template.
pub fn fit(
    viz: VizType,
    dataset: &Dataset,
    binding: &AttributeBinding,
) -> Result<FittedProgram, FitError> {
    fit_template(
        TemplateLibrary::builtin().viz_template(viz),
        dataset,
        binding,
    )
}

pub fn fit_template_with(
    template: &Template,
    dataset: &Dataset,
    binding: &AttributeBinding,
    options: &FitOptions,
) -> Result<FittedProgram, FitError> {
    if template.kind != TemplateKind::Viz {
        return Err(FitError::NotAVizTemplate(template.id.clone()));
    }
    let viz = template.target_viz().expect("viz template has a target");
    let mut resolved = AttributeBinding::default();
    let mut bound: Vec<(&Attribute, usize)> = Vec::new();
    let mut values: HashMap<String, Node> = HashMap::new();
    for slot in &template.slot_signature {
        let name = binding
            .get(&slot.name)
            .ok_or_else(|| FitError::MissingSlot(slot.name.clone()))?;
        let column = dataset
            .index_of(name)
            .ok_or_else(|| FitError::UnknownAttribute(name.to_string()))?;
        let attr = &dataset.attributes[column];
        let scale = binding
            .scale(&slot.name)
            .unwrap_or_else(|| scale_kind(slot, attr));
        if !slot.accepts_attribute(attr) || !scale.admits(attr) {
            return Err(FitError::SlotTypeMismatch {
                slot: slot.name.clone(),
                attribute: attr.name.clone(),
                found: attr.inferred_type.as_str().to_string(),
                required: slot.required(),
            });
        }
        resolved.insert(&slot.name, &attr.name, scale);
        values.insert(slot.name.clone(), Node::string(attr.name.clone()));
        values.insert(slot.value_slot(), value_expr(attr));
        values.insert(
            slot.scale_slot(),
            Node::call(Node::member(Node::ident("d3"), scale.constructor()), vec![]),
        );
        if !bound.iter().any(|(a, _)| a.name == attr.name) {
            bound.push((attr, column));
        }
    }
    let dropped_rows = dataset
        .rows
        .iter()
        .filter(|row| bound.iter().any(|(a, j)| !is_valid(a, &row[*j])))
        .count();
    values.insert(
        DATA_URL_SLOT.to_string(),
        Node::string(options.data_url.clone()),
    );
    values.insert(
        ROW_FILTER_SLOT.to_string(),
        row_filter(&bound, dropped_rows),
    );
    let fitted = substitute(&template.body, &values);
    let source = print(&fitted)?;
    parse(&source)?;
    Ok(FittedProgram {
        source,
        binding: resolved,
        viz,
        dropped_rows,
    })
}

/// Rebind one slot and refit; every statement not mentioning the slot
/// prints identically.
pub fn refit_encoding(
    program: &FittedProgram,
    slot: &str,
    new_attribute: &str,
    template: &Template,
    dataset: &Dataset,
) -> Result<FittedProgram, FitError> {
    let slot_name = normalize_slot(slot);
    let spec = template
        .slot_signature
        .iter()
        .find(|s| s.name == slot_name)
        .ok_or_else(|| FitError::MissingSlot(slot_name.clone()))?;
    let attr = dataset
        .attribute(new_attribute)
        .ok_or_else(|| FitError::UnknownAttribute(new_attribute.to_string()))?;
    if !spec.accepts_attribute(attr) {
        return Err(FitError::SlotTypeMismatch {
            slot: slot_name,
            attribute: attr.name.clone(),
            found: attr.inferred_type.as_str().to_string(),
            required: spec.required(),
        });
    }
    let mut binding = program.binding.clone();
    binding.insert(&slot_name, new_attribute, scale_kind(spec, attr));
    fit_template(template, dataset, &binding)
}

fn is_valid(attr: &Attribute, value: &str) -> bool {
    match attr.inferred_type {
        AttributeType::Quantitative => parse_number(value).is_some(),
        AttributeType::Temporal => parse_date(value).is_some(),
        AttributeType::Nominal | AttributeType::Ordinal => !is_missing(value),
    }
}

/// `d.name`, or `d["name"]` when the name is not an identifier.
fn field(object: &str, name: &str) -> Node {
    if is_identifier_name(name) {
        Node::member(Node::ident(object), name)
    } else {
        Node::new(
            NodeKind::IndexExpression,
            None,
            vec![Node::ident(object), Node::string(name)],
        )
    }
}

fn value_expr(attr: &Attribute) -> Node {
    let raw = field("d", &attr.name);
    match (attr.inferred_type, attr.date_format) {
        (AttributeType::Quantitative, _) => {
            Node::new(NodeKind::UnaryExpression, Some("+".into()), vec![raw])
        }
        (AttributeType::Temporal, Some(DateFormat::DayMonthYear)) => Node::call(
            Node::method_call(
                Node::ident("d3"),
                "timeParse",
                vec![Node::string("%d-%b-%y")],
            ),
            vec![raw],
        ),
        (AttributeType::Temporal, _) => Node::method_call(Node::ident("d3"), "isoParse", vec![raw]),
        _ => Node::method_call(raw, "trim", vec![]),
    }
}

fn binary(op: &str, left: Node, right: Node) -> Node {
    Node::new(
        NodeKind::BinaryExpression,
        Some(op.into()),
        vec![left, right],
    )
}

fn valid_expr(attr: &Attribute) -> Node {
    let present = binary(
        "!==",
        Node::method_call(field("d", &attr.name), "trim", vec![]),
        Node::string(""),
    );
    match attr.inferred_type {
        AttributeType::Quantitative => binary(
            "&&",
            present,
            Node::call(
                Node::ident("isFinite"),
                vec![Node::new(
                    NodeKind::UnaryExpression,
                    Some("+".into()),
                    vec![field("d", &attr.name)],
                )],
            ),
        ),
        AttributeType::Temporal => binary(
            "!==",
            value_expr(attr),
            Node::leaf(NodeKind::NullLiteral, "null"),
        ),
        AttributeType::Nominal | AttributeType::Ordinal => present,
    }
}

fn row_filter(bound: &[(&Attribute, usize)], dropped: usize) -> Node {
    if dropped == 0 || bound.is_empty() {
        return Node::program(vec![]);
    }
    let names: Vec<&str> = bound.iter().map(|(a, _)| a.name.as_str()).collect();
    let noun = if dropped == 1 { "row" } else { "rows" };
    let comment = Node::comment(format!(
        "// Drop {dropped} {noun} with missing or invalid values in {}",
        names.join(", ")
    ));
    let condition = bound
        .iter()
        .map(|(a, _)| valid_expr(a))
        .reduce(|l, r| binary("&&", l, r))
        .expect("non-empty");
    let arrow = Node::new(
        NodeKind::ArrowFunction,
        None,
        vec![Node::ident("d"), condition],
    );
    let assign = Node::new(
        NodeKind::AssignmentExpression,
        Some("=".into()),
        vec![
            Node::ident("data"),
            Node::method_call(Node::ident("data"), "filter", vec![arrow]),
        ],
    );
    Node::program(vec![comment, Node::expression_statement(assign)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_dataset, DataFormat};

    fn tiny() -> Dataset {
        let csv = "name,v,w,when\na,1,2,2020-01-01\nb,,3,2020-01-02\nc,4,x,2020-01-03\n";
        load_dataset("tiny", csv.as_bytes(), DataFormat::Csv).unwrap()
    }

    #[test]
    fn row_filter_counts_invalid_rows() {
        let d = tiny();
        let b = AttributeBinding::from_pairs([("x", "v"), ("y", "v")]);
        let p = fit(VizType::Scatterplot, &d, &b).unwrap();
        assert_eq!(p.dropped_rows, 1);
        assert!(
            p.source
                .contains("// Drop 1 row with missing or invalid values in v\n"),
            "{}",
            p.source
        );
        assert!(p
            .source
            .contains("data = data.filter(d => d.v.trim() !== \"\" && isFinite(+d.v));"));
    }

    #[test]
    fn no_filter_without_dropped_rows() {
        let d = tiny();
        let b = AttributeBinding::from_pairs([("x", "when"), ("y", "v")]);
        let line = fit(VizType::Line, &d, &b).unwrap();
        assert!(line.source.contains("d3.scaleTime()"));
        assert!(line.source.contains("d.when = d3.isoParse(d.when);"));
        let b = AttributeBinding::from_pairs([("cat", "name"), ("val", "v")]);
        let bar = fit(VizType::Bar, &d, &b).unwrap();
        assert_eq!(bar.binding.scale("cat"), Some(ScaleKind::Band));
    }

    #[test]
    fn mismatch_and_unknown() {
        let d = tiny();
        let b = AttributeBinding::from_pairs([("x", "name"), ("y", "v")]);
        let err = fit(VizType::Scatterplot, &d, &b).unwrap_err();
        assert!(matches!(&err, FitError::SlotTypeMismatch { slot, .. } if slot == "X_ATTR"));
        let b = AttributeBinding::from_pairs([("x", "nope"), ("y", "v")]);
        assert_eq!(
            fit(VizType::Scatterplot, &d, &b).unwrap_err(),
            FitError::UnknownAttribute("nope".into())
        );
        let b = AttributeBinding::from_pairs([("x", "v")]);
        assert_eq!(
            fit(VizType::Scatterplot, &d, &b).unwrap_err(),
            FitError::MissingSlot("Y_ATTR".into())
        );
    }

    #[test]
    fn explicit_scale_must_suit_attribute() {
        let d = tiny();
        let mut b = AttributeBinding::default();
        b.insert("X_ATTR", "when", ScaleKind::Linear);
        b.insert("Y_ATTR", "v", ScaleKind::Linear);
        assert!(matches!(
            fit(VizType::Line, &d, &b),
            Err(FitError::SlotTypeMismatch { .. })
        ));
    }

    #[test]
    fn awkward_names_use_index_access() {
        let csv = "Miles per gallon,Weight\n1,2\n3,4\n";
        let d = load_dataset("t", csv.as_bytes(), DataFormat::Csv).unwrap();
        let b = AttributeBinding::from_pairs([("x", "Miles per gallon"), ("y", "Weight")]);
        let p = fit(VizType::Scatterplot, &d, &b).unwrap();
        assert!(
            p.source
                .contains("d[\"Miles per gallon\"] = +d[\"Miles per gallon\"];"),
            "{}",
            p.source
        );
    }
}
