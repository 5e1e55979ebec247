//! Curated visualization and interaction templates.
//!
//! Template bodies live in `templates/` as source files with `{{SLOT}}`
//! placeholders; `templates/manifest.json` declares slot signatures, mark
//! patterns, anchors and per-visualization variants (schema in
//! `docs/templates.md`). The library is validated when it is built: bodies
//! must parse, declared slots must occur, anchors must be unique in the
//! target visualization template and every corpus-observed
//! (visualization, interaction) pair must have a variant.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ast::{parse, Ast, AstError, CallStep, InsertMode, NodeKind, NodePattern};
use crate::corpus::{compute_stats, ingest};
use crate::dataset::{Attribute, AttributeType};
use crate::fitter::ScaleKind;
use crate::vocab::{InteractionType, VizType};

/// Fitter-generated placeholder holding the data URL string.
pub const DATA_URL_SLOT: &str = "DATA_URL";
/// Fitter-generated statement placeholder for the missing-row filter.
pub const ROW_FILTER_SLOT: &str = "ROW_FILTER";
/// Structural hole of replace-mode interaction templates.
pub const ANCHOR_SLOT: &str = "ANCHOR";

/// Inputs the augmenter knows how to resolve from user code or defaults.
pub const INTERACTION_INPUTS: &[&str] = &[
    "SVG",
    "DATA",
    "WIDTH",
    "HEIGHT",
    "MARK_COLOR",
    "MARK_SELECTOR",
    "COLOR_ATTR",
    "HIGHLIGHT",
    "SELECT_COLOR",
    "FADE_OPACITY",
    "DURATION",
    "ZOOM_MIN",
    "ZOOM_MAX",
    "Y_SCALE_VAR",
    "Y_FIELD",
    "Y_POS_ATTR",
    "LINE_GEN",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotAccept {
    Quantitative,
    Temporal,
    Nominal,
    Ordinal,
    /// Quantitative attribute with few distinct values.
    Discrete,
}

impl SlotAccept {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotAccept::Quantitative => "quantitative",
            SlotAccept::Temporal => "temporal",
            SlotAccept::Nominal => "nominal",
            SlotAccept::Ordinal => "ordinal",
            SlotAccept::Discrete => "discrete",
        }
    }

    fn admits(self, a: &Attribute) -> bool {
        match self {
            SlotAccept::Quantitative => a.inferred_type == AttributeType::Quantitative,
            SlotAccept::Temporal => a.inferred_type == AttributeType::Temporal,
            SlotAccept::Nominal => a.inferred_type == AttributeType::Nominal,
            SlotAccept::Ordinal => a.inferred_type == AttributeType::Ordinal,
            SlotAccept::Discrete => a.inferred_type == AttributeType::Quantitative && a.discrete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    #[serde(default)]
    pub accepts: Vec<SlotAccept>,
    /// Scale used when the slot encodes categories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categorical_scale: Option<ScaleKind>,
    /// The same attribute may also fill another slot.
    #[serde(default)]
    pub reusable: bool,
}

impl SlotSpec {
    pub fn accepts_attribute(&self, a: &Attribute) -> bool {
        self.accepts.iter().any(|k| k.admits(a))
    }

    /// Human readable requirement, e.g. `nominal|ordinal|discrete`.
    pub fn required(&self) -> String {
        self.accepts
            .iter()
            .map(|a| a.as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Prefix shared by derived placeholders: `X_ATTR` gives `X`.
    pub fn stem(&self) -> &str {
        self.name.strip_suffix("_ATTR").unwrap_or(&self.name)
    }

    pub fn value_slot(&self) -> String {
        format!("{}_VALUE", self.stem())
    }

    pub fn scale_slot(&self) -> String {
        format!("{}_SCALE", self.stem())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSpec {
    pub pattern: NodePattern,
    pub mode: InsertMode,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Viz,
    Interaction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateTarget {
    Viz(VizType),
    Interaction {
        interaction: InteractionType,
        viz: VizType,
        /// Every visualization sharing this body.
        applicable: BTreeSet<VizType>,
    },
}

#[derive(Debug, Clone)]
pub struct Template {
    pub id: String,
    pub kind: TemplateKind,
    pub target: TemplateTarget,
    pub file: String,
    pub body: Ast,
    pub slot_signature: Vec<SlotSpec>,
    pub anchors: Vec<AnchorSpec>,
    pub summary: String,
    /// Mark-creation chain pattern (visualization templates).
    pub mark: Option<NodePattern>,
    /// Constant inputs of an interaction variant.
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemplateError {
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("template file {0} is missing")]
    MissingFile(String),
    #[error("template {file} does not parse: {error}")]
    Parse { file: String, error: AstError },
    #[error("template {template} never uses slot {slot}")]
    UnusedSlot { template: String, slot: String },
    #[error("template {template} uses undeclared placeholder {slot}")]
    UnknownPlaceholder { template: String, slot: String },
    #[error("anchor of {template} matches {count} nodes in the {viz} template")]
    AnchorCount {
        template: String,
        viz: VizType,
        count: usize,
    },
    #[error("template {template}: {message}")]
    Structure { template: String, message: String },
    #[error("no template variant for {interaction} on {viz}")]
    MissingVariant {
        interaction: InteractionType,
        viz: VizType,
    },
    #[error("{interaction} is not supported on {viz}")]
    UnsupportedPair {
        interaction: InteractionType,
        viz: VizType,
    },
}

impl TemplateError {
    pub fn code(&self) -> &'static str {
        match self {
            TemplateError::UnsupportedPair { .. } => "UnsupportedPair",
            _ => "InvalidTemplate",
        }
    }
}

#[derive(Debug, Deserialize)]
struct Manifest {
    version: u32,
    viz: Vec<VizEntry>,
    interactions: Vec<InteractionEntry>,
}

#[derive(Debug, Deserialize)]
struct VizEntry {
    viz: VizType,
    file: String,
    summary: String,
    mark: NodePattern,
    slots: Vec<SlotSpec>,
}

#[derive(Debug, Deserialize)]
struct InteractionEntry {
    interaction: InteractionType,
    summary: String,
    registration: NodePattern,
    variants: Vec<VariantEntry>,
}

#[derive(Debug, Deserialize)]
struct VariantEntry {
    viz: VizType,
    file: String,
    anchor: AnchorSpec,
    #[serde(default)]
    params: BTreeMap<String, serde_json::Value>,
}

/// Interaction sets per visualization type.
pub type Applicability = BTreeMap<VizType, BTreeSet<InteractionType>>;

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    viz: BTreeMap<VizType, Template>,
    interactions: BTreeMap<(InteractionType, VizType), Template>,
    registrations: BTreeMap<InteractionType, NodePattern>,
    applicability: Applicability,
}

const MANIFEST: &str = include_str!("../../templates/manifest.json");

const FILES: &[(&str, &str)] = &[
    ("viz/bar.js", include_str!("../../templates/viz/bar.js")),
    (
        "viz/scatterplot.js",
        include_str!("../../templates/viz/scatterplot.js"),
    ),
    ("viz/line.js", include_str!("../../templates/viz/line.js")),
    ("viz/area.js", include_str!("../../templates/viz/area.js")),
    ("viz/pie.js", include_str!("../../templates/viz/pie.js")),
    ("viz/graph.js", include_str!("../../templates/viz/graph.js")),
    (
        "interactions/hover.js",
        include_str!("../../templates/interactions/hover.js"),
    ),
    (
        "interactions/click.js",
        include_str!("../../templates/interactions/click.js"),
    ),
    (
        "interactions/drag.js",
        include_str!("../../templates/interactions/drag.js"),
    ),
    (
        "interactions/zoom.js",
        include_str!("../../templates/interactions/zoom.js"),
    ),
    (
        "interactions/brush.js",
        include_str!("../../templates/interactions/brush.js"),
    ),
    (
        "interactions/visualize_position.js",
        include_str!("../../templates/interactions/visualize_position.js"),
    ),
    (
        "interactions/visualize_line.js",
        include_str!("../../templates/interactions/visualize_line.js"),
    ),
];

/// The shipped corpus fixture, source of the applicability matrix.
pub const FIXTURE_CORPUS: &str = include_str!("../../fixtures/corpus.csv");

impl TemplateLibrary {
    /// The shipped templates with the applicability observed in the shipped
    /// corpus fixture.
    pub fn builtin() -> &'static TemplateLibrary {
        static LIB: OnceLock<TemplateLibrary> = OnceLock::new();
        LIB.get_or_init(|| {
            let examples = ingest(FIXTURE_CORPUS.as_bytes()).expect("shipped corpus is valid");
            let stats = compute_stats(&examples).expect("shipped corpus has viable examples");
            let applicability = VizType::ALL
                .iter()
                .map(|v| (*v, stats.applicability(*v)))
                .collect();
            TemplateLibrary::load(
                MANIFEST,
                |f| {
                    FILES
                        .iter()
                        .find(|(n, _)| *n == f)
                        .map(|(_, s)| s.to_string())
                },
                applicability,
            )
            .expect("shipped templates are valid")
        })
    }

    /// Build and validate a library from a manifest and a file reader.
    pub fn load(
        manifest: &str,
        read: impl Fn(&str) -> Option<String>,
        applicability: Applicability,
    ) -> Result<TemplateLibrary, TemplateError> {
        let manifest: Manifest =
            serde_json::from_str(manifest).map_err(|e| TemplateError::Manifest(e.to_string()))?;
        if manifest.version != 1 {
            return Err(TemplateError::Manifest(format!(
                "unsupported version {}",
                manifest.version
            )));
        }
        let mut cache: HashMap<String, Ast> = HashMap::new();
        let mut body_of = |file: &str| -> Result<Ast, TemplateError> {
            if let Some(ast) = cache.get(file) {
                return Ok(ast.clone());
            }
            let text = read(file).ok_or_else(|| TemplateError::MissingFile(file.to_string()))?;
            let ast = parse(&text).map_err(|error| TemplateError::Parse {
                file: file.to_string(),
                error,
            })?;
            cache.insert(file.to_string(), ast.clone());
            Ok(ast)
        };

        let mut viz = BTreeMap::new();
        for e in manifest.viz {
            let body = body_of(&e.file)?;
            let t = Template {
                id: e.viz.as_str().to_string(),
                kind: TemplateKind::Viz,
                target: TemplateTarget::Viz(e.viz),
                file: e.file,
                body,
                slot_signature: e.slots,
                anchors: Vec::new(),
                summary: e.summary,
                mark: Some(e.mark),
                params: BTreeMap::new(),
            };
            validate_viz(&t)?;
            if viz.insert(e.viz, t).is_some() {
                return Err(TemplateError::Manifest(format!(
                    "duplicate template for {}",
                    e.viz
                )));
            }
        }
        if let Some(v) = VizType::ALL.iter().find(|v| !viz.contains_key(v)) {
            return Err(TemplateError::Manifest(format!("no template for {v}")));
        }

        let mut interactions = BTreeMap::new();
        let mut registrations = BTreeMap::new();
        for e in manifest.interactions {
            registrations.insert(e.interaction, e.registration);
            let sharing: BTreeMap<&str, BTreeSet<VizType>> =
                e.variants.iter().fold(BTreeMap::new(), |mut m, v| {
                    m.entry(v.file.as_str()).or_default().insert(v.viz);
                    m
                });
            for v in &e.variants {
                let body = body_of(&v.file)?;
                let id = format!("{}/{}", e.interaction, v.viz);
                let t = Template {
                    slot_signature: interaction_slots(&body, v.anchor.mode),
                    id: id.clone(),
                    kind: TemplateKind::Interaction,
                    target: TemplateTarget::Interaction {
                        interaction: e.interaction,
                        viz: v.viz,
                        applicable: sharing[v.file.as_str()].clone(),
                    },
                    file: v.file.clone(),
                    body,
                    anchors: vec![v.anchor.clone()],
                    summary: e.summary.clone(),
                    mark: None,
                    params: v.params.clone(),
                };
                validate_interaction(&t, &viz[&v.viz])?;
                if interactions.insert((e.interaction, v.viz), t).is_some() {
                    return Err(TemplateError::Manifest(format!("duplicate variant {id}")));
                }
            }
        }
        for (v, set) in &applicability {
            for i in set {
                if !interactions.contains_key(&(*i, *v)) {
                    return Err(TemplateError::MissingVariant {
                        interaction: *i,
                        viz: *v,
                    });
                }
                if !registrations.contains_key(i) {
                    return Err(TemplateError::Manifest(format!(
                        "no registration pattern for {i}"
                    )));
                }
            }
        }
        Ok(TemplateLibrary {
            viz,
            interactions,
            registrations,
            applicability,
        })
    }

    pub fn viz_template(&self, viz: VizType) -> &Template {
        &self.viz[&viz]
    }

    pub fn interaction_template(
        &self,
        i: InteractionType,
        viz: VizType,
    ) -> Result<&Template, TemplateError> {
        if !self.is_supported(i, viz) {
            return Err(TemplateError::UnsupportedPair {
                interaction: i,
                viz,
            });
        }
        Ok(&self.interactions[&(i, viz)])
    }

    pub fn is_supported(&self, i: InteractionType, viz: VizType) -> bool {
        self.applicability.get(&viz).is_some_and(|s| s.contains(&i))
    }

    /// Interactions observed for `viz`, in canonical order.
    pub fn applicability(&self, viz: VizType) -> Vec<InteractionType> {
        self.applicability
            .get(&viz)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Pattern matching one handler registration of `i`.
    pub fn registration(&self, i: InteractionType) -> Option<&NodePattern> {
        self.registrations.get(&i)
    }

    pub fn viz_templates(&self) -> impl Iterator<Item = &Template> {
        self.viz.values()
    }

    pub fn interaction_templates(&self) -> impl Iterator<Item = &Template> {
        self.interactions.values()
    }
}

/// Shipped templates (see [`TemplateLibrary::builtin`]).
pub fn get_viz_template(viz: VizType) -> &'static Template {
    TemplateLibrary::builtin().viz_template(viz)
}

pub fn get_interaction_template(
    i: InteractionType,
    viz: VizType,
) -> Result<&'static Template, TemplateError> {
    TemplateLibrary::builtin().interaction_template(i, viz)
}

pub fn applicability(viz: VizType) -> Vec<InteractionType> {
    TemplateLibrary::builtin().applicability(viz)
}

fn interaction_slots(body: &Ast, mode: InsertMode) -> Vec<SlotSpec> {
    let mut seen = Vec::new();
    for p in body.root.placeholders() {
        if (p != ANCHOR_SLOT || mode != InsertMode::Replace) && !seen.contains(&p) {
            seen.push(p);
        }
    }
    seen.into_iter()
        .map(|name| SlotSpec {
            name,
            accepts: Vec::new(),
            categorical_scale: None,
            reusable: false,
        })
        .collect()
}

fn validate_viz(t: &Template) -> Result<(), TemplateError> {
    let used: BTreeSet<String> = t.body.root.placeholders().into_iter().collect();
    let mut allowed: BTreeSet<String> = [DATA_URL_SLOT, ROW_FILTER_SLOT]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for s in &t.slot_signature {
        if !s.name.ends_with("_ATTR") || s.accepts.is_empty() {
            return Err(TemplateError::Manifest(format!(
                "bad slot {} in {}",
                s.name, t.id
            )));
        }
        if !used.contains(&s.name) {
            return Err(TemplateError::UnusedSlot {
                template: t.id.clone(),
                slot: s.name.clone(),
            });
        }
        allowed.extend([s.name.clone(), s.value_slot(), s.scale_slot()]);
    }
    if let Some(slot) = used.iter().find(|u| !allowed.contains(*u)) {
        return Err(TemplateError::UnknownPlaceholder {
            template: t.id.clone(),
            slot: slot.clone(),
        });
    }
    check_structure(t)
}

/// Dimensions, then SVG creation, then data load, then marks inside the
/// data-load statement.
pub(crate) fn check_structure(t: &Template) -> Result<(), TemplateError> {
    let fail = |message: String| TemplateError::Structure {
        template: t.id.clone(),
        message,
    };
    let ast = &t.body;
    let dims = ast
        .statements()
        .iter()
        .position(|s| {
            s.kind == NodeKind::VariableDeclaration
                && matches!(
                    s.child(0).map(|n| n.token()),
                    Some("width" | "height" | "margin")
                )
        })
        .ok_or_else(|| fail("no dimension declarations".into()))?;
    let first = |pattern: NodePattern, what: &str| {
        ast.find(&pattern)
            .into_iter()
            .next()
            .ok_or_else(|| fail(format!("no {what}")))
    };
    let svg = first(
        NodePattern::chain_containing(vec![CallStep::new("append").arg(0, "svg")]),
        "SVG creation",
    )?;
    let load = first(NodePattern::call_suffix(CallStep::new("csv")), "data load")?;
    let mark = first(t.mark.clone().unwrap_or_default(), "mark binding")?;
    let svg_i = ast.top_level_index(&svg).expect("match below root");
    let load_i = ast.top_level_index(&load).expect("match below root");
    let mark_i = ast.top_level_index(&mark).expect("match below root");
    if !(dims < svg_i && svg_i < load_i && load_i <= mark_i && load < mark) {
        return Err(fail(format!(
            "statement order dimensions={dims} svg={svg_i} load={load_i} marks={mark_i}"
        )));
    }
    Ok(())
}

fn validate_interaction(t: &Template, viz: &Template) -> Result<(), TemplateError> {
    let anchor = &t.anchors[0];
    let statements: Vec<_> = t
        .body
        .statements()
        .iter()
        .filter(|s| s.kind != NodeKind::Comment)
        .collect();
    if anchor.mode == InsertMode::Replace {
        let single = statements.len() == 1 && statements[0].kind == NodeKind::ExpressionStatement;
        let holes = t
            .body
            .root
            .placeholders()
            .iter()
            .filter(|p| *p == ANCHOR_SLOT)
            .count();
        if !single || holes != 1 {
            return Err(TemplateError::Structure {
                template: t.id.clone(),
                message: "replace templates are one expression with a single ANCHOR hole".into(),
            });
        }
    }
    for s in &t.slot_signature {
        if !INTERACTION_INPUTS.contains(&s.name.as_str()) && !t.params.contains_key(&s.name) {
            return Err(TemplateError::UnknownPlaceholder {
                template: t.id.clone(),
                slot: s.name.clone(),
            });
        }
    }
    let count = viz.body.find(&anchor.pattern).len();
    if count != 1 {
        return Err(TemplateError::AnchorCount {
            template: t.id.clone(),
            viz: viz.target_viz().expect("viz template"),
            count,
        });
    }
    Ok(())
}

impl Template {
    pub fn target_viz(&self) -> Option<VizType> {
        match &self.target {
            TemplateTarget::Viz(v) => Some(*v),
            TemplateTarget::Interaction { viz, .. } => Some(*viz),
        }
    }

    pub fn interaction(&self) -> Option<InteractionType> {
        match &self.target {
            TemplateTarget::Interaction { interaction, .. } => Some(*interaction),
            TemplateTarget::Viz(_) => None,
        }
    }

    pub fn anchor(&self) -> Option<&AnchorSpec> {
        self.anchors.first()
    }
}
