//! Editing sessions: one dataset, one program, its interaction state and
//! the snapshot stack used by undo. Every state change appends an event.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use vizassist_core::ast::parse;
use vizassist_core::augment::{augment, registration_count, AugmentResult, History};
use vizassist_core::classifier::{classify_svg, Classification};
use vizassist_core::dataset::{select_attributes, Attribute, Dataset};
use vizassist_core::fitter::{fit, refit_encoding, AttributeBinding, FittedProgram};
use vizassist_core::mdp::{MdpModel, Reaction, Recommendation};
use vizassist_core::templates::get_viz_template;
use vizassist_core::{InteractionState, InteractionType, VizType};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TemplateSelected,
    Fitted,
    Recommended,
    Accept,
    Undo,
    Ignore,
    Export,
    Classify,
    Edit,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub ts: DateTime<Utc>,
    pub session: String,
    pub kind: EventKind,
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VizOrigin {
    Template,
    Classified,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub rows: usize,
    pub attributes: Vec<Attribute>,
}

/// Client-facing snapshot of a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub viz: Option<VizType>,
    pub viz_origin: VizOrigin,
    pub state: InteractionState,
    pub source: String,
    pub history_depth: usize,
    pub binding: Option<AttributeBinding>,
    pub dataset: Option<DatasetSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportFile {
    pub name: String,
    pub media_type: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub files: Vec<ExportFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UndoOutcome {
    pub source: String,
    pub state: InteractionState,
    pub undone: InteractionType,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: Option<Dataset>,
    pub source: String,
    pub viz: Option<VizType>,
    pub viz_origin: VizOrigin,
    pub state: InteractionState,
    pub history: History,
    pub fitted: Option<FittedProgram>,
    pub events: Vec<SessionEvent>,
    log_path: Option<PathBuf>,
}

/// Interactions whose handler registration appears in `source`.
pub fn detect_state(source: &str) -> Option<InteractionState> {
    let ast = parse(source).ok()?;
    Some(
        InteractionType::ALL
            .into_iter()
            .filter(|&i| registration_count(&ast, i) > 0)
            .collect(),
    )
}

impl Session {
    pub fn new(id: impl Into<String>, dataset: Option<Dataset>, log_path: Option<PathBuf>) -> Self {
        Session {
            id: id.into(),
            dataset,
            source: String::new(),
            viz: None,
            viz_origin: VizOrigin::Unknown,
            state: InteractionState::EMPTY,
            history: History::default(),
            fitted: None,
            events: Vec::new(),
            log_path,
        }
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            viz: self.viz,
            viz_origin: self.viz_origin,
            state: self.state,
            source: self.source.clone(),
            history_depth: self.history.depth(),
            binding: self.fitted.as_ref().map(|f| f.binding.clone()),
            dataset: self.dataset.as_ref().map(|d| DatasetSummary {
                name: d.name.clone(),
                rows: d.row_count(),
                attributes: d.attributes.clone(),
            }),
        }
    }

    fn record(&mut self, kind: EventKind, payload: Value) {
        let event = SessionEvent {
            ts: Utc::now(),
            session: self.id.clone(),
            kind,
            payload,
        };
        if let Some(path) = &self.log_path {
            // The in-memory log stays authoritative if the file is unwritable.
            if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(path) {
                if let Ok(line) = serde_json::to_string(&event) {
                    let _ = writeln!(f, "{line}");
                }
            }
        }
        self.events.push(event);
    }

    fn install(&mut self, program: FittedProgram) {
        self.source = program.source.clone();
        self.viz = Some(program.viz);
        self.viz_origin = VizOrigin::Template;
        self.state = InteractionState::EMPTY;
        self.history.clear();
        self.record(
            EventKind::Fitted,
            json!({ "viz": program.viz, "binding": program.binding, "dropped_rows": program.dropped_rows, "source": program.source }),
        );
        self.fitted = Some(program);
    }

    /// Fit `viz` to the session dataset; a missing binding uses first-match selection.
    pub fn select_template(
        &mut self,
        viz: VizType,
        binding: Option<AttributeBinding>,
    ) -> Result<FittedProgram, ServiceError> {
        let dataset = self.dataset.as_ref().ok_or(ServiceError::NoDataset)?;
        let binding = match binding {
            Some(b) => b,
            None => select_attributes(dataset, viz, &BTreeSet::new())?,
        };
        let program = fit(viz, dataset, &binding)?;
        self.record(EventKind::TemplateSelected, json!({ "viz": viz }));
        self.install(program.clone());
        Ok(program)
    }

    /// Rebind one slot of the fitted template. Applied interactions are dropped.
    pub fn refit(&mut self, slot: &str, attribute: &str) -> Result<FittedProgram, ServiceError> {
        let dataset = self.dataset.as_ref().ok_or(ServiceError::NoDataset)?;
        let current = self.fitted.as_ref().ok_or(ServiceError::NotFitted)?;
        let program = refit_encoding(
            current,
            slot,
            attribute,
            get_viz_template(current.viz),
            dataset,
        )?;
        self.install(program.clone());
        Ok(program)
    }

    pub fn recommendations(&mut self, model: &Mutex<MdpModel>) -> Vec<Recommendation> {
        let recs = model
            .lock()
            .expect("model lock")
            .recommend(self.state, self.viz);
        self.record(
            EventKind::Recommended,
            json!({ "state": self.state, "viz": self.viz, "recommendations": recs.iter().map(|r| r.interaction).collect::<Vec<_>>() }),
        );
        recs
    }

    /// Augment the program with `i` and credit the recommender when `i` was on offer.
    pub fn accept(
        &mut self,
        i: InteractionType,
        model: &Mutex<MdpModel>,
    ) -> Result<AugmentResult, ServiceError> {
        let viz = self.viz.ok_or(ServiceError::NoVisualization)?;
        let out = augment(&self.source, i, viz, self.state)?;
        let before = self.state;
        self.history.push(
            std::mem::replace(&mut self.source, out.source.clone()),
            before,
            i,
        );
        self.state = out.new_state;
        let credited = model
            .lock()
            .expect("model lock")
            .record_feedback(before, Some(i), Reaction::Accept, Some(viz))
            .is_ok();
        self.record(
            EventKind::Accept,
            json!({ "interaction": i, "viz": viz, "state_before": before, "inserted_ranges": out.inserted_ranges, "credited": credited }),
        );
        Ok(out)
    }

    pub fn undo(&mut self, model: &Mutex<MdpModel>) -> Result<UndoOutcome, ServiceError> {
        let snap = self.history.pop()?;
        self.source = snap.source;
        self.state = snap.state;
        let credited = model
            .lock()
            .expect("model lock")
            .record_feedback(snap.state, Some(snap.interaction), Reaction::Undo, self.viz)
            .is_ok();
        self.record(
            EventKind::Undo,
            json!({ "interaction": snap.interaction, "state": snap.state, "credited": credited }),
        );
        Ok(UndoOutcome {
            source: self.source.clone(),
            state: self.state,
            undone: snap.interaction,
        })
    }

    /// Replace the program text. The snapshot stack is dropped, the state is
    /// re-derived from handler registrations and a classified type goes stale.
    pub fn set_source(&mut self, source: String) -> Option<String> {
        let parse_error = parse(&source).err().map(|e| e.to_string());
        if let Some(state) = detect_state(&source) {
            self.state = state;
        }
        self.source = source;
        self.history.clear();
        if self.viz_origin == VizOrigin::Classified {
            self.viz = None;
            self.viz_origin = VizOrigin::Unknown;
        }
        self.record(
            EventKind::Edit,
            json!({ "source": self.source, "state": self.state }),
        );
        parse_error
    }

    pub fn classify(&mut self, svg: &str) -> Result<Classification, ServiceError> {
        let c = classify_svg(svg)?;
        if self.viz_origin != VizOrigin::Template {
            self.viz = c.viz;
            self.viz_origin = if c.viz.is_some() {
                VizOrigin::Classified
            } else {
                VizOrigin::Unknown
            };
        }
        self.record(
            EventKind::Classify,
            json!({ "viz": c.label(), "confidence": c.confidence, "rule": c.rule }),
        );
        Ok(c)
    }

    pub fn ignore(&mut self, shown: &[InteractionType], model: &Mutex<MdpModel>) {
        let mut m = model.lock().expect("model lock");
        if shown.is_empty() {
            let _ = m.record_feedback(self.state, None, Reaction::Ignore, self.viz);
        }
        for &i in shown {
            let _ = m.record_feedback(self.state, Some(i), Reaction::Ignore, self.viz);
        }
        drop(m);
        self.record(
            EventKind::Ignore,
            json!({ "state": self.state, "interactions": shown }),
        );
    }

    /// Script, data and (when given) SVG. The last accepted interaction is
    /// credited with the export.
    pub fn export(&mut self, svg: Option<String>, model: &Mutex<MdpModel>) -> ExportBundle {
        let mut files = vec![ExportFile {
            name: "visualization.js".into(),
            media_type: "text/javascript".into(),
            content: self.source.clone(),
        }];
        if let Some(d) = &self.dataset {
            files.push(ExportFile {
                name: "data.csv".into(),
                media_type: "text/csv".into(),
                content: d.to_csv(),
            });
        }
        if let Some(svg) = svg {
            files.push(ExportFile {
                name: "visualization.svg".into(),
                media_type: "image/svg+xml".into(),
                content: svg,
            });
        }
        let credited = self.history.last().is_some_and(|snap| {
            model
                .lock()
                .expect("model lock")
                .record_feedback(
                    snap.state,
                    Some(snap.interaction),
                    Reaction::Export,
                    self.viz,
                )
                .is_ok()
        });
        self.record(
            EventKind::Export,
            json!({ "files": files.iter().map(|f| f.name.clone()).collect::<Vec<_>>(), "credited": credited }),
        );
        ExportBundle { files }
    }
}

/// Rebuild the program text from an event log.
pub fn replay(events: &[SessionEvent]) -> Result<String, ServiceError> {
    let bad = |what: &str| ServiceError::Replay(what.to_string());
    let mut source = String::new();
    let mut state = InteractionState::EMPTY;
    let mut stack: Vec<(String, InteractionState)> = Vec::new();
    for e in events {
        match e.kind {
            EventKind::Fitted | EventKind::Edit => {
                source = e.payload["source"]
                    .as_str()
                    .ok_or_else(|| bad("source missing"))?
                    .to_string();
                state = match e.kind {
                    EventKind::Edit => serde_json::from_value(e.payload["state"].clone())
                        .map_err(|e| bad(&e.to_string()))?,
                    _ => InteractionState::EMPTY,
                };
                stack.clear();
            }
            EventKind::Accept => {
                let i: InteractionType = serde_json::from_value(e.payload["interaction"].clone())
                    .map_err(|e| bad(&e.to_string()))?;
                let viz: VizType = serde_json::from_value(e.payload["viz"].clone())
                    .map_err(|e| bad(&e.to_string()))?;
                let out = augment(&source, i, viz, state)?;
                stack.push((std::mem::replace(&mut source, out.source), state));
                state = out.new_state;
            }
            EventKind::Undo => {
                let (s, st) = stack.pop().ok_or_else(|| bad("undo without a snapshot"))?;
                source = s;
                state = st;
            }
            _ => {}
        }
    }
    Ok(source)
}
