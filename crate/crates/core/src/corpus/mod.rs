//! Coded example corpora: ingestion, distribution statistics and seed tables
//! for the recommender.
//!
//! The CSV schema is `id,viz_type,viable,interactions`. `viz_type` holds one
//! or more `;`-separated labels from [`VIZ_LABELS`] (empty for non-viable
//! rows); `viable` is `true`/`false` (or `1`/`0`); `interactions` is a
//! `;`-separated list of interaction names, empty when the example has none.

mod fixture;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::vocab::{InteractionState, InteractionType, VizType};

pub use fixture::{fixture_corpus, fixture_csv};

/// Visualization labels accepted in a corpus file: the six template-backed
/// types, the long-tail types and `custom`.
pub const VIZ_LABELS: [&str; 22] = [
    "bar",
    "scatterplot",
    "line",
    "area",
    "pie",
    "graph",
    "geographic",
    "histogram",
    "heatmap",
    "voronoi",
    "tree",
    "sankey",
    "sunburst",
    "donut",
    "parallel_coordinates",
    "word_cloud",
    "box_plot",
    "hexbin",
    "radial",
    "stream_graph",
    "waffle",
    "custom",
];

pub const CORPUS_HEADER: [&str; 4] = ["id", "viz_type", "viable", "interactions"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedExample {
    pub id: String,
    /// Labels from [`VIZ_LABELS`]; an example may combine two charts.
    pub viz: Vec<String>,
    pub interactions: InteractionState,
    pub viable: bool,
}

impl CodedExample {
    pub fn new(
        id: impl Into<String>,
        viz: &[&str],
        interactions: InteractionState,
        viable: bool,
    ) -> Self {
        CodedExample {
            id: id.into(),
            viz: viz.iter().map(|v| v.to_string()).collect(),
            interactions,
            viable,
        }
    }

    pub fn has_viz(&self, viz: VizType) -> bool {
        self.viz.iter().any(|v| v == viz.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("schema error at row {row}: {message}")]
    SchemaError { row: usize, message: String },
    #[error("corpus has no viable examples")]
    NoViableExamples,
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::SchemaError { .. } => "SchemaError",
            CorpusError::NoViableExamples => "NoViableExamples",
        }
    }
}

fn schema(row: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::SchemaError {
        row,
        message: message.into(),
    }
}

/// Parse a corpus CSV. Rows are numbered from 1 after the header.
pub fn ingest(bytes: &[u8]) -> Result<Vec<CodedExample>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(schema(0, "missing header")),
        Some(r) => r.map_err(|e| schema(0, e.to_string()))?,
    };
    if header.iter().map(str::trim).ne(CORPUS_HEADER) {
        return Err(schema(
            0,
            format!("expected header `{}`", CORPUS_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (k, record) in records.enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| schema(row, e.to_string()))?;
        if record.len() != 4 {
            return Err(schema(
                row,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() || !ids.insert(id.clone()) {
            return Err(schema(row, "missing or duplicate id"));
        }
        let viable = match record[2].trim() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(schema(row, format!("bad viable flag `{other}`"))),
        };
        let viz: Vec<String> = tokens(&record[1]).map(str::to_string).collect();
        if let Some(bad) = viz.iter().find(|v| !VIZ_LABELS.contains(&v.as_str())) {
            return Err(schema(row, format!("unknown visualization label `{bad}`")));
        }
        if viable && viz.is_empty() {
            return Err(schema(row, "viable example without a visualization label"));
        }
        let mut interactions = InteractionState::EMPTY;
        for t in tokens(&record[3]) {
            let i: InteractionType = t
                .parse()
                .map_err(|_| schema(row, format!("unknown interaction token `{t}`")))?;
            interactions = interactions.with(i);
        }
        out.push(CodedExample {
            id,
            viz,
            interactions,
            viable,
        });
    }
    Ok(out)
}

fn tokens(field: &str) -> impl Iterator<Item = &str> {
    field.split(';').map(str::trim).filter(|t| !t.is_empty())
}

/// Serialize examples in the corpus CSV schema.
pub fn write_csv(examples: &[CodedExample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CORPUS_HEADER).expect("in-memory write");
    for e in examples {
        let interactions: Vec<&str> = e.interactions.iter().map(|i| i.as_str()).collect();
        w.write_record([
            e.id.as_str(),
            &e.viz.join(";"),
            if e.viable { "true" } else { "false" },
            &interactions.join(";"),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizShare {
    pub label: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub a: InteractionType,
    pub b: InteractionType,
    pub count: usize,
}

/// Distribution statistics over the viable examples of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_examples: usize,
    pub viable_examples: usize,
    pub interactive_examples: usize,
    /// Visualization instances (an example with two labels counts twice).
    pub viz_instances: usize,
    /// Per-label counts and percentages of `viz_instances`, most frequent first.
    pub viz: Vec<VizShare>,
    pub interaction_counts: BTreeMap<InteractionType, usize>,
    pub interaction_instances: usize,
    /// Symmetric co-occurrence matrix indexed by [`InteractionType::index`].
    pub pair_matrix: [[usize; 6]; 6],
    /// Co-occurrences split by visualization label, keyed `label|a,b`.
    pub viz_pair_counts: BTreeMap<String, usize>,
    /// Interactions observed at least once per label.
    pub per_viz_interactions: BTreeMap<String, BTreeSet<InteractionType>>,
    /// Viable examples as (labels, interaction set), in input order.
    pub examples: Vec<(Vec<String>, InteractionState)>,
}

pub fn compute_stats(examples: &[CodedExample]) -> Result<CorpusStats, CorpusError> {
    let viable: Vec<&CodedExample> = examples.iter().filter(|e| e.viable).collect();
    if viable.is_empty() {
        return Err(CorpusError::NoViableExamples);
    }
    let mut viz_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut interaction_counts: BTreeMap<InteractionType, usize> =
        InteractionType::ALL.iter().map(|i| (*i, 0)).collect();
    let mut pair_matrix = [[0usize; 6]; 6];
    let mut viz_pair_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_viz_interactions: BTreeMap<String, BTreeSet<InteractionType>> = BTreeMap::new();
    for e in &viable {
        for label in &e.viz {
            *viz_counts.entry(label).or_default() += 1;
            per_viz_interactions
                .entry(label.clone())
                .or_default()
                .extend(e.interactions.iter());
        }
        let set: Vec<InteractionType> = e.interactions.iter().collect();
        for i in &set {
            *interaction_counts.get_mut(i).expect("all keys present") += 1;
        }
        for (x, a) in set.iter().enumerate() {
            for b in &set[x + 1..] {
                pair_matrix[a.index()][b.index()] += 1;
                pair_matrix[b.index()][a.index()] += 1;
                for label in &e.viz {
                    *viz_pair_counts
                        .entry(format!("{label}|{a},{b}"))
                        .or_default() += 1;
                }
            }
        }
    }
    let viz_instances: usize = viz_counts.values().sum();
    let mut viz: Vec<VizShare> = viz_counts
        .into_iter()
        .map(|(label, count)| VizShare {
            label: label.to_string(),
            count,
            percent: 100.0 * count as f64 / viz_instances as f64,
        })
        .collect();
    viz.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    Ok(CorpusStats {
        total_examples: examples.len(),
        viable_examples: viable.len(),
        interactive_examples: viable.iter().filter(|e| !e.interactions.is_empty()).count(),
        viz_instances,
        viz,
        interaction_instances: interaction_counts.values().sum(),
        interaction_counts,
        pair_matrix,
        viz_pair_counts,
        per_viz_interactions,
        examples: viable
            .iter()
            .map(|e| (e.viz.clone(), e.interactions))
            .collect(),
    })
}

impl CorpusStats {
    pub fn viz_share(&self, label: &str) -> Option<&VizShare> {
        self.viz.iter().find(|v| v.label == label)
    }

    /// Fraction of all examples (viable or not) that implement an interaction.
    pub fn interactive_fraction(&self) -> f64 {
        self.interactive_examples as f64 / self.total_examples as f64
    }

    pub fn interaction_count(&self, i: InteractionType) -> usize {
        self.interaction_counts.get(&i).copied().unwrap_or(0)
    }

    pub fn pair_count(&self, a: InteractionType, b: InteractionType) -> usize {
        if a == b {
            0
        } else {
            self.pair_matrix[a.index()][b.index()]
        }
    }

    /// Unordered pairs with a non-zero count, most frequent first.
    pub fn pairs(&self) -> Vec<PairCount> {
        let mut out = Vec::new();
        for (x, a) in InteractionType::ALL.iter().enumerate() {
            for b in &InteractionType::ALL[x + 1..] {
                let count = self.pair_count(*a, *b);
                if count > 0 {
                    out.push(PairCount {
                        a: *a,
                        b: *b,
                        count,
                    });
                }
            }
        }
        out.sort_by_key(|p| std::cmp::Reverse(p.count));
        out
    }

    /// Total pair occurrences (an example with n interactions has n(n-1)/2).
    pub fn pair_occurrences(&self) -> usize {
        self.pairs().iter().map(|p| p.count).sum()
    }

    /// Share of all pair occurrences taken by `(a, b)`.
    pub fn pair_share(&self, a: InteractionType, b: InteractionType) -> f64 {
        let total = self.pair_occurrences();
        if total == 0 {
            0.0
        } else {
            self.pair_count(a, b) as f64 / total as f64
        }
    }

    /// Distinct (visualization, interaction pair) combinations observed.
    pub fn distinct_pairs(&self) -> usize {
        self.viz_pair_counts.len()
    }

    /// Interactions observed at least once for `viz`.
    pub fn applicability(&self, viz: VizType) -> BTreeSet<InteractionType> {
        self.per_viz_interactions
            .get(viz.as_str())
            .cloned()
            .unwrap_or_default()
    }

    /// Number of viable examples carrying `viz`, or all when `None`.
    pub fn example_count(&self, viz: Option<VizType>) -> usize {
        self.examples
            .iter()
            .filter(|(labels, _)| viz.is_none_or(|v| labels.iter().any(|l| l == v.as_str())))
            .count()
    }
}

/// Exact-set observation counts for one slice of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTable {
    /// `None` for the all-visualization slice.
    pub viz: Option<VizType>,
    pub examples: usize,
    /// Number of examples whose interaction set is exactly the key.
    pub set_counts: BTreeMap<InteractionState, usize>,
}

impl SeedTable {
    pub fn from_sets(
        viz: Option<VizType>,
        sets: impl IntoIterator<Item = InteractionState>,
    ) -> Self {
        let mut set_counts = BTreeMap::new();
        let mut examples = 0;
        for s in sets {
            *set_counts.entry(s).or_insert(0) += 1;
            examples += 1;
        }
        SeedTable {
            viz,
            examples,
            set_counts,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = InteractionState> + '_ {
        self.set_counts.keys().copied()
    }
}

/// Observation table for the recommender, restricted to `viz` when given.
pub fn emit_seed(stats: &CorpusStats, viz: Option<VizType>) -> SeedTable {
    let sets = stats
        .examples
        .iter()
        .filter(|(labels, _)| viz.is_none_or(|v| labels.iter().any(|l| l == v.as_str())))
        .map(|(_, s)| *s);
    SeedTable::from_sets(viz, sets)
}
