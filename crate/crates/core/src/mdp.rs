//! Interaction recommendation as a Markov decision process.
//!
//! States are sets of implemented interactions. `observations(s)` counts the
//! corpus examples whose interaction set contains `s`; accepting `i` in `s`
//! moves to `s ∪ {i}` with probability `observations(s ∪ {i}) / observations(s)`.
//! Export and undo reactions are counted per state and share the same
//! denominator; whatever probability is left is "ignore". When the raw
//! total exceeds one the three are scaled down and ignore is zero.
//!
//! Live feedback moves the counts and accumulates a reward per
//! `(state, interaction)`; ranking blends the accept probability with a
//! squashed reward: `score = accept + λ·sigmoid(q)`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{emit_seed, CorpusStats, SeedTable};
use crate::templates::applicability;
use crate::vocab::{InteractionState, InteractionType, UnknownToken, VizType};

pub const MODEL_VERSION: u32 = 1;

/// Order used to break score ties.
pub const TIE_BREAK_ORDER: [InteractionType; 6] = [
    InteractionType::Hover,
    InteractionType::Visualize,
    InteractionType::Click,
    InteractionType::Brush,
    InteractionType::Zoom,
    InteractionType::Drag,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MdpError {
    #[error("the corpus has no usable examples")]
    EmptyCorpus,
    #[error("state {{{0}}} was never observed")]
    UnknownState(InteractionState),
    #[error("unknown visualization type `{0}`")]
    UnknownVizType(String),
    #[error("{interaction} was not recommended in state {{{state}}}")]
    NotRecommended {
        state: InteractionState,
        interaction: InteractionType,
    },
    #[error("a {0} reaction needs the recommended interaction")]
    MissingInteraction(Reaction),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

impl MdpError {
    pub fn code(&self) -> &'static str {
        match self {
            MdpError::EmptyCorpus => "EmptyCorpus",
            MdpError::UnknownState(_) => "UnknownState",
            MdpError::UnknownVizType(_) => "UnknownVizType",
            MdpError::NotRecommended { .. } => "NotRecommended",
            MdpError::MissingInteraction(_) => "NotRecommended",
            MdpError::CorruptModel(_) => "CorruptModel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reaction {
    Accept,
    Export,
    Undo,
    Ignore,
}

impl Reaction {
    pub const ALL: [Reaction; 4] = [
        Reaction::Accept,
        Reaction::Export,
        Reaction::Undo,
        Reaction::Ignore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reaction::Accept => "accept",
            Reaction::Export => "export",
            Reaction::Undo => "undo",
            Reaction::Ignore => "ignore",
        }
    }
}

impl std::fmt::Display for Reaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reaction {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Reaction::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownToken(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub accept: f64,
    pub export: f64,
    pub undo: f64,
    pub ignore: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            accept: 1.0,
            export: 5.0,
            undo: -5.0,
            ignore: 0.0,
        }
    }
}

impl RewardParams {
    pub fn reward(&self, r: Reaction) -> f64 {
        match r {
            Reaction::Accept => self.accept,
            Reaction::Export => self.export,
            Reaction::Undo => self.undo,
            Reaction::Ignore => self.ignore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpConfig {
    pub rewards: RewardParams,
    /// Weight of the feedback term in the ranking score.
    pub lambda: f64,
    /// Visualization types with fewer examples use the all-type table.
    pub fallback_min_examples: usize,
}

impl Default for MdpConfig {
    fn default() -> Self {
        MdpConfig {
            rewards: RewardParams::default(),
            lambda: 0.1,
            fallback_min_examples: 10,
        }
    }
}

/// Outcome probabilities of recommending one interaction in one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionProbabilities {
    pub accept: f64,
    pub export: f64,
    pub undo: f64,
    pub ignore: f64,
}

impl ReactionProbabilities {
    pub fn sum(&self) -> f64 {
        self.accept + self.export + self.undo + self.ignore
    }

    pub fn get(&self, r: Reaction) -> f64 {
        match r {
            Reaction::Accept => self.accept,
            Reaction::Export => self.export,
            Reaction::Undo => self.undo,
            Reaction::Ignore => self.ignore,
        }
    }

    fn normalized(accept: f64, export: f64, undo: f64) -> Self {
        let raw = accept + export + undo;
        if raw > 1.0 {
            ReactionProbabilities {
                accept: accept / raw,
                export: export / raw,
                undo: undo / raw,
                ignore: 0.0,
            }
        } else {
            ReactionProbabilities {
                accept,
                export,
                undo,
                ignore: 1.0 - raw,
            }
        }
    }
}

/// All outgoing outcomes of a state at once: one accept edge per candidate,
/// the state's export and undo mass, and staying put.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub accept: Vec<(InteractionType, f64)>,
    pub export: f64,
    pub undo: f64,
    pub stay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub interaction: InteractionType,
    pub score: f64,
    pub rank: usize,
    /// Normalized accept probability.
    pub probability: f64,
}

/// Observation and reaction counts for one slice of the corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationTable {
    pub viz: Option<VizType>,
    pub examples: usize,
    pub observations: BTreeMap<InteractionState, u64>,
    pub export_counts: BTreeMap<InteractionState, u64>,
    pub undo_counts: BTreeMap<InteractionState, u64>,
    pub q_adjust: BTreeMap<(InteractionState, InteractionType), f64>,
}

impl ObservationTable {
    /// Superset counts from exact-set counts.
    pub fn from_seed(seed: &SeedTable) -> Self {
        let mut observations = BTreeMap::new();
        for s in InteractionState::all() {
            let n: usize = seed
                .set_counts
                .iter()
                .filter(|(t, _)| s.is_subset_of(**t))
                .map(|(_, c)| *c)
                .sum();
            if n > 0 {
                observations.insert(s, n as u64);
            }
        }
        ObservationTable {
            viz: seed.viz,
            examples: seed.examples,
            observations,
            ..Default::default()
        }
    }

    pub fn observations(&self, s: InteractionState) -> u64 {
        self.observations.get(&s).copied().unwrap_or(0)
    }

    pub fn export_count(&self, s: InteractionState) -> u64 {
        self.export_counts.get(&s).copied().unwrap_or(0)
    }

    pub fn undo_count(&self, s: InteractionState) -> u64 {
        self.undo_counts.get(&s).copied().unwrap_or(0)
    }

    pub fn q(&self, s: InteractionState, i: InteractionType) -> f64 {
        self.q_adjust.get(&(s, i)).copied().unwrap_or(0.0)
    }

    pub fn reaction_probabilities(
        &self,
        s: InteractionState,
        i: InteractionType,
    ) -> Result<ReactionProbabilities, MdpError> {
        let base = self.observations(s);
        if base == 0 {
            return Err(MdpError::UnknownState(s));
        }
        let d = base as f64;
        let accept = if s.contains(i) {
            0.0
        } else {
            self.observations(s.with(i)) as f64 / d
        };
        Ok(ReactionProbabilities::normalized(
            accept,
            self.export_count(s) as f64 / d,
            self.undo_count(s) as f64 / d,
        ))
    }

    /// Interactions with an observed edge out of `s`.
    pub fn edges(&self, s: InteractionState) -> Vec<InteractionType> {
        InteractionType::ALL
            .into_iter()
            .filter(|&i| !s.contains(i) && self.observations(s.with(i)) > 0)
            .collect()
    }

    fn bump(map: &mut BTreeMap<InteractionState, u64>, s: InteractionState) {
        *map.entry(s).or_insert(0) += 1;
    }

    fn drop_one(map: &mut BTreeMap<InteractionState, u64>, s: InteractionState) {
        if let Some(n) = map.get_mut(&s) {
            *n = n.saturating_sub(1);
            if *n == 0 {
                map.remove(&s);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    pub config: MdpConfig,
    /// Set when the model was seeded for a single visualization type.
    pub viz_type: Option<VizType>,
    pub global: ObservationTable,
    pub per_viz: BTreeMap<VizType, ObservationTable>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn tie_rank(i: InteractionType) -> usize {
    TIE_BREAK_ORDER
        .iter()
        .position(|&t| t == i)
        .expect("every interaction is ordered")
}

/// Seed a model from corpus statistics.
pub fn seed(corpus: &CorpusStats) -> Result<MdpModel, MdpError> {
    MdpModel::seed_with(corpus, MdpConfig::default())
}

impl MdpModel {
    pub fn seed_with(corpus: &CorpusStats, config: MdpConfig) -> Result<Self, MdpError> {
        let global = emit_seed(corpus, None);
        let per_viz: Vec<SeedTable> = VizType::ALL
            .into_iter()
            .map(|v| emit_seed(corpus, Some(v)))
            .collect();
        Self::from_seed_tables(&global, &per_viz, config)
    }

    /// Model over the examples of one visualization type only.
    pub fn seed_viz(
        corpus: &CorpusStats,
        viz: VizType,
        config: MdpConfig,
    ) -> Result<Self, MdpError> {
        let table = emit_seed(corpus, Some(viz));
        let mut m = Self::from_seed_tables(&table, &[], config)?;
        m.viz_type = Some(viz);
        Ok(m)
    }

    pub fn from_seed_tables(
        global: &SeedTable,
        per_viz: &[SeedTable],
        config: MdpConfig,
    ) -> Result<Self, MdpError> {
        if global.examples == 0 {
            return Err(MdpError::EmptyCorpus);
        }
        let per_viz = per_viz
            .iter()
            .filter(|t| t.examples >= config.fallback_min_examples.max(1))
            .filter_map(|t| t.viz.map(|v| (v, ObservationTable::from_seed(t))))
            .collect();
        Ok(MdpModel {
            config,
            viz_type: None,
            global: ObservationTable::from_seed(global),
            per_viz,
        })
    }

    /// Model from explicit superset counts and reaction counts.
    pub fn from_tables(
        observations: &[(InteractionState, u64)],
        export_counts: &[(InteractionState, u64)],
        undo_counts: &[(InteractionState, u64)],
        config: MdpConfig,
    ) -> Result<Self, MdpError> {
        let collect = |pairs: &[(InteractionState, u64)]| {
            pairs
                .iter()
                .filter(|(_, n)| *n > 0)
                .copied()
                .collect::<BTreeMap<_, _>>()
        };
        let observations = collect(observations);
        let examples = observations
            .get(&InteractionState::EMPTY)
            .copied()
            .unwrap_or(0) as usize;
        if observations.is_empty() {
            return Err(MdpError::EmptyCorpus);
        }
        Ok(MdpModel {
            config,
            viz_type: None,
            global: ObservationTable {
                viz: None,
                examples,
                observations,
                export_counts: collect(export_counts),
                undo_counts: collect(undo_counts),
                q_adjust: BTreeMap::new(),
            },
            per_viz: BTreeMap::new(),
        })
    }

    /// The table answering queries for `viz`.
    pub fn table(&self, viz: Option<VizType>) -> &ObservationTable {
        viz.and_then(|v| self.per_viz.get(&v))
            .unwrap_or(&self.global)
    }

    fn table_mut(&mut self, viz: Option<VizType>) -> &mut ObservationTable {
        match viz {
            Some(v) if self.per_viz.contains_key(&v) => self.per_viz.get_mut(&v).expect("checked"),
            _ => &mut self.global,
        }
    }

    pub fn observations(&self, s: InteractionState, viz: Option<VizType>) -> u64 {
        self.table(viz).observations(s)
    }

    pub fn reaction_probabilities(
        &self,
        s: InteractionState,
        i: InteractionType,
        viz: Option<VizType>,
    ) -> Result<ReactionProbabilities, MdpError> {
        self.table(viz).reaction_probabilities(s, i)
    }

    /// Probability of moving from `s` to `next` by accepting `i`.
    pub fn transition_probability(
        &self,
        s: InteractionState,
        i: InteractionType,
        next: InteractionState,
        viz: Option<VizType>,
    ) -> Result<f64, MdpError> {
        let p = self.reaction_probabilities(s, i, viz)?;
        Ok(if !s.contains(i) && next == s.with(i) {
            p.accept
        } else {
            0.0
        })
    }

    pub fn state_distribution(
        &self,
        s: InteractionState,
        viz: Option<VizType>,
    ) -> Result<StateDistribution, MdpError> {
        let t = self.table(viz);
        let base = t.observations(s);
        if base == 0 {
            return Err(MdpError::UnknownState(s));
        }
        let d = base as f64;
        let mut accept: Vec<(InteractionType, f64)> = self
            .candidates(s, viz)
            .into_iter()
            .map(|i| (i, t.observations(s.with(i)) as f64 / d))
            .collect();
        let mut export = t.export_count(s) as f64 / d;
        let mut undo = t.undo_count(s) as f64 / d;
        let raw = accept.iter().map(|(_, p)| p).sum::<f64>() + export + undo;
        let stay = if raw > 1.0 {
            accept.iter_mut().for_each(|(_, p)| *p /= raw);
            export /= raw;
            undo /= raw;
            0.0
        } else {
            1.0 - raw
        };
        Ok(StateDistribution {
            accept,
            export,
            undo,
            stay,
        })
    }

    fn candidates(&self, s: InteractionState, viz: Option<VizType>) -> Vec<InteractionType> {
        let allowed = viz.map(applicability);
        self.table(viz)
            .edges(s)
            .into_iter()
            .filter(|i| allowed.as_ref().is_none_or(|a| a.contains(i)))
            .collect()
    }

    /// Ranked recommendations for `s`. `None` queries the all-type table
    /// without an applicability filter.
    pub fn recommend(&self, s: InteractionState, viz: Option<VizType>) -> Vec<Recommendation> {
        let t = self.table(viz);
        if t.observations(s) == 0 {
            return Vec::new();
        }
        let mut out: Vec<Recommendation> = self
            .candidates(s, viz)
            .into_iter()
            .map(|i| {
                let p = t
                    .reaction_probabilities(s, i)
                    .expect("observed state")
                    .accept;
                Recommendation {
                    interaction: i,
                    score: p + self.config.lambda * sigmoid(t.q(s, i)),
                    rank: 0,
                    probability: p,
                }
            })
            .collect();
        out.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| tie_rank(a.interaction).cmp(&tie_rank(b.interaction)))
        });
        for (k, r) in out.iter_mut().enumerate() {
            r.rank = k + 1;
        }
        out
    }

    pub fn recommend_named(
        &self,
        s: InteractionState,
        viz: &str,
    ) -> Result<Vec<Recommendation>, MdpError> {
        let v: VizType = viz
            .parse()
            .map_err(|_| MdpError::UnknownVizType(viz.to_string()))?;
        Ok(self.recommend(s, Some(v)))
    }

    /// Apply one user reaction. Accept, export and undo need the
    /// recommended interaction; ignore applies to the whole list.
    pub fn record_feedback(
        &mut self,
        s: InteractionState,
        i: Option<InteractionType>,
        reaction: Reaction,
        viz: Option<VizType>,
    ) -> Result<(), MdpError> {
        if reaction == Reaction::Ignore {
            if let Some(i) = i {
                let r = self.config.rewards.ignore;
                *self.table_mut(viz).q_adjust.entry((s, i)).or_insert(0.0) += r;
            }
            return Ok(());
        }
        let i = i.ok_or(MdpError::MissingInteraction(reaction))?;
        if !self.recommend(s, viz).iter().any(|r| r.interaction == i) {
            return Err(MdpError::NotRecommended {
                state: s,
                interaction: i,
            });
        }
        let reward = self.config.rewards.reward(reaction);
        let t = self.table_mut(viz);
        match reaction {
            Reaction::Accept => ObservationTable::bump(&mut t.observations, s.with(i)),
            Reaction::Export => ObservationTable::bump(&mut t.export_counts, s),
            Reaction::Undo => {
                ObservationTable::bump(&mut t.undo_counts, s);
                ObservationTable::drop_one(&mut t.observations, s.with(i));
            }
            Reaction::Ignore => unreachable!(),
        }
        *t.q_adjust.entry((s, i)).or_insert(0.0) += reward;
        Ok(())
    }

    pub fn persist(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(&PersistedModel::from(self)).expect("model serializes")
    }

    pub fn restore(bytes: &[u8]) -> Result<Self, MdpError> {
        let p: PersistedModel =
            serde_json::from_slice(bytes).map_err(|e| MdpError::CorruptModel(e.to_string()))?;
        p.into_model()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PersistedTable {
    viz: Option<VizType>,
    examples: usize,
    observations: BTreeMap<String, u64>,
    export_counts: BTreeMap<String, u64>,
    undo_counts: BTreeMap<String, u64>,
    q_adjust: BTreeMap<String, BTreeMap<InteractionType, f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PersistedModel {
    version: u32,
    viz_type: Option<VizType>,
    reward_params: RewardParams,
    lambda: f64,
    fallback_min_examples: usize,
    tables: Vec<PersistedTable>,
}

fn keyed(map: &BTreeMap<InteractionState, u64>) -> BTreeMap<String, u64> {
    map.iter().map(|(s, n)| (s.key(), *n)).collect()
}

fn unkeyed(map: BTreeMap<String, u64>) -> Result<BTreeMap<InteractionState, u64>, MdpError> {
    map.into_iter()
        .map(|(k, n)| {
            InteractionState::parse_key(&k)
                .map(|s| (s, n))
                .map_err(|e| MdpError::CorruptModel(format!("state `{k}`: {e}")))
        })
        .collect()
}

impl From<&ObservationTable> for PersistedTable {
    fn from(t: &ObservationTable) -> Self {
        let mut q_adjust: BTreeMap<String, BTreeMap<InteractionType, f64>> = BTreeMap::new();
        for ((s, i), v) in &t.q_adjust {
            q_adjust.entry(s.key()).or_default().insert(*i, *v);
        }
        PersistedTable {
            viz: t.viz,
            examples: t.examples,
            observations: keyed(&t.observations),
            export_counts: keyed(&t.export_counts),
            undo_counts: keyed(&t.undo_counts),
            q_adjust,
        }
    }
}

impl From<&MdpModel> for PersistedModel {
    fn from(m: &MdpModel) -> Self {
        PersistedModel {
            version: MODEL_VERSION,
            viz_type: m.viz_type,
            reward_params: m.config.rewards,
            lambda: m.config.lambda,
            fallback_min_examples: m.config.fallback_min_examples,
            tables: std::iter::once(&m.global)
                .chain(m.per_viz.values())
                .map(PersistedTable::from)
                .collect(),
        }
    }
}

impl PersistedTable {
    fn into_table(self) -> Result<ObservationTable, MdpError> {
        let mut q_adjust = BTreeMap::new();
        for (k, per) in self.q_adjust {
            let s = InteractionState::parse_key(&k)
                .map_err(|e| MdpError::CorruptModel(format!("state `{k}`: {e}")))?;
            for (i, v) in per {
                if !v.is_finite() {
                    return Err(MdpError::CorruptModel(format!(
                        "non-finite reward for {i} in {{{k}}}"
                    )));
                }
                q_adjust.insert((s, i), v);
            }
        }
        Ok(ObservationTable {
            viz: self.viz,
            examples: self.examples,
            observations: unkeyed(self.observations)?,
            export_counts: unkeyed(self.export_counts)?,
            undo_counts: unkeyed(self.undo_counts)?,
            q_adjust,
        })
    }
}

impl PersistedModel {
    fn into_model(self) -> Result<MdpModel, MdpError> {
        if self.version != MODEL_VERSION {
            return Err(MdpError::CorruptModel(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if !self.lambda.is_finite() {
            return Err(MdpError::CorruptModel("lambda is not finite".into()));
        }
        let mut tables = self.tables.into_iter();
        let global = tables
            .next()
            .ok_or_else(|| MdpError::CorruptModel("no tables".into()))?
            .into_table()?;
        if global.viz.is_some() && self.viz_type.is_none() {
            return Err(MdpError::CorruptModel(
                "first table must cover all types".into(),
            ));
        }
        let mut per_viz = BTreeMap::new();
        for t in tables {
            let t = t.into_table()?;
            let v = t
                .viz
                .ok_or_else(|| MdpError::CorruptModel("per-type table without a type".into()))?;
            if per_viz.insert(v, t).is_some() {
                return Err(MdpError::CorruptModel(format!("duplicate table for {v}")));
            }
        }
        Ok(MdpModel {
            config: MdpConfig {
                rewards: self.reward_params,
                lambda: self.lambda,
                fallback_min_examples: self.fallback_min_examples,
            },
            viz_type: self.viz_type,
            global,
            per_viz,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionAccuracy {
    pub support: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub k: usize,
    pub evaluated: usize,
    pub correct: usize,
    pub overall: f64,
    pub per_interaction: BTreeMap<InteractionType, InteractionAccuracy>,
}

/// Leave-one-out validation of recommendations from the empty state.
///
/// Each interactive example is held out in turn; the model is seeded on
/// the rest, and the example counts as correct when every interaction it
/// implements is ranked at or above `k`.
pub fn cross_validate(corpus: &CorpusStats, k: usize) -> Result<CrossValidation, MdpError> {
    cross_validate_with(corpus, k, MdpConfig::default())
}

pub fn cross_validate_with(
    corpus: &CorpusStats,
    k: usize,
    config: MdpConfig,
) -> Result<CrossValidation, MdpError> {
    if corpus.examples.len() < 2 {
        return Err(MdpError::EmptyCorpus);
    }
    let global = emit_seed(corpus, None);
    let per_viz: BTreeMap<VizType, SeedTable> = VizType::ALL
        .into_iter()
        .map(|v| (v, emit_seed(corpus, Some(v))))
        .collect();
    let model = MdpModel {
        config,
        viz_type: None,
        global: ObservationTable::default(),
        per_viz: BTreeMap::new(),
    };
    let minus = |seed: &SeedTable, s: InteractionState| {
        let mut t = seed.clone();
        t.examples -= 1;
        if let Some(n) = t.set_counts.get_mut(&s) {
            *n -= 1;
        }
        t
    };

    let mut evaluated = 0;
    let mut correct = 0;
    let mut per: BTreeMap<InteractionType, InteractionAccuracy> = BTreeMap::new();
    for (labels, state) in &corpus.examples {
        if state.is_empty() {
            continue;
        }
        let viz = labels.iter().find_map(|l| l.parse::<VizType>().ok());
        let mut m = model.clone();
        let min = config.fallback_min_examples.max(1);
        let rest = viz
            .map(|v| minus(&per_viz[&v], *state))
            .filter(|t| t.examples >= min);
        let use_filter = rest.is_some();
        m.global = ObservationTable::from_seed(&rest.unwrap_or_else(|| minus(&global, *state)));
        let ranked: Vec<InteractionType> = m
            .recommend(InteractionState::EMPTY, if use_filter { viz } else { None })
            .into_iter()
            .take(k)
            .map(|r| r.interaction)
            .collect();
        evaluated += 1;
        let mut all = true;
        for i in state.iter() {
            let hit = ranked.contains(&i);
            let e = per.entry(i).or_default();
            e.support += 1;
            e.correct += usize::from(hit);
            all &= hit;
        }
        correct += usize::from(all);
    }
    if evaluated == 0 {
        return Err(MdpError::EmptyCorpus);
    }
    for e in per.values_mut() {
        e.accuracy = e.correct as f64 / e.support as f64;
    }
    Ok(CrossValidation {
        k,
        evaluated,
        correct,
        overall: correct as f64 / evaluated as f64,
        per_interaction: per,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use InteractionType::*;

    fn st(items: &[InteractionType]) -> InteractionState {
        items.iter().copied().collect()
    }

    fn toy() -> MdpModel {
        MdpModel::from_tables(
            &[(st(&[]), 10), (st(&[Hover]), 6), (st(&[Zoom]), 1)],
            &[],
            &[(st(&[]), 2)],
            MdpConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn toy_model_distribution() {
        let d = toy()
            .state_distribution(InteractionState::EMPTY, None)
            .unwrap();
        assert_eq!(d.accept, vec![(Hover, 0.6), (Zoom, 0.1)]);
        assert!((d.undo - 0.2).abs() < 1e-12);
        assert!((d.stay - 0.1).abs() < 1e-12);
        let order: Vec<_> = toy()
            .recommend(InteractionState::EMPTY, None)
            .iter()
            .map(|r| r.interaction)
            .collect();
        assert_eq!(order, vec![Hover, Zoom]);
    }

    #[test]
    fn closure_when_counts_overflow() {
        let m = MdpModel::from_tables(
            &[(st(&[]), 2), (st(&[Hover]), 2)],
            &[(st(&[]), 3)],
            &[],
            MdpConfig::default(),
        )
        .unwrap();
        let p = m
            .reaction_probabilities(InteractionState::EMPTY, Hover, None)
            .unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert_eq!(p.ignore, 0.0);
        assert!((p.accept - 0.4).abs() < 1e-12);
    }

    #[test]
    fn unknown_state() {
        let err = toy().transition_probability(st(&[Click]), Hover, st(&[Click, Hover]), None);
        assert_eq!(err, Err(MdpError::UnknownState(st(&[Click]))));
    }

    #[test]
    fn feedback_requires_recommendation() {
        let mut m = toy();
        let err = m.record_feedback(InteractionState::EMPTY, Some(Brush), Reaction::Accept, None);
        assert_eq!(err.unwrap_err().code(), "NotRecommended");
        m.record_feedback(InteractionState::EMPTY, None, Reaction::Ignore, None)
            .unwrap();
        assert_eq!(m, toy());
    }

    #[test]
    fn accept_then_undo_restores_counts() {
        let mut m = toy();
        m.record_feedback(InteractionState::EMPTY, Some(Zoom), Reaction::Accept, None)
            .unwrap();
        assert_eq!(m.observations(st(&[Zoom]), None), 2);
        m.record_feedback(InteractionState::EMPTY, Some(Zoom), Reaction::Undo, None)
            .unwrap();
        assert_eq!(m.observations(st(&[Zoom]), None), 1);
        assert_eq!(m.global.undo_count(InteractionState::EMPTY), 3);
        assert_eq!(m.global.q(InteractionState::EMPTY, Zoom), -4.0);
    }

    #[test]
    fn reaction_parses() {
        assert_eq!("Export".parse::<Reaction>().unwrap(), Reaction::Export);
        assert!("maybe".parse::<Reaction>().is_err());
    }

    #[test]
    fn persisted_round_trip() {
        let mut m = toy();
        m.record_feedback(InteractionState::EMPTY, Some(Hover), Reaction::Export, None)
            .unwrap();
        let back = MdpModel::restore(&m.persist()).unwrap();
        assert_eq!(back, m);
        let bytes = m.persist();
        assert_eq!(
            MdpModel::restore(&bytes[..bytes.len() / 2])
                .unwrap_err()
                .code(),
            "CorruptModel"
        );
    }
}
