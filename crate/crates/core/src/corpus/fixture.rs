//! Synthetic corpus pinned to fixed aggregate counts for a coded set of
//! D3 examples: 1500 examples, 1228 viable, 659 interactive, the
//! per-type visualization counts, the per-interaction counts and the
//! pairing statistics. The micro-data (which example has which set) is
//! invented; only the marginals are pinned.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{write_csv, CodedExample};
use crate::vocab::InteractionState;

const TOTAL: usize = 1500;
const SHUFFLE_SEED: u64 = 1228;

/// Visualization instances per label among viable examples.
const LABEL_TOTALS: [(&str, usize); 22] = [
    ("bar", 251),
    ("geographic", 192),
    ("line", 137),
    ("scatterplot", 120),
    ("graph", 98),
    ("area", 50),
    ("pie", 40),
    ("histogram", 24),
    ("heatmap", 13),
    ("voronoi", 11),
    ("tree", 10),
    ("sankey", 10),
    ("sunburst", 10),
    ("donut", 9),
    ("parallel_coordinates", 4),
    ("word_cloud", 4),
    ("box_plot", 3),
    ("hexbin", 3),
    ("radial", 3),
    ("stream_graph", 3),
    ("waffle", 1),
    ("custom", 271),
];

/// Examples combining two charts; none of them is interactive.
const DOUBLE_LABELS: [(&str, &str, usize); 3] = [
    ("bar", "line", 10),
    ("geographic", "bar", 15),
    ("custom", "geographic", 14),
];

/// Interactive single-label examples: (label, interaction set, count).
const INTERACTIVE: &[(&str, &str, usize)] = &[
    ("line", "hover", 30),
    ("line", "zoom", 8),
    ("line", "brush", 4),
    ("line", "click", 4),
    ("line", "drag", 2),
    ("line", "visualize", 6),
    ("line", "hover;zoom", 6),
    ("line", "click;hover", 4),
    ("line", "brush;zoom", 2),
    ("line", "hover;visualize", 2),
    ("line", "drag;hover", 1),
    ("line", "click;hover;zoom", 1),
    ("graph", "hover", 22),
    ("graph", "drag", 16),
    ("graph", "click", 6),
    ("graph", "zoom", 6),
    ("graph", "drag;hover", 12),
    ("graph", "drag;zoom", 8),
    ("graph", "click;hover", 4),
    ("graph", "hover;zoom", 3),
    ("graph", "click;drag", 2),
    ("graph", "drag;hover;zoom", 1),
    ("scatterplot", "hover", 30),
    ("scatterplot", "zoom", 8),
    ("scatterplot", "click", 4),
    ("scatterplot", "brush", 5),
    ("scatterplot", "drag", 2),
    ("scatterplot", "visualize", 6),
    ("scatterplot", "click;hover", 5),
    ("scatterplot", "hover;zoom", 4),
    ("scatterplot", "brush;hover", 2),
    ("scatterplot", "hover;visualize", 2),
    ("scatterplot", "drag;zoom", 1),
    ("scatterplot", "click;hover;zoom", 1),
    ("bar", "hover", 58),
    ("bar", "click", 12),
    ("bar", "zoom", 6),
    ("bar", "brush", 4),
    ("bar", "drag", 3),
    ("bar", "click;hover", 10),
    ("bar", "hover;zoom", 3),
    ("bar", "brush;hover", 2),
    ("bar", "drag;hover", 1),
    ("bar", "click;hover;zoom", 1),
    ("area", "hover", 12),
    ("area", "brush", 5),
    ("area", "brush;hover", 3),
    ("pie", "hover", 9),
    ("pie", "click", 4),
    ("pie", "click;hover", 2),
    ("geographic", "hover;visualize;zoom", 10),
    ("geographic", "hover;zoom", 19),
    ("geographic", "hover;visualize", 15),
    ("geographic", "visualize;zoom", 5),
    ("geographic", "click;hover", 3),
    ("geographic", "hover", 50),
    ("geographic", "visualize", 20),
    ("geographic", "zoom", 5),
    ("geographic", "click", 10),
    ("custom", "brush;visualize;zoom", 6),
    ("custom", "drag;visualize", 10),
    ("custom", "click;visualize", 10),
    ("custom", "brush;drag", 5),
    ("custom", "drag;zoom", 5),
    ("custom", "hover", 30),
    ("custom", "visualize", 26),
    ("custom", "drag", 13),
    ("custom", "click", 9),
    ("custom", "brush", 5),
    ("histogram", "brush;hover", 3),
    ("histogram", "hover", 10),
    ("histogram", "brush", 2),
    ("heatmap", "hover;zoom", 2),
    ("heatmap", "hover", 5),
    ("heatmap", "click", 2),
    ("tree", "click;drag", 2),
    ("tree", "click", 4),
    ("tree", "drag", 2),
    ("tree", "zoom", 2),
    ("sankey", "drag;hover", 2),
    ("sankey", "drag", 2),
    ("voronoi", "hover", 5),
    ("sunburst", "hover", 5),
];

/// The fixture examples in their shipped order.
pub fn fixture_corpus() -> Vec<CodedExample> {
    let mut rows: Vec<(Vec<&str>, InteractionState, bool)> = Vec::with_capacity(TOTAL);
    let mut remaining: Vec<(&str, usize)> = LABEL_TOTALS.to_vec();
    let mut take = |label: &str, n: usize| {
        let slot = remaining
            .iter_mut()
            .find(|(l, _)| *l == label)
            .expect("known label");
        slot.1 = slot.1.checked_sub(n).expect("label budget exceeded");
    };
    for &(a, b, n) in &DOUBLE_LABELS {
        take(a, n);
        take(b, n);
        rows.extend((0..n).map(|_| (vec![a, b], InteractionState::EMPTY, true)));
    }
    for &(label, set, n) in INTERACTIVE {
        take(label, n);
        let state = InteractionState::parse_key(set).expect("valid interaction tokens");
        rows.extend((0..n).map(|_| (vec![label], state, true)));
    }
    for (label, n) in remaining {
        rows.extend((0..n).map(|_| (vec![label], InteractionState::EMPTY, true)));
    }
    let non_viable = TOTAL - rows.len();
    rows.extend((0..non_viable).map(|_| (Vec::new(), InteractionState::EMPTY, false)));
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    rows.into_iter()
        .enumerate()
        .map(|(k, (viz, interactions, viable))| {
            CodedExample::new(format!("ex{:04}", k + 1), &viz, interactions, viable)
        })
        .collect()
}

/// The fixture serialized in the corpus CSV schema.
pub fn fixture_csv() -> String {
    write_csv(&fixture_corpus())
}
