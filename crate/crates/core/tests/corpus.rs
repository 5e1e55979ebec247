use proptest::prelude::*;

use vizassist_core::corpus::{compute_stats, fixture_corpus, ingest, write_csv, CodedExample};
use vizassist_core::{InteractionState, InteractionType};

const LABELS: [&str; 5] = ["bar", "line", "scatterplot", "geographic", "custom"];

fn example() -> impl Strategy<Value = CodedExample> {
    (
        prop::sample::subsequence(LABELS.to_vec(), 1..=2),
        0u8..64,
        prop::bool::weighted(0.8),
    )
        .prop_map(|(labels, mask, viable)| {
            let set: InteractionState = InteractionType::ALL
                .into_iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, i)| i)
                .collect();
            CodedExample::new("x", &labels, set, viable)
        })
}

#[test]
fn fixture_counts_are_conserved() {
    let corpus = fixture_corpus();
    let stats = compute_stats(&corpus).unwrap();
    let viable: Vec<&CodedExample> = corpus.iter().filter(|e| e.viable).collect();
    assert_eq!(
        stats.viz.iter().map(|v| v.count).sum::<usize>(),
        stats.viz_instances
    );
    assert_eq!(
        stats.viz_instances,
        viable.iter().map(|e| e.viz.len()).sum::<usize>()
    );
    assert_eq!(
        stats.interaction_instances,
        viable.iter().map(|e| e.interactions.len()).sum::<usize>()
    );
    let total: f64 = stats.viz.iter().map(|v| v.percent).sum();
    assert!((total - 100.0).abs() < 0.1);
}

proptest! {
    #[test]
    fn stats_conserve_counts(rows in prop::collection::vec(example(), 1..80)) {
        let viable: Vec<&CodedExample> = rows.iter().filter(|e| e.viable).collect();
        let Ok(stats) = compute_stats(&rows) else {
            prop_assert!(viable.is_empty());
            return Ok(());
        };
        prop_assert_eq!(stats.viable_examples, viable.len());
        prop_assert_eq!(stats.viz.iter().map(|v| v.count).sum::<usize>(), stats.viz_instances);
        prop_assert_eq!(stats.interaction_instances, viable.iter().map(|e| e.interactions.len()).sum::<usize>());
        for i in InteractionType::ALL {
            let direct = viable.iter().filter(|e| e.interactions.contains(i)).count();
            prop_assert_eq!(stats.interaction_count(i), direct);
        }
        if stats.viz_instances > 0 {
            let total: f64 = stats.viz.iter().map(|v| v.percent).sum();
            prop_assert!((total - 100.0).abs() < 0.1);
        }
        for a in InteractionType::ALL {
            for b in InteractionType::ALL {
                prop_assert_eq!(stats.pair_count(a, b), stats.pair_count(b, a));
            }
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(example(), 1..40)) {
        let rows: Vec<CodedExample> = rows
            .into_iter()
            .enumerate()
            .map(|(k, mut e)| {
                e.id = format!("ex{k}");
                e
            })
            .collect();
        let back = ingest(write_csv(&rows).as_bytes()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(a.viable, b.viable);
            prop_assert_eq!(a.interactions, b.interactions);
            if a.viable {
                prop_assert_eq!(&a.viz, &b.viz);
            }
        }
    }
}
