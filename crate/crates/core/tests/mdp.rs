use proptest::prelude::*;

use vizassist_core::corpus::{compute_stats, fixture_corpus, CodedExample, CorpusStats};
use vizassist_core::mdp::{cross_validate, seed, MdpConfig, MdpModel, Reaction};
use vizassist_core::templates::applicability;
use vizassist_core::{InteractionState, InteractionType, VizType};

fn corpus(examples: &[(&str, InteractionState)]) -> CorpusStats {
    let rows: Vec<CodedExample> = examples
        .iter()
        .enumerate()
        .map(|(k, (viz, s))| CodedExample::new(format!("t{k}"), &[viz], *s, true))
        .collect();
    compute_stats(&rows).unwrap()
}

fn st(items: &[InteractionType]) -> InteractionState {
    items.iter().copied().collect()
}

/// Examples whose set contains `s`, counted directly.
fn brute_observations(sets: &[InteractionState], s: InteractionState) -> usize {
    sets.iter().filter(|t| s.is_subset_of(**t)).count()
}

#[test]
fn single_example_has_one_certain_edge() {
    let m = seed(&corpus(&[("custom", st(&[InteractionType::Hover]))])).unwrap();
    let recs = m.recommend(InteractionState::EMPTY, None);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].interaction, InteractionType::Hover);
    let p = m
        .transition_probability(
            InteractionState::EMPTY,
            InteractionType::Hover,
            st(&[InteractionType::Hover]),
            None,
        )
        .unwrap();
    assert_eq!(p, 1.0);
}

#[test]
fn accept_ratio_before_normalization() {
    let m = MdpModel::from_tables(
        &[
            (InteractionState::EMPTY, 100),
            (st(&[InteractionType::Hover]), 60),
        ],
        &[],
        &[],
        MdpConfig::default(),
    )
    .unwrap();
    let p = m
        .reaction_probabilities(InteractionState::EMPTY, InteractionType::Hover, None)
        .unwrap();
    assert!((p.accept - 0.6).abs() < 1e-12);
    assert!((p.ignore - 0.4).abs() < 1e-12);
    let absent = m
        .transition_probability(
            InteractionState::EMPTY,
            InteractionType::Zoom,
            st(&[InteractionType::Zoom]),
            None,
        )
        .unwrap();
    assert_eq!(absent, 0.0);
}

#[test]
fn empty_corpus_is_rejected() {
    let rows = vec![CodedExample::new("x", &[], InteractionState::EMPTY, false)];
    match compute_stats(&rows) {
        Ok(stats) => assert_eq!(seed(&stats).unwrap_err().code(), "EmptyCorpus"),
        Err(e) => assert_eq!(e.code(), "NoViableExamples"),
    }
}

#[test]
fn fixture_model_ranks_hover_first() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let m = seed(&stats).unwrap();
    assert_eq!(
        m.recommend(InteractionState::EMPTY, None)[0].interaction,
        InteractionType::Hover
    );
    for viz in [
        VizType::Scatterplot,
        VizType::Bar,
        VizType::Line,
        VizType::Graph,
        VizType::Area,
        VizType::Pie,
    ] {
        assert_eq!(
            m.recommend(InteractionState::EMPTY, Some(viz))[0].interaction,
            InteractionType::Hover,
            "{viz}"
        );
    }
}

#[test]
fn terminal_state_has_no_recommendations() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let m = seed(&stats).unwrap();
    for viz in VizType::ALL {
        let full: InteractionState = applicability(viz).into_iter().collect();
        assert!(m.recommend(full, Some(viz)).is_empty(), "{viz}");
    }
}

#[test]
fn unknown_viz_name() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let m = seed(&stats).unwrap();
    assert_eq!(
        m.recommend_named(InteractionState::EMPTY, "radar")
            .unwrap_err()
            .code(),
        "UnknownVizType"
    );
}

#[test]
fn ignore_leaves_recommendations_unchanged() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let mut m = seed(&stats).unwrap();
    let before = m.recommend(InteractionState::EMPTY, Some(VizType::Bar));
    m.record_feedback(
        InteractionState::EMPTY,
        None,
        Reaction::Ignore,
        Some(VizType::Bar),
    )
    .unwrap();
    m.record_feedback(
        InteractionState::EMPTY,
        Some(InteractionType::Zoom),
        Reaction::Ignore,
        Some(VizType::Bar),
    )
    .unwrap();
    assert_eq!(
        m.recommend(InteractionState::EMPTY, Some(VizType::Bar)),
        before
    );
}

#[test]
fn accept_raises_score() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let mut m = seed(&stats).unwrap();
    let score = |m: &MdpModel| {
        m.recommend(InteractionState::EMPTY, Some(VizType::Line))
            .into_iter()
            .find(|r| r.interaction == InteractionType::Hover)
            .unwrap()
            .score
    };
    let before = score(&m);
    m.record_feedback(
        InteractionState::EMPTY,
        Some(InteractionType::Hover),
        Reaction::Accept,
        Some(VizType::Line),
    )
    .unwrap();
    assert!(score(&m) > before);
}

#[test]
fn repeated_undo_is_monotone_and_bounded() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let mut m = seed(&stats).unwrap();
    let s = InteractionState::EMPTY;
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let Some(r) = m
            .recommend(s, Some(VizType::Area))
            .into_iter()
            .find(|r| r.interaction == InteractionType::Hover)
        else {
            break;
        };
        assert!(r.score <= last);
        assert!(r.score >= 0.0);
        last = r.score;
        m.record_feedback(
            s,
            Some(InteractionType::Hover),
            Reaction::Undo,
            Some(VizType::Area),
        )
        .unwrap();
    }
}

#[test]
fn leave_one_out_counting_oracle() {
    let mut rows = vec![("custom", st(&[InteractionType::Hover])); 76];
    rows.extend(vec![("custom", st(&[InteractionType::Zoom])); 24]);
    let cv = cross_validate(&corpus(&rows), 1).unwrap();
    assert_eq!(cv.evaluated, 100);
    assert!((cv.overall - 0.76).abs() < 1e-12);
    assert_eq!(cv.per_interaction[&InteractionType::Zoom].correct, 0);

    let all_hover = vec![("custom", st(&[InteractionType::Hover])); 20];
    assert_eq!(cross_validate(&corpus(&all_hover), 3).unwrap().overall, 1.0);
}

#[test]
fn persisted_model_is_small_and_faithful() {
    let stats = compute_stats(&fixture_corpus()).unwrap();
    let mut m = seed(&stats).unwrap();
    m.record_feedback(
        InteractionState::EMPTY,
        Some(InteractionType::Hover),
        Reaction::Export,
        Some(VizType::Bar),
    )
    .unwrap();
    let bytes = m.persist();
    assert!(bytes.len() < 1 << 20);
    let back = MdpModel::restore(&bytes).unwrap();
    for s in InteractionState::all() {
        for viz in VizType::ALL {
            assert_eq!(back.recommend(s, Some(viz)), m.recommend(s, Some(viz)));
        }
        assert_eq!(back.recommend(s, None), m.recommend(s, None));
    }
    assert_eq!(
        MdpModel::restore(b"{\"version\":1}").unwrap_err().code(),
        "CorruptModel"
    );
    assert_eq!(MdpModel::restore(b"").unwrap_err().code(), "CorruptModel");
}

fn small_corpus() -> impl Strategy<Value = (Vec<InteractionType>, Vec<InteractionState>)> {
    let alphabet = proptest::sample::subsequence(InteractionType::ALL.to_vec(), 1..=3);
    alphabet.prop_flat_map(|alpha| {
        let n = alpha.len();
        let a2 = alpha.clone();
        let sets = proptest::collection::vec(0u8..(1 << n), 1..=50).prop_map(move |masks| {
            masks
                .into_iter()
                .map(|m| {
                    (0..n)
                        .filter(|b| m & (1 << b) != 0)
                        .map(|b| a2[b])
                        .collect::<InteractionState>()
                })
                .collect::<Vec<_>>()
        });
        (Just(alpha), sets)
    })
}

fn reaction() -> impl Strategy<Value = Reaction> {
    prop_oneof![
        Just(Reaction::Accept),
        Just(Reaction::Export),
        Just(Reaction::Undo),
        Just(Reaction::Ignore)
    ]
}

proptest! {
    #[test]
    fn transition_probabilities_match_brute_force((alpha, sets) in small_corpus()) {
        let rows: Vec<(&str, InteractionState)> = sets.iter().map(|s| ("custom", *s)).collect();
        let m = seed(&corpus(&rows)).unwrap();
        for s in InteractionState::all() {
            let base = brute_observations(&sets, s);
            for &i in &alpha {
                if s.contains(i) { continue; }
                let got = m.transition_probability(s, i, s.with(i), None);
                if base == 0 {
                    prop_assert!(got.is_err());
                } else {
                    let want = brute_observations(&sets, s.with(i)) as f64 / base as f64;
                    prop_assert!((got.unwrap() - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn probabilities_close_after_feedback(
        (alpha, sets) in small_corpus(),
        ops in proptest::collection::vec((0usize..64, 0usize..6, reaction()), 0..40),
    ) {
        let rows: Vec<(&str, InteractionState)> = sets.iter().map(|s| ("custom", *s)).collect();
        let mut m = seed(&corpus(&rows)).unwrap();
        let states: Vec<InteractionState> = InteractionState::all().collect();
        for (si, ii, r) in ops {
            let s = states[si];
            let recs = m.recommend(s, None);
            if recs.is_empty() { continue; }
            let i = recs[ii % recs.len()].interaction;
            m.record_feedback(s, Some(i), r, None).unwrap();
        }
        for s in InteractionState::all() {
            if m.observations(s, None) == 0 { continue; }
            for i in InteractionType::ALL {
                let p = m.reaction_probabilities(s, i, None).unwrap();
                prop_assert!((p.sum() - 1.0).abs() < 1e-9);
                for r in Reaction::ALL {
                    prop_assert!(p.get(r) >= 0.0);
                }
            }
            for rec in m.recommend(s, None) {
                prop_assert!(!s.contains(rec.interaction));
                prop_assert!(alpha.contains(&rec.interaction));
            }
        }
    }

    #[test]
    fn single_reaction_moves_rank_the_right_way(
        (_alpha, sets) in small_corpus(),
        si in 0usize..64,
        pick in 0usize..6,
        accept in any::<bool>(),
    ) {
        let rows: Vec<(&str, InteractionState)> = sets.iter().map(|s| ("custom", *s)).collect();
        let mut m = seed(&corpus(&rows)).unwrap();
        let open: Vec<InteractionState> =
            InteractionState::all().filter(|s| !m.recommend(*s, None).is_empty()).collect();
        prop_assume!(!open.is_empty());
        let s = open[si % open.len()];
        let recs = m.recommend(s, None);
        let target = recs[pick % recs.len()].clone();
        let reaction = if accept { Reaction::Accept } else { Reaction::Undo };
        m.record_feedback(s, Some(target.interaction), reaction, None).unwrap();
        let after = m.recommend(s, None).into_iter().find(|r| r.interaction == target.interaction);
        match (accept, after) {
            (true, Some(r)) => prop_assert!(r.rank <= target.rank),
            (true, None) => prop_assert!(false, "accepted interaction vanished"),
            (false, Some(r)) => prop_assert!(r.rank >= target.rank),
            (false, None) => {}
        }
    }

    #[test]
    fn recommendations_respect_applicability(viz_ix in 0usize..6, si in 0usize..64) {
        let stats = compute_stats(&fixture_corpus()).unwrap();
        let m = seed(&stats).unwrap();
        let viz = VizType::ALL[viz_ix];
        let s = InteractionState::all().nth(si).unwrap();
        let allowed = applicability(viz);
        let recs = m.recommend(s, Some(viz));
        for w in recs.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
        }
        for r in recs {
            prop_assert!(allowed.contains(&r.interaction));
            prop_assert!(!s.contains(r.interaction));
            prop_assert!(m.observations(s.with(r.interaction), Some(viz)) > 0);
        }
    }
}
