//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vizassist_core::ast::parse;
use vizassist_core::augment::{augment, registration_count, undo, History};
use vizassist_core::classifier::classify_svg;
use vizassist_core::corpus::{compute_stats, fixture_corpus, CodedExample, CorpusStats};
use vizassist_core::dataset::{load_dataset, select_attributes, DataFormat};
use vizassist_core::fitter::fit;
use vizassist_core::mdp::{cross_validate, seed, MdpConfig, MdpModel, Reaction, TIE_BREAK_ORDER};
use vizassist_core::templates::applicability;
use vizassist_core::{InteractionState, InteractionType, VizType};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn fitted(viz: VizType, data: &str) -> Result<String, String> {
    let text = fixture(&format!("{data}.csv"));
    let d = load_dataset(data, text.as_bytes(), DataFormat::Csv).map_err(|e| e.to_string())?;
    let b = select_attributes(&d, viz, &BTreeSet::new()).map_err(|e| e.to_string())?;
    Ok(fit(viz, &d, &b).map_err(|e| e.to_string())?.source)
}

fn corpus_of(sets: &[InteractionState]) -> CorpusStats {
    let rows: Vec<CodedExample> = sets
        .iter()
        .enumerate()
        .map(|(k, s)| CodedExample::new(format!("r{k}"), &["custom"], *s, true))
        .collect();
    compute_stats(&rows).unwrap()
}

fn corpus_stats() -> Check {
    let stats = compute_stats(&fixture_corpus()).map_err(|e| e.to_string())?;
    for (label, n, pct) in [
        ("bar", 251, 19.8),
        ("geographic", 192, 15.2),
        ("line", 137, 10.8),
    ] {
        let v = stats
            .viz_share(label)
            .ok_or_else(|| format!("no {label} row"))?;
        ensure(
            v.count == n && format!("{:.1}", v.percent) == format!("{pct:.1}"),
            || format!("{label}: n={} {:.1}%", v.count, v.percent),
        )?;
    }
    ensure(stats.viable_examples == 1228, || {
        format!("viable {}", stats.viable_examples)
    })?;
    ensure(
        stats.total_examples == 1500 && stats.interactive_examples == 659,
        || {
            format!(
                "interactive {}/{}",
                stats.interactive_examples, stats.total_examples
            )
        },
    )?;
    let frac = format!("{:.1}", 100.0 * stats.interactive_fraction());
    ensure(frac == "43.9", || format!("interactive {frac}%"))?;
    use InteractionType::*;
    for (i, n) in [(Hover, 390), (Visualize, 118), (Click, 100)] {
        ensure(stats.interaction_count(i) == n, || {
            format!("{i} n={}", stats.interaction_count(i))
        })?;
    }
    ensure(stats.distinct_pairs() == 39, || {
        format!("{} pairs", stats.distinct_pairs())
    })?;
    let share = (100.0 * stats.pair_share(Click, Hover)).round();
    ensure(share == 14.0, || format!("click+hover {share}%"))?;
    Ok("bar 19.8% (251), geographic 15.2% (192), line 10.8% (137), 1228 viable, 659/1500 interactive, 39 pairs".into())
}

/// Independent reference: raw example sets plus a log of feedback deltas.
struct Oracle {
    sets: Vec<InteractionState>,
    bonus: HashMap<InteractionState, i64>,
    exports: HashMap<InteractionState, u64>,
    undos: HashMap<InteractionState, u64>,
    q: HashMap<(InteractionState, InteractionType), f64>,
}

impl Oracle {
    fn obs(&self, s: InteractionState) -> u64 {
        let base = self
            .sets
            .iter()
            .filter(|t| s.iter().all(|i| t.contains(i)))
            .count() as i64;
        (base + self.bonus.get(&s).copied().unwrap_or(0)).max(0) as u64
    }

    fn probs(&self, s: InteractionState, i: InteractionType) -> Option<[f64; 4]> {
        let d = self.obs(s);
        if d == 0 {
            return None;
        }
        let d = d as f64;
        let a = if s.contains(i) {
            0.0
        } else {
            self.obs(s.with(i)) as f64 / d
        };
        let e = self.exports.get(&s).copied().unwrap_or(0) as f64 / d;
        let u = self.undos.get(&s).copied().unwrap_or(0) as f64 / d;
        let raw = a + e + u;
        Some(if raw > 1.0 {
            [a / raw, e / raw, u / raw, 0.0]
        } else {
            [a, e, u, 1.0 - raw]
        })
    }

    fn ranking(&self, s: InteractionState) -> Vec<(InteractionType, f64)> {
        if self.obs(s) == 0 {
            return Vec::new();
        }
        let mut out: Vec<(InteractionType, f64)> = InteractionType::ALL
            .into_iter()
            .filter(|&i| !s.contains(i) && self.obs(s.with(i)) > 0)
            .map(|i| {
                let q = self.q.get(&(s, i)).copied().unwrap_or(0.0);
                (i, self.probs(s, i).unwrap()[0] + 0.1 / (1.0 + (-q).exp()))
            })
            .collect();
        let pos = |i: InteractionType| TIE_BREAK_ORDER.iter().position(|&t| t == i).unwrap();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(pos(a.0).cmp(&pos(b.0))));
        out
    }

    fn apply(&mut self, s: InteractionState, i: InteractionType, r: Reaction) {
        let reward = match r {
            Reaction::Accept => 1.0,
            Reaction::Export => 5.0,
            Reaction::Undo => -5.0,
            Reaction::Ignore => 0.0,
        };
        match r {
            Reaction::Accept => *self.bonus.entry(s.with(i)).or_insert(0) += 1,
            Reaction::Export => *self.exports.entry(s).or_insert(0) += 1,
            Reaction::Undo => {
                *self.undos.entry(s).or_insert(0) += 1;
                if self.obs(s.with(i)) > 0 {
                    *self.bonus.entry(s.with(i)).or_insert(0) -= 1;
                }
            }
            Reaction::Ignore => {}
        }
        *self.q.entry((s, i)).or_insert(0.0) += reward;
    }
}

fn compare(m: &MdpModel, o: &Oracle) -> Result<(), String> {
    const TOL: f64 = 1e-9;
    for s in InteractionState::all() {
        for i in InteractionType::ALL {
            match (m.reaction_probabilities(s, i, None), o.probs(s, i)) {
                (Err(_), None) => {}
                (Ok(p), Some(want)) => {
                    let got = [p.accept, p.export, p.undo, p.ignore];
                    for k in 0..4 {
                        ensure((got[k] - want[k]).abs() < TOL, || {
                            format!("{s} {i}: {got:?} vs {want:?}")
                        })?;
                    }
                    if !s.contains(i) {
                        let t = m
                            .transition_probability(s, i, s.with(i), None)
                            .map_err(|e| e.to_string())?;
                        ensure((t - want[0]).abs() < TOL, || {
                            format!("T({s},{i}) {t} vs {}", want[0])
                        })?;
                    }
                }
                (got, want) => return Err(format!("{s} {i}: {got:?} vs {want:?}")),
            }
        }
        let got: Vec<(InteractionType, f64)> = m
            .recommend(s, None)
            .iter()
            .map(|r| (r.interaction, r.score))
            .collect();
        let want = o.ranking(s);
        ensure(got.len() == want.len(), || {
            format!("{s}: {got:?} vs {want:?}")
        })?;
        for (g, w) in got.iter().zip(&want) {
            ensure(g.0 == w.0 && (g.1 - w.1).abs() < TOL, || {
                format!("{s}: {got:?} vs {want:?}")
            })?;
        }
    }
    Ok(())
}

fn mdp_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut events = 0;
    for round in 0..200 {
        let mut alpha = InteractionType::ALL.to_vec();
        alpha.shuffle(&mut rng);
        alpha.truncate(rng.gen_range(1..=3));
        let n = rng.gen_range(1..=50);
        let sets: Vec<InteractionState> = (0..n)
            .map(|_| {
                alpha
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.5))
                    .collect()
            })
            .collect();
        let mut m = seed(&corpus_of(&sets)).map_err(|e| e.to_string())?;
        let mut o = Oracle {
            sets,
            bonus: HashMap::new(),
            exports: HashMap::new(),
            undos: HashMap::new(),
            q: HashMap::new(),
        };
        compare(&m, &o).map_err(|e| format!("corpus {round}: {e}"))?;
        for _ in 0..10 {
            let live: Vec<InteractionState> = InteractionState::all()
                .filter(|&s| !m.recommend(s, None).is_empty())
                .collect();
            let Some(&s) = live.choose(&mut rng) else {
                break;
            };
            let recs = m.recommend(s, None);
            let Some(rec) = recs.choose(&mut rng) else {
                continue;
            };
            let r = *Reaction::ALL.choose(&mut rng).unwrap();
            m.record_feedback(s, Some(rec.interaction), r, None)
                .map_err(|e| e.to_string())?;
            o.apply(s, rec.interaction, r);
            events += 1;
            compare(&m, &o).map_err(|e| format!("corpus {round} after {r:?}: {e}"))?;
        }
    }
    Ok(format!(
        "200 corpora, {events} feedback events, tolerance 1e-9"
    ))
}

fn fig5() -> Check {
    use InteractionType::*;
    let st = |v: &[InteractionType]| v.iter().copied().collect::<InteractionState>();
    let m = MdpModel::from_tables(
        &[(st(&[]), 10), (st(&[Hover]), 6), (st(&[Zoom]), 1)],
        &[],
        &[(st(&[]), 2)],
        MdpConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let d = m
        .state_distribution(InteractionState::EMPTY, None)
        .map_err(|e| e.to_string())?;
    ensure(d.accept == vec![(Hover, 0.6), (Zoom, 0.1)], || {
        format!("accept {:?}", d.accept)
    })?;
    ensure(d.undo == 0.2 && d.export == 0.0, || {
        format!("undo {} export {}", d.undo, d.export)
    })?;
    ensure((d.stay - 0.1).abs() < 1e-15, || format!("stay {}", d.stay))?;
    let order: Vec<_> = m
        .recommend(InteractionState::EMPTY, None)
        .iter()
        .map(|r| r.interaction)
        .collect();
    ensure(order == [Hover, Zoom], || format!("order {order:?}"))?;
    Ok("hover 0.6, zoom 0.1, undo 0.2, stay 0.1, ranked [hover, zoom]".into())
}

fn cross_validation() -> Check {
    let mut sets = vec![InteractionState::from_iter([InteractionType::Hover]); 76];
    sets.extend(vec![
        InteractionState::from_iter([InteractionType::Zoom]);
        24
    ]);
    let cv = cross_validate(&corpus_of(&sets), 1).map_err(|e| e.to_string())?;
    ensure(cv.overall == 0.76 && cv.evaluated == 100, || {
        format!("{}/{} = {}", cv.correct, cv.evaluated, cv.overall)
    })?;
    Ok(format!(
        "{}/{} = {:.2}",
        cv.correct, cv.evaluated, cv.overall
    ))
}

fn sequences(items: &[InteractionType], max: usize) -> Vec<Vec<InteractionType>> {
    let mut out = Vec::new();
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for seq in &frontier {
            for &i in items {
                if !seq.contains(&i) {
                    let mut s: Vec<InteractionType> = seq.clone();
                    s.push(i);
                    next.push(s);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn fit_augment_matrix() -> Check {
    let mut programs = 0;
    for data in ["iris", "cars"] {
        for viz in VizType::ALL {
            let base = fitted(viz, data)?;
            for seq in sequences(&applicability(viz), 3) {
                let mut source = base.clone();
                let mut state = InteractionState::EMPTY;
                for &i in &seq {
                    let out = augment(&source, i, viz, state)
                        .map_err(|e| format!("{viz}/{data} {seq:?}: {e}"))?;
                    let mut outside = out.source.clone();
                    for r in out.inserted_ranges.iter().rev() {
                        outside.replace_range(r.clone(), "");
                    }
                    ensure(outside == source, || {
                        format!("{viz}/{data} {seq:?}: bytes outside insertion changed")
                    })?;
                    source = out.source;
                    state = out.new_state;
                }
                let ast = parse(&source).map_err(|e| format!("{viz}/{data} {seq:?}: {e}"))?;
                for i in InteractionType::ALL {
                    let want = usize::from(seq.contains(&i));
                    let got = registration_count(&ast, i);
                    ensure(got == want, || {
                        format!("{viz}/{data} {seq:?}: {got} {i} registrations")
                    })?;
                }
                programs += 1;
            }
        }
    }
    Ok(format!("{programs} augmented programs"))
}

fn undo_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bases: Vec<(VizType, String)> = ["iris", "cars"]
        .iter()
        .flat_map(|d| VizType::ALL.map(|v| (v, d.to_string())))
        .map(|(v, d)| fitted(v, &d).map(|s| (v, s)))
        .collect::<Result<_, _>>()?;
    let mut model = seed(&compute_stats(&fixture_corpus()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut feedback = 0;
    for run in 0..500 {
        let (viz, base) = bases.choose(&mut rng).unwrap().clone();
        let mut source = base.clone();
        let mut state = InteractionState::EMPTY;
        let mut history = History::default();
        let mut stack: Vec<(String, InteractionState, InteractionType)> = Vec::new();
        for _ in 0..rng.gen_range(1..=10) {
            let recs: Vec<InteractionType> = model
                .recommend(state, Some(viz))
                .into_iter()
                .map(|r| r.interaction)
                .filter(|i| applicability(viz).contains(i))
                .collect();
            let do_undo = !stack.is_empty() && (recs.is_empty() || rng.gen_bool(0.35));
            let (s, i, reaction) = if do_undo {
                let snap = history.last().unwrap().clone();
                source = undo(&mut history).map_err(|e| e.to_string())?;
                let (prev, prev_state, _) = stack.pop().unwrap();
                ensure(source == prev, || {
                    format!("run {run}: undo differs from snapshot")
                })?;
                state = prev_state;
                (snap.state, snap.interaction, Reaction::Undo)
            } else if let Some(&i) = recs.choose(&mut rng) {
                let out = augment(&source, i, viz, state).map_err(|e| format!("run {run}: {e}"))?;
                history.push(source.clone(), state, i);
                stack.push((source, state, i));
                let s = state;
                source = out.source;
                state = out.new_state;
                (s, i, Reaction::Accept)
            } else {
                break;
            };
            if reaction == Reaction::Undo
                && !model
                    .recommend(s, Some(viz))
                    .iter()
                    .any(|r| r.interaction == i)
            {
                continue;
            }
            model
                .record_feedback(s, Some(i), reaction, Some(viz))
                .map_err(|e| e.to_string())?;
            feedback += 1;
            for t in InteractionState::all() {
                if model.observations(t, Some(viz)) == 0 {
                    continue;
                }
                for j in InteractionType::ALL {
                    let p = model
                        .reaction_probabilities(t, j, Some(viz))
                        .map_err(|e| e.to_string())?;
                    ensure((p.sum() - 1.0).abs() < 1e-9, || {
                        format!("run {run}: {t} {j} sums to {}", p.sum())
                    })?;
                }
            }
        }
        let mut replayed = base.clone();
        let mut replay_state = InteractionState::EMPTY;
        for &(_, _, i) in &stack {
            let out = augment(&replayed, i, viz, replay_state)
                .map_err(|e| format!("run {run} replay: {e}"))?;
            replayed = out.source;
            replay_state = out.new_state;
        }
        ensure(source == replayed && state == replay_state, || {
            format!("run {run}: source differs from replay")
        })?;
        while let Some((prev, _, _)) = stack.pop() {
            source = undo(&mut history).map_err(|e| e.to_string())?;
            ensure(source == prev, || {
                format!("run {run}: unwinding differs from snapshot")
            })?;
        }
        ensure(source == base, || {
            format!("run {run}: full unwind differs from base")
        })?;
    }
    Ok(format!("500 sequences, {feedback} feedback events"))
}

fn classifier_closed_loop() -> Check {
    let mut worst = 1.0f64;
    for data in ["iris", "cars"] {
        for viz in VizType::ALL {
            let c = classify_svg(&fixture(&format!("rendered/{viz}_{data}.svg")))
                .map_err(|e| e.to_string())?;
            ensure(c.viz == Some(viz) && c.confidence >= 0.8, || {
                format!("{viz}/{data}: {c:?}")
            })?;
            worst = worst.min(c.confidence);
        }
    }
    Ok(format!("12 renderings, min confidence {worst:.3}"))
}

fn attribute_selection() -> Check {
    let text = fixture("iris.csv");
    let d =
        load_dataset("iris.csv", text.as_bytes(), DataFormat::Csv).map_err(|e| e.to_string())?;
    let b =
        select_attributes(&d, VizType::Scatterplot, &BTreeSet::new()).map_err(|e| e.to_string())?;
    let (x, y) = (b.get("x"), b.get("y"));
    ensure(x == Some("sepalLength") && y == Some("sepalWidth"), || {
        format!("x={x:?} y={y:?}")
    })?;
    Ok("x=sepalLength, y=sepalWidth".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "corpus statistics",
            corpus_stats,
            Some(Duration::from_secs(5)),
        ),
        (
            "recommender oracle equivalence",
            mdp_oracle,
            Some(Duration::from_secs(30)),
        ),
        ("toy transition model", fig5, None),
        ("cross-validation harness", cross_validation, None),
        (
            "fit/augment matrix",
            fit_augment_matrix,
            Some(Duration::from_secs(60)),
        ),
        ("undo exactness", undo_exactness, None),
        ("classifier closed loop", classifier_closed_loop, None),
        ("attribute selection", attribute_selection, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(detail), Some(limit)) = (&result, limit) {
            if took > limit {
                result = Err(format!("{detail}; took {took:.2?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.2?}]");
            }
        }
    }
    match compute_stats(&fixture_corpus()).map(|s| cross_validate(&s, 3)) {
        Ok(Ok(cv)) => {
            let per: Vec<String> = cv
                .per_interaction
                .iter()
                .map(|(i, a)| format!("{i} {:.2}", a.accuracy))
                .collect();
            println!(
                "INFO  fixture corpus leave-one-out (k=3): overall {:.4}; {}",
                cv.overall,
                per.join(", ")
            );
        }
        other => println!("INFO  fixture corpus leave-one-out unavailable: {other:?}"),
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
