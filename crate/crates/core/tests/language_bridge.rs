mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use fuzzy_des::automaton::EventId;
use fuzzy_des::controllability::check_controllable;
use fuzzy_des::language::{
    closed_loop_language, closed_loop_language_of_supervisor, consistency_check,
    containment_controllable, fsfc_closed_loop_is_controllable_language, fsfc_from_language,
    language_controllable, reach_of_language, supervisor_from_fsfc, supervisor_from_language,
    FuzzyLanguage,
};
use fuzzy_des::{fixtures, scale_product, ClosedLoop, Grade, MaxMinAutomaton, Word};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Direct reading of `K(s) ∧ uc(a) ∧ L(sa) ≤ K(sa)` over all words up to
/// `max_len`.
fn pointwise_oracle(aut: &MaxMinAutomaton, k: &BTreeMap<Word, P>, max_len: usize) -> bool {
    let degree = |w: &[EventId]| k.get(w).copied().unwrap_or(P::ZERO);
    words(aut.events().len(), max_len).iter().all(|w| {
        aut.event_ids().all(|e| {
            let mut x = w.clone();
            x.push(e);
            degree(w).min(aut.uc_degree(e)).min(aut.language_degree(&x)) <= degree(&x)
        })
    })
}

/// A random sublanguage of the generated language up to `depth`, as a map
/// including the empty word.
fn random_language(r: &mut ChaCha8Rng, aut: &MaxMinAutomaton, depth: usize) -> BTreeMap<Word, P> {
    let mut k = BTreeMap::from([(Vec::new(), P::ONE)]);
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for e in aut.event_ids() {
                let mut x = w.clone();
                x.push(e);
                let cap = k[w].min(aut.language_degree(&x));
                let allowed: Vec<P> = tenths()
                    .into_iter()
                    .filter(|v| !v.is_zero() && *v <= cap)
                    .collect();
                if allowed.is_empty() || r.gen_bool(0.4) {
                    continue;
                }
                let d = if r.gen_bool(0.3) {
                    cap
                } else {
                    *allowed.choose(r).unwrap()
                };
                k.insert(x.clone(), d);
                next.push(x);
            }
        }
        layer = next;
    }
    k
}

/// Raises degrees until `K(s) ∧ uc(a) ∧ L(sa) ≤ K(sa)` holds everywhere.
/// Gives up when the support would grow past `limit`.
fn close_uncontrollable(aut: &MaxMinAutomaton, k: &mut BTreeMap<Word, P>, limit: usize) -> bool {
    let mut stack: Vec<Word> = k.keys().cloned().collect();
    while let Some(w) = stack.pop() {
        let kd = k[&w];
        for e in aut.event_ids() {
            let mut x = w.clone();
            x.push(e);
            let forced = kd.min(aut.uc_degree(e)).min(aut.language_degree(&x));
            if forced.is_zero() {
                continue;
            }
            let slot = k.entry(x.clone()).or_insert(P::ZERO);
            if *slot < forced {
                *slot = forced;
                if x.len() > limit {
                    return false;
                }
                stack.push(x);
            }
        }
    }
    true
}

fn language(k: &BTreeMap<Word, P>) -> FuzzyLanguage<P> {
    FuzzyLanguage::new(k.iter().map(|(w, d)| (w.clone(), *d))).unwrap()
}

fn small_sparse() -> Shape {
    Shape {
        max_dim: 3,
        max_events: 3,
        sparsity: 0.6,
        ..Shape::small()
    }
}

#[test]
fn three_event_language_facts() {
    let aut = fixtures::three_event();
    let k = fixtures::three_event_language();
    assert_eq!(
        language_controllable(&aut, &k, k.depth() + 1).unwrap(),
        None
    );
    assert!(containment_controllable(&aut, &k));
    let table: BTreeMap<Word, P> = k.support().map(|(w, d)| (w.clone(), d)).collect();
    assert!(pointwise_oracle(&aut, &table, k.depth() + 1));

    let reach = reach_of_language(&aut, &k);
    let want: BTreeSet<_> = ["[0.9,0.1,0]", "[0.3,0.1,0]", "[0.2,0.1,0]"]
        .iter()
        .map(|x| s(x))
        .collect();
    assert_eq!(reach.members(), want);
    assert!(check_controllable(&aut, &reach).unwrap().is_controllable());

    // a2 and a3 both stand for [0.3,0.1,0] but allow a1 to different degrees.
    let c = consistency_check(&aut, &k).unwrap();
    assert_eq!(aut.format_word(&c.first), "a2");
    assert_eq!(aut.format_word(&c.second), "a3");
    assert_eq!(aut.event(c.event).name, "a1");
    assert!(fsfc_from_language(&aut, &k).is_err());

    let sup = supervisor_from_language(&aut, &k).unwrap();
    assert_eq!(closed_loop_language_of_supervisor(&aut, &sup, 5), k);
}

#[test]
fn admissible_controller_language_is_controllable() {
    let aut = fixtures::wastewater();
    let f = fixtures::admissible_controller();
    assert_eq!(
        fsfc_closed_loop_is_controllable_language(&aut, &f, 5).unwrap(),
        None
    );
    let cl = ClosedLoop::new(&aut, &f).unwrap();
    let sup = supervisor_from_fsfc(&aut, &f).unwrap();
    assert_eq!(
        closed_loop_language_of_supervisor(&aut, &sup, 5),
        closed_loop_language(&cl, 5)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// A state feedback controller's closed-loop language is controllable, and
    /// following the controller along the word gives the same language.
    #[test]
    fn fsfc_language_is_controllable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let aut = random_automaton(&mut r, &Shape::small());
        let f = random_fsfc(&mut r, &aut, &tenths());
        let cl = ClosedLoop::new(&aut, &f).unwrap();
        let max_len = 4;
        prop_assert_eq!(fsfc_closed_loop_is_controllable_language(&aut, &f, max_len).unwrap(), None);
        let table = degree_table(aut.events().len(), max_len, |w| cl.language_degree(w));
        let shorter: BTreeMap<Word, P> = table.iter().filter(|(w, _)| w.len() < max_len).map(|(w, d)| (w.clone(), *d)).collect();
        // Extensions of the shorter words are all in the table.
        let degree = |w: &[EventId]| table.get(w).copied().unwrap_or(P::ZERO);
        for (w, d) in &shorter {
            for e in aut.event_ids() {
                let mut x = w.clone();
                x.push(e);
                prop_assert!((*d).min(aut.uc_degree(e)).min(aut.language_degree(&x)) <= degree(&x));
            }
        }
        let sup = supervisor_from_fsfc(&aut, &f).unwrap();
        let by_supervisor = closed_loop_language_of_supervisor(&aut, &sup, max_len);
        prop_assert_eq!(&by_supervisor, &closed_loop_language(&cl, max_len));
        for (w, d) in &table {
            prop_assert_eq!(by_supervisor.degree(w), *d);
        }
    }

    /// The containment and pointwise readings of controllability agree.
    #[test]
    fn containment_matches_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let aut = random_automaton(&mut r, &small_sparse());
        let mut table = random_language(&mut r, &aut, 3);
        if r.gen_bool(0.5) && !close_uncontrollable(&aut, &mut table, 6) {
            return Ok(());
        }
        let k = language(&table);
        let horizon = k.depth() + 1;
        let oracle = pointwise_oracle(&aut, &table, horizon);
        prop_assert_eq!(language_controllable(&aut, &k, horizon).unwrap().is_none(), oracle);
        prop_assert_eq!(containment_controllable(&aut, &k), oracle);
    }

    /// A controllable consistent language is realised by the controller read
    /// off it: the closed loop tracks `K(s)·(q₀∘s)` on the support and
    /// reaches exactly `R(K)`. The language supervisor generates `K` too.
    #[test]
    fn language_controller_realises_language(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut aut = random_automaton(&mut r, &small_sparse());
        if r.gen_bool(0.5) {
            aut = fixtures::with_uc(&aut, P::ZERO);
        }
        // Truncated controller languages are consistent before closing.
        let mut table = if r.gen_bool(0.5) {
            random_language(&mut r, &aut, 3)
        } else {
            let f = random_fsfc(&mut r, &aut, &tenths());
            let cl = ClosedLoop::new(&aut, &f).unwrap();
            let depth = r.gen_range(1..=3);
            closed_loop_language(&cl, depth).support().map(|(w, d)| (w.clone(), d)).collect()
        };
        if !close_uncontrollable(&aut, &mut table, 6) {
            return Ok(());
        }
        let k = language(&table);
        prop_assert_eq!(language_controllable(&aut, &k, k.depth() + 1).unwrap(), None);
        let sup = supervisor_from_language(&aut, &k).unwrap();
        prop_assert_eq!(&closed_loop_language_of_supervisor(&aut, &sup, k.depth() + 2), &k);
        if consistency_check(&aut, &k).is_some() {
            prop_assert!(fsfc_from_language(&aut, &k).is_err());
            return Ok(());
        }
        let f = fsfc_from_language(&aut, &k).unwrap();
        let cl = ClosedLoop::new(&aut, &f).unwrap();
        for (w, d) in k.support() {
            prop_assert_eq!(cl.run(w), Some(scale_product(d, &aut.run(w))));
        }
        prop_assert_eq!(cl.reachable(), reach_of_language(&aut, &k).members());
    }
}
