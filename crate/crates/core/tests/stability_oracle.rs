mod common;

use std::collections::BTreeSet;

use common::*;
use fuzzy_des::automaton::EventId;
use fuzzy_des::controllability::check_controllable;
use fuzzy_des::graph::TransitionGraph;
use fuzzy_des::stability::{
    check_attractor, check_attractor_mask, check_controllable_invariant, closed_loop_graph,
    find_cycles, infimal_attractor, is_stable, largest_controllable_invariant, search_grid,
    search_stabilizing_witness, synthesize_stabilizing_controller, verify_stabilizability_witness,
    StabilizabilityCandidate,
};
use fuzzy_des::{
    fixtures, scale_product, ClosedLoop, EventMatrix, FuzzyEvent, FuzzyState, Grade,
    MaxMinAutomaton, StateSet,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random graph on at most `max_vertices` one-component states, restricted
/// to what the root reaches.
fn random_graph(r: &mut ChaCha8Rng, max_vertices: usize) -> TransitionGraph<P> {
    let n = r.gen_range(1..=max_vertices);
    let events = r.gen_range(1..=2);
    let table: Vec<Vec<Option<usize>>> = (0..n)
        .map(|_| {
            (0..events)
                .map(|_| r.gen_bool(0.7).then(|| r.gen_range(0..n)))
                .collect()
        })
        .collect();
    let label = |k: usize| FuzzyState::new(vec![P::tenths(k as u32 + 1)]);
    let names = (0..events).map(|e| format!("e{e}")).collect();
    TransitionGraph::explore(label(0), names, |q, e| {
        let k = (0..n).find(|&k| label(k) == *q).unwrap();
        table[k][e.0].map(label)
    })
}

/// Invariance decided from the shape of scaled states: `α·x = p` for some
/// `α ≥ uc` iff it holds for `α = 1` or `α` a component of `p`.
fn invariant_oracle(aut: &MaxMinAutomaton, set: &[FuzzyState]) -> bool {
    set.iter().all(|q| {
        aut.event_ids().all(|e| {
            let uc = aut.uc_degree(e);
            let x = aut.step(q, e);
            if uc.is_zero() || x.is_zero() {
                return true;
            }
            set.iter().any(|p| {
                p.components()
                    .iter()
                    .copied()
                    .chain([P::ONE])
                    .any(|alpha| alpha >= uc && scale_product(alpha, &x) == *p)
            })
        })
    })
}

#[test]
fn three_event_open_loop_attractor() {
    let aut = fixtures::three_event();
    let g = aut.accessible_part();
    let target = s("[0.4,0.1,0]");
    assert!(check_attractor(&g, std::slice::from_ref(&target)).verdict());
    let inf: Vec<FuzzyState> = (0..g.len())
        .filter(|&v| infimal_attractor(&g)[v])
        .map(|v| g.vertex(v).clone())
        .collect();
    assert_eq!(inf, vec![target.clone()]);
    assert!(is_stable(&g, &[target]));
    assert!(!is_stable(&g, &[]));
    let set = StateSet::new(vec![s("[0.4,0.1,0]")]).unwrap();
    assert_eq!(check_controllable_invariant(&aut, &set).unwrap(), None);
}

#[test]
fn wastewater_open_loop_is_unstable_for_admissible_states() {
    let aut = fixtures::wastewater();
    let g = aut.accessible_part();
    // q0 has a self-loop under d, so it belongs to every attractor.
    let cycles = find_cycles(&g);
    assert!(cycles[0]);
    let all: Vec<FuzzyState> = g.vertices().to_vec();
    assert!(is_stable(&g, &all));
}

/// Three states, a partially uncontrollable event `u` and a controllable
/// event `c`. The controller reaching `P` uses `u` at full strength from the
/// initial state, which must be lowered to 0.5 to stay legal.
fn partially_uncontrollable() -> MaxMinAutomaton {
    let u = EventMatrix::from_rows(vec![
        vec![P::ZERO, P::ONE, P::ZERO],
        vec![P::ZERO, P::ONE, P::ZERO],
        vec![P::ZERO; 3],
    ])
    .unwrap();
    let c = EventMatrix::from_rows(vec![
        vec![P::ZERO, P::ZERO, P::ONE],
        vec![P::ZERO; 3],
        vec![P::ONE, P::ZERO, P::ZERO],
    ])
    .unwrap();
    MaxMinAutomaton::with_default_labels(
        s("[1,0,0]"),
        vec![
            FuzzyEvent::new("u", u, p("0.5")),
            FuzzyEvent::new("c", c, P::ZERO),
        ],
    )
    .unwrap()
}

#[test]
fn redirection_uses_least_admissible_scale() {
    let aut = partially_uncontrollable();
    let legal = StateSet::new(vec![s("[1,0,0]"), s("[0,0.5,0]")]).unwrap();
    let candidate = StabilizabilityCandidate {
        n_prime: legal.clone(),
        p_set: StateSet::new(vec![
            s("[1,0,0]"),
            s("[0,1,0]"),
            s("[0,0.5,0]"),
            s("[0,0,1]"),
        ])
        .unwrap(),
    };
    let out = synthesize_stabilizing_controller(&aut, &legal, &candidate).unwrap();
    assert!(out.report.verdict());
    let (u, c) = (EventId(0), EventId(1));
    let q0 = s("[1,0,0]");
    assert_eq!(out.base_controller.get(&q0, u), P::ONE);
    assert_eq!(out.base_controller.get(&q0, c), P::ONE);
    assert_eq!(out.controller.get(&q0, u), p("0.5"));
    assert_eq!(out.controller.get(&q0, c), P::ZERO);
    let reached = ClosedLoop::new(&aut, &out.controller).unwrap().reachable();
    assert_eq!(reached, legal.members());
    let g = closed_loop_graph(&aut, &out.controller).unwrap();
    let mask: Vec<bool> = g.vertices().iter().map(|q| legal.contains(q)).collect();
    assert!(attractor_oracle(&g, &mask));
}

#[test]
fn witness_with_cycle_outside_is_rejected() {
    let aut = partially_uncontrollable();
    let legal = StateSet::new(vec![s("[0,1,0]")]).unwrap();
    // [0,0,1] is reached only by c from q0 and can only leave by c back to q0.
    let candidate = StabilizabilityCandidate {
        n_prime: legal.clone(),
        p_set: StateSet::new(vec![s("[1,0,0]"), s("[0,0,1]"), s("[0,1,0]")]).unwrap(),
    };
    let report = verify_stabilizability_witness(&aut, &legal, &candidate).unwrap();
    assert!(report.invariant && report.p_controllable);
    assert!(!report.connected_acyclic);
    assert!(synthesize_stabilizing_controller(&aut, &legal, &candidate).is_err());
    let shorter = StabilizabilityCandidate {
        n_prime: legal.clone(),
        p_set: StateSet::new(vec![s("[1,0,0]"), s("[0,1,0]")]).unwrap(),
    };
    assert!(verify_stabilizability_witness(&aut, &legal, &shorter)
        .unwrap()
        .verdict());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Over every vertex subset: the attractor check matches the definition,
    /// the infimal attractor is the least attractor, and attractors are
    /// closed under intersection.
    #[test]
    fn attractor_subset_sweep(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 8);
        let n = g.len();
        let all = paths(&g, &vec![true; n]);
        let cycles: Vec<bool> = (0..n).map(|v| all[v][v]).collect();
        prop_assert_eq!(find_cycles(&g), cycles);
        let attractors: Vec<Vec<bool>> = subsets(n)
            .filter(|mask| {
                let verdict = attractor_oracle(&g, mask);
                assert_eq!(check_attractor_mask(&g, mask).verdict(), verdict, "{mask:?}");
                verdict
            })
            .collect();
        let least = (0..n).map(|v| attractors.iter().all(|m| m[v])).collect::<Vec<_>>();
        prop_assert!(attractors.contains(&least));
        prop_assert_eq!(infimal_attractor(&g), least);
        for a in &attractors {
            for b in &attractors {
                let meet: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x && *y).collect();
                prop_assert!(check_attractor_mask(&g, &meet).verdict());
            }
        }
    }

    /// Any attractor of a closed loop is controllable invariant, and the
    /// reachable set is controllable.
    #[test]
    fn closed_loop_attractors_are_controllable_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let aut = random_automaton(&mut r, &Shape::small());
        let f = random_fsfc(&mut r, &aut, &tenths());
        let g = closed_loop_graph(&aut, &f).unwrap();
        let reached = StateSet::new(g.vertices().to_vec()).unwrap();
        prop_assert!(check_controllable(&aut, &reached).unwrap().is_controllable());
        let masks: Vec<Vec<bool>> = if g.len() <= 8 {
            subsets(g.len()).filter(|m| check_attractor_mask(&g, m).verdict()).collect()
        } else {
            vec![infimal_attractor(&g)]
        };
        for mask in masks {
            let states: Vec<FuzzyState> = (0..g.len()).filter(|&v| mask[v]).map(|v| g.vertex(v).clone()).collect();
            prop_assert!(invariant_oracle(&aut, &states));
            let set = StateSet::new(states).unwrap();
            prop_assert_eq!(check_controllable_invariant(&aut, &set).unwrap(), None);
        }
    }

    /// The largest controllable invariant subset is invariant, and adding
    /// back any removed state breaks invariance. For small sets it equals the
    /// union of all invariant subsets.
    #[test]
    fn largest_invariant_is_maximal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let aut = random_automaton(&mut r, &Shape::small());
        let legal = random_legal(&mut r, &aut, &tenths());
        let set = StateSet::new(legal.clone()).unwrap();
        let largest = largest_controllable_invariant(&aut, &set).unwrap();
        prop_assert!(largest.is_subset_of(&set));
        prop_assert!(invariant_oracle(&aut, largest.states()));
        for q in set.iter().filter(|q| !largest.contains(q)) {
            let mut more = largest.states().to_vec();
            more.push(q.clone());
            prop_assert!(!invariant_oracle(&aut, &more));
        }
        if legal.len() <= 10 {
            let mut union = BTreeSet::new();
            for mask in subsets(legal.len()) {
                let sub: Vec<FuzzyState> = legal.iter().zip(&mask).filter(|(_, &b)| b).map(|(q, _)| q.clone()).collect();
                if invariant_oracle(&aut, &sub) {
                    union.extend(sub);
                }
            }
            prop_assert_eq!(largest.members(), union);
        }
    }

    /// The witness search agrees with exhaustive enumeration of grid-valued
    /// controllers, and every witness it returns is sound.
    #[test]
    fn witness_search_matches_exhaustive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let aut = random_automaton(&mut r, &tiny_shape());
        let legal = random_legal(&mut r, &aut, &halves());
        let set = StateSet::new(legal.clone()).unwrap();
        let grid = search_grid(&aut, &set);
        let found = search_stabilizing_witness(&aut, &set, 10_000).unwrap();
        let legal_set: BTreeSet<FuzzyState> = legal.iter().cloned().collect();
        if let Some(expected) = stabilizable_oracle(&aut, &legal_set, &grid, 200_000) {
            prop_assert_eq!(found.is_some(), expected);
        }
        if let Some(w) = found {
            let g = closed_loop_graph(&aut, &w.controller).unwrap();
            prop_assert!(is_stable(&g, &legal));
            let mask: Vec<bool> = g.vertices().iter().map(|q| w.candidate.n_prime.contains(q)).collect();
            prop_assert!(attractor_oracle(&g, &mask));
            prop_assert!(w.candidate.n_prime.is_subset_of(&set));
            let out = synthesize_stabilizing_controller(&aut, &set, &w.candidate).unwrap();
            prop_assert!(out.report.verdict());
            let g = closed_loop_graph(&aut, &out.controller).unwrap();
            let mask: Vec<bool> = g.vertices().iter().map(|q| w.candidate.n_prime.contains(q)).collect();
            prop_assert!(attractor_oracle(&g, &mask));
        }
    }
}
