//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use fuzzy_des::automaton::EventId;
use fuzzy_des::graph::TransitionGraph;
use fuzzy_des::stability::is_stable;
use fuzzy_des::Grade;
use fuzzy_des::{
    scale_product, EventMatrix, Fsfc, FuzzyEvent, FuzzyState, MaxMinAutomaton, Possibility, Word,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type P = Possibility;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(text: &str) -> P {
    text.parse().unwrap()
}

pub fn s(text: &str) -> FuzzyState {
    text.parse().unwrap()
}

/// `{0, 0.1, …, 1}`.
pub fn tenths() -> Vec<P> {
    (0..=10).map(Possibility::tenths).collect()
}

/// Shape of a random automaton.
#[derive(Clone, Debug)]
pub struct Shape {
    pub max_dim: usize,
    pub max_events: usize,
    pub values: Vec<P>,
    /// Probability that a matrix entry is zero.
    pub sparsity: f64,
}

impl Shape {
    pub fn small() -> Self {
        Shape {
            max_dim: 4,
            max_events: 3,
            values: tenths(),
            sparsity: 0.5,
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, values: &[P]) -> P {
    *values.choose(rng).unwrap()
}

fn uc(rng: &mut ChaCha8Rng, values: &[P]) -> P {
    match rng.gen_range(0..10) {
        0..=2 => P::ZERO,
        3 => P::ONE,
        _ => pick(rng, values),
    }
}

pub fn random_automaton(rng: &mut ChaCha8Rng, shape: &Shape) -> MaxMinAutomaton {
    let n = rng.gen_range(1..=shape.max_dim);
    let m = rng.gen_range(1..=shape.max_events);
    let nonzero: Vec<P> = shape
        .values
        .iter()
        .copied()
        .filter(|v| !v.is_zero())
        .collect();
    let mut initial: Vec<P> = (0..n).map(|_| pick(rng, &shape.values)).collect();
    if initial.iter().all(|v| v.is_zero()) {
        let i = rng.gen_range(0..n);
        initial[i] = pick(rng, &nonzero);
    }
    let events = (0..m)
        .map(|k| {
            let rows = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.gen_bool(shape.sparsity) {
                                P::ZERO
                            } else {
                                pick(rng, &nonzero)
                            }
                        })
                        .collect()
                })
                .collect();
            let uc = uc(rng, &shape.values);
            FuzzyEvent::new(format!("e{k}"), EventMatrix::from_rows(rows).unwrap(), uc)
        })
        .collect();
    MaxMinAutomaton::with_default_labels(FuzzyState::new(initial), events).unwrap()
}

/// A random controller with explicit entries on every state it makes
/// reachable, drawing values from `values` (at or above each floor).
pub fn random_fsfc(rng: &mut ChaCha8Rng, aut: &MaxMinAutomaton, values: &[P]) -> Fsfc {
    let mut f = Fsfc::permissive();
    let mut seen = BTreeSet::from([aut.initial().clone()]);
    let mut queue = VecDeque::from([aut.initial().clone()]);
    while let Some(q) = queue.pop_front() {
        for e in aut.event_ids() {
            let floor = aut.uc_degree(e);
            if rng.gen_bool(0.5) {
                let allowed: Vec<P> = values.iter().copied().filter(|&v| v >= floor).collect();
                f.set(q.clone(), e, pick(rng, &allowed));
            }
            let next = scale_product(f.get(&q, e), &aut.step(&q, e));
            if !next.is_zero() && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    f
}

/// Every word of length at most `max_len`, shortest first.
pub fn words(event_count: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for e in 0..event_count {
                let mut x: Word = w.clone();
                x.push(EventId(e));
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// States reachable when every step may scale by any `α ∈ values` at or
/// above the event's floor. A shortest path never revisits a state, so each
/// such state is reached by a single state-feedback controller.
pub fn grid_reach_oracle(aut: &MaxMinAutomaton, values: &[P]) -> BTreeSet<FuzzyState> {
    let mut seen = BTreeSet::from([aut.initial().clone()]);
    let mut queue = VecDeque::from([aut.initial().clone()]);
    while let Some(q) = queue.pop_front() {
        for e in aut.event_ids() {
            let base = aut.step(&q, e);
            for &alpha in values.iter().filter(|&&a| a >= aut.uc_degree(e)) {
                let next = scale_product(alpha, &base);
                if !next.is_zero() && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// Distinct outcomes of `α·(q ∘ a)` over `values` at or above the floor;
/// `None` stands for the zero vector.
pub fn outcomes(
    aut: &MaxMinAutomaton,
    q: &FuzzyState,
    e: EventId,
    values: &[P],
) -> Vec<Option<FuzzyState>> {
    let base = aut.step(q, e);
    let mut out: Vec<Option<FuzzyState>> = Vec::new();
    for &alpha in values.iter().filter(|&&a| a >= aut.uc_degree(e)) {
        let next = scale_product(alpha, &base);
        let next = (!next.is_zero()).then_some(next);
        if !out.contains(&next) {
            out.push(next);
        }
    }
    out
}

/// Decides `∃f. R(Gᶠ) = set` by enumerating every combination of outcomes
/// on `set × E`, with grid-valued controls.
pub fn exhaustive_controllable(aut: &MaxMinAutomaton, set: &[FuzzyState], values: &[P]) -> bool {
    if set.is_empty() {
        return true;
    }
    let members: BTreeSet<&FuzzyState> = set.iter().collect();
    let slots: Vec<(usize, EventId)> = (0..set.len())
        .flat_map(|i| aut.event_ids().map(move |e| (i, e)))
        .collect();
    let options: Vec<Vec<Option<usize>>> = slots
        .iter()
        .map(|&(i, e)| {
            outcomes(aut, &set[i], e, values)
                .into_iter()
                .filter(|o| o.as_ref().is_none_or(|t| members.contains(t)))
                .map(|o| o.map(|t| set.iter().position(|x| *x == t).unwrap()))
                .collect()
        })
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return false;
    }
    let Some(root) = set.iter().position(|x| x == aut.initial()) else {
        return false;
    };
    let m = aut.events().len();
    let mut digits = vec![0usize; slots.len()];
    loop {
        let mut reached = vec![false; set.len()];
        reached[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for e in 0..m {
                if let Some(t) = options[u * m + e][digits[u * m + e]] {
                    if !reached[t] {
                        reached[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        if reached.iter().all(|&r| r) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return false;
            }
            digits[k] += 1;
            if digits[k] < options[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Decides whether some grid-valued controller makes the least attractor
/// of the closed loop legal. Returns `None` when `budget` search nodes are
/// exhausted.
pub fn stabilizable_oracle(
    aut: &MaxMinAutomaton,
    legal: &BTreeSet<FuzzyState>,
    values: &[P],
    budget: usize,
) -> Option<bool> {
    let mut search = StabSearch {
        aut,
        legal,
        values,
        budget,
        choice: HashMap::new(),
    };
    search.dfs()
}

struct StabSearch<'a> {
    aut: &'a MaxMinAutomaton,
    legal: &'a BTreeSet<FuzzyState>,
    values: &'a [P],
    budget: usize,
    choice: HashMap<FuzzyState, Vec<Option<FuzzyState>>>,
}

impl StabSearch<'_> {
    /// Reachable states under the current partial assignment, plus the first
    /// reached state without one.
    fn frontier(&self) -> (Vec<FuzzyState>, Option<FuzzyState>) {
        let root = self.aut.initial().clone();
        let mut order = vec![root.clone()];
        let mut seen = BTreeSet::from([root]);
        let mut i = 0;
        let mut open = None;
        while i < order.len() {
            let q = order[i].clone();
            i += 1;
            match self.choice.get(&q) {
                None => {
                    open.get_or_insert(q);
                }
                Some(succ) => {
                    for t in succ.iter().flatten() {
                        if seen.insert(t.clone()) {
                            order.push(t.clone());
                        }
                    }
                }
            }
        }
        (order, open)
    }

    /// A fully assigned illegal cycle or dead state can never be undone.
    fn doomed(&self, reached: &[FuzzyState]) -> bool {
        let illegal: BTreeSet<&FuzzyState> = reached
            .iter()
            .filter(|q| !self.legal.contains(*q) && self.choice.contains_key(*q))
            .collect();
        for q in &illegal {
            if self.choice[*q].iter().all(|t| t.is_none()) {
                return true;
            }
        }
        // Cycle detection among assigned illegal states by repeated pruning
        // of states without an illegal assigned successor.
        let mut alive = illegal.clone();
        loop {
            let before = alive.len();
            alive = alive
                .iter()
                .copied()
                .filter(|q| self.choice[*q].iter().flatten().any(|t| alive.contains(t)))
                .collect();
            if alive.len() == before {
                return !alive.is_empty();
            }
        }
    }

    fn dfs(&mut self) -> Option<bool> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let (reached, open) = self.frontier();
        if self.doomed(&reached) {
            return Some(false);
        }
        let Some(q) = open else {
            let choice = &self.choice;
            let g = TransitionGraph::explore(
                self.aut.initial().clone(),
                self.aut.event_names(),
                |x, e| choice[x][e.0].clone(),
            );
            let legal: Vec<FuzzyState> = self.legal.iter().cloned().collect();
            return Some(is_stable(&g, &legal));
        };
        let per_event: Vec<Vec<Option<FuzzyState>>> = self
            .aut
            .event_ids()
            .map(|e| outcomes(self.aut, &q, e, self.values))
            .collect();
        let mut digits = vec![0usize; per_event.len()];
        let mut inconclusive = false;
        loop {
            let pick: Vec<Option<FuzzyState>> = digits
                .iter()
                .zip(&per_event)
                .map(|(&d, o)| o[d].clone())
                .collect();
            self.choice.insert(q.clone(), pick);
            match self.dfs() {
                Some(true) => {
                    self.choice.remove(&q);
                    return Some(true);
                }
                Some(false) => {}
                None => inconclusive = true,
            }
            let mut k = 0;
            loop {
                if k == digits.len() {
                    self.choice.remove(&q);
                    return if inconclusive { None } else { Some(false) };
                }
                digits[k] += 1;
                if digits[k] < per_event[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }
}

/// Every subset of `0..n` as a mask, for `n ≤ 16`.
pub fn subsets(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..(1 << n)).map(move |bits| (0..n).map(|i| bits & (1 << i) != 0).collect())
}

/// Closed-loop degrees of every word up to `max_len`, keyed by word.
pub fn degree_table(
    event_count: usize,
    max_len: usize,
    degree: impl Fn(&[EventId]) -> P,
) -> BTreeMap<Word, P> {
    words(event_count, max_len)
        .into_iter()
        .map(|w| {
            let d = degree(&w);
            (w, d)
        })
        .collect()
}

/// The printed closed form of the controllably reachable family of the
/// waste water system.
pub fn wastewater_family(q: &FuzzyState) -> bool {
    let c = q.components();
    let (x, y, z) = (c[0], c[1], c[2]);
    let lo = p("0.1");
    let in_open = |v: P, hi: &str| v > lo && v <= p(hi);
    *q == s("[0.9,0.1,0]")
        || (x == y && y == z && !x.is_zero() && x <= p("0.5"))
        || (y == lo && z == lo && in_open(x, "0.9"))
        || (x == lo && z == lo && in_open(y, "0.9"))
        || (x == lo && y == lo && in_open(z, "0.9"))
        || (x == y && z == lo && in_open(x, "0.5"))
        || (y == z && x == lo && in_open(y, "0.5"))
        || (x == z && y == lo && in_open(x, "0.5"))
}

/// `χ` by exploring `(state, least uncontrollable degree so far)` pairs over
/// ever longer words until no new pair appears.
pub fn chi_by_words(aut: &MaxMinAutomaton) -> BTreeMap<FuzzyState, P> {
    let start = (aut.initial().clone(), P::ONE);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut layer = vec![start];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for (q, m) in &layer {
            for e in aut.event_ids() {
                let t = aut.step(q, e);
                if t.is_zero() {
                    continue;
                }
                let pair = (t, (*m).min(aut.uc_degree(e)));
                if seen.insert(pair.clone()) {
                    next.push(pair);
                }
            }
        }
        layer = next;
    }
    let mut chi = BTreeMap::new();
    for (q, m) in seen {
        let entry = chi.entry(q).or_insert(P::ONE);
        *entry = (*entry).min(m);
    }
    chi
}

/// Every nonzero vector of length `n` over `values`.
pub fn all_vectors(n: usize, values: &[P]) -> Vec<FuzzyState> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<P>| {
                values.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.into_iter()
        .map(FuzzyState::new)
        .filter(|q| !q.is_zero())
        .collect()
}

/// `reach[u][v]`: a path of length at least one from `u` to `v` through
/// vertices allowed by `allowed`, endpoints included.
pub fn paths(g: &TransitionGraph<P>, allowed: &[bool]) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut reach = vec![vec![false; n]; n];
    for (u, _, v) in g.edges() {
        if allowed[u] && allowed[v] {
            reach[u][v] = true;
        }
    }
    for k in 0..n {
        for u in 0..n {
            for v in 0..n {
                if reach[u][k] && reach[k][v] {
                    reach[u][v] = true;
                }
            }
        }
    }
    reach
}

pub fn attractor_oracle(g: &TransitionGraph<P>, inside: &[bool]) -> bool {
    let n = g.len();
    let closed = g.edges().all(|(u, _, v)| !inside[u] || inside[v]);
    let all = paths(g, &vec![true; n]);
    let connected = (0..n).all(|u| inside[u] || (0..n).any(|v| inside[v] && all[u][v]));
    let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
    let out = paths(g, &outside);
    let acyclic = (0..n).all(|u| inside[u] || !out[u][u]);
    closed && connected && acyclic
}

pub fn halves() -> Vec<P> {
    vec![P::ZERO, p("0.5"), P::ONE]
}

pub fn tiny_shape() -> Shape {
    Shape {
        max_dim: 3,
        max_events: 2,
        values: halves(),
        sparsity: 0.5,
    }
}

/// A random legal set drawn from the states reachable on `values`.
pub fn random_legal(r: &mut ChaCha8Rng, aut: &MaxMinAutomaton, values: &[P]) -> Vec<FuzzyState> {
    let pool: Vec<FuzzyState> = grid_reach_oracle(aut, values).into_iter().collect();
    let keep = r.gen_range(0.2..0.9);
    pool.into_iter().filter(|_| r.gen_bool(keep)).collect()
}
