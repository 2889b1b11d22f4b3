//! Attractors, stability and stabilization by state feedback.
//!
//! A set `N` is an attractor of a transition graph when it is closed under
//! transitions, every vertex outside it has a path into it, and no cycle runs
//! entirely outside it. Every run then enters `N` after finitely many steps
//! and stays there.

use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::automaton::{ClosedLoop, EventId, Fsfc, MaxMinAutomaton};
use crate::controllability::{
    build_successor_graph, check_controllable, search, synthesize_fsfc, StateSet,
};
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::graph::TransitionGraph;
use crate::lattice::{scale_product, solve_scale, FuzzyState};

/// Marks every vertex lying on a directed cycle, self-loops included.
pub fn find_cycles<G: Grade>(g: &TransitionGraph<G>) -> Vec<bool> {
    let mut dg = DiGraph::<(), ()>::with_capacity(g.len(), 0);
    let nodes: Vec<_> = (0..g.len()).map(|_| dg.add_node(())).collect();
    let mut on_cycle = vec![false; g.len()];
    for (u, _, v) in g.edges() {
        dg.add_edge(nodes[u], nodes[v], ());
        if u == v {
            on_cycle[u] = true;
        }
    }
    for component in tarjan_scc(&dg) {
        if component.len() > 1 {
            for node in component {
                on_cycle[node.index()] = true;
            }
        }
    }
    on_cycle
}

/// The three attractor conditions, evaluated separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorReport<G> {
    /// Transitions from the set stay in the set.
    pub closed: bool,
    /// Every vertex outside the set has a path into it.
    pub connected: bool,
    /// The subgraph induced by the vertices outside the set has no cycle.
    pub acyclic_outside: bool,
    /// Requested states that are not vertices of the graph; they play no part
    /// in the three conditions.
    pub missing: Vec<FuzzyState<G>>,
}

impl<G> AttractorReport<G> {
    pub fn verdict(&self) -> bool {
        self.closed && self.connected && self.acyclic_outside
    }
}

/// Checks the attractor conditions for a vertex mask.
pub fn check_attractor_mask<G: Grade>(
    g: &TransitionGraph<G>,
    inside: &[bool],
) -> AttractorReport<G> {
    let closed = g.edges().all(|(u, _, v)| !inside[u] || inside[v]);
    let connected = g.backward_closure(inside).iter().all(|&b| b);
    AttractorReport {
        closed,
        connected,
        acyclic_outside: acyclic_outside(g, inside),
        missing: Vec::new(),
    }
}

/// Kahn's algorithm on the subgraph induced by the vertices outside `inside`.
fn acyclic_outside<G: Grade>(g: &TransitionGraph<G>, inside: &[bool]) -> bool {
    let mut indegree = vec![0usize; g.len()];
    for (u, _, v) in g.edges() {
        if !inside[u] && !inside[v] {
            indegree[v] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..g.len())
        .filter(|&v| !inside[v] && indegree[v] == 0)
        .collect();
    let mut removed = 0;
    while let Some(u) = queue.pop_front() {
        removed += 1;
        for (_, v) in g.successors(u) {
            if !inside[v] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
    }
    removed == inside.iter().filter(|&&b| !b).count()
}

fn mask_of<G: Grade>(
    g: &TransitionGraph<G>,
    states: &[FuzzyState<G>],
) -> (Vec<bool>, Vec<FuzzyState<G>>) {
    let mut mask = vec![false; g.len()];
    let mut missing = Vec::new();
    for q in states {
        match g.index_of(q) {
            Some(v) => mask[v] = true,
            None => missing.push(q.clone()),
        }
    }
    (mask, missing)
}

/// Checks the attractor conditions for a set of states.
pub fn check_attractor<G: Grade>(
    g: &TransitionGraph<G>,
    states: &[FuzzyState<G>],
) -> AttractorReport<G> {
    let (mask, missing) = mask_of(g, states);
    AttractorReport {
        missing,
        ..check_attractor_mask(g, &mask)
    }
}

/// The least attractor: everything reachable from a cycle, plus dead vertices.
pub fn infimal_attractor<G: Grade>(g: &TransitionGraph<G>) -> Vec<bool> {
    let mut mask = g.forward_closure(&find_cycles(g));
    for (v, m) in mask.iter_mut().enumerate() {
        *m |= g.is_dead(v);
    }
    mask
}

/// States of [`infimal_attractor`], in vertex order.
pub fn infimal_attractor_states<G: Grade>(g: &TransitionGraph<G>) -> Vec<FuzzyState<G>> {
    let mask = infimal_attractor(g);
    (0..g.len())
        .filter(|&v| mask[v])
        .map(|v| g.vertex(v).clone())
        .collect()
}

/// Stable with respect to legal states `legal` iff the least attractor is legal.
pub fn is_stable<G: Grade>(g: &TransitionGraph<G>, legal: &[FuzzyState<G>]) -> bool {
    let legal: BTreeSet<&FuzzyState<G>> = legal.iter().collect();
    infimal_attractor_states(g)
        .iter()
        .all(|q| legal.contains(q))
}

/// The least admissible `α` with `α·(q ∘ a) ∈ target`, scanning members in order.
fn least_into<G: Grade>(base: &FuzzyState<G>, floor: G, target: &StateSet<G>) -> Option<G> {
    target
        .iter()
        .filter_map(|p| solve_scale(base, p).ok()?.at_least(floor).least())
        .min()
}

/// First `(state, event)` at which `set` fails controllable invariance, if any.
pub fn check_controllable_invariant<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
) -> Result<Option<(FuzzyState<G>, EventId)>> {
    set.check_dims(aut.dim())?;
    for q in set {
        if let Some(e) = invariance_violation(aut, q, set) {
            return Ok(Some((q.clone(), e)));
        }
    }
    Ok(None)
}

fn invariance_violation<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    q: &FuzzyState<G>,
    set: &StateSet<G>,
) -> Option<EventId> {
    aut.event_ids().find(|&e| {
        let uc = aut.uc_degree(e);
        let base = aut.step(q, e);
        uc > G::zero() && !base.is_zero() && least_into(&base, uc, set).is_none()
    })
}

/// The largest controllable invariant subset, by repeatedly discarding
/// violating states.
pub fn largest_controllable_invariant<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
) -> Result<StateSet<G>> {
    set.check_dims(aut.dim())?;
    let mut current = set.clone();
    loop {
        let keep: Vec<FuzzyState<G>> = current
            .iter()
            .filter(|q| invariance_violation(aut, q, &current).is_none())
            .cloned()
            .collect();
        if keep.len() == current.len() {
            return Ok(current);
        }
        current = StateSet::new(keep).expect("subset of a valid set");
    }
}

/// A proposed pair of sets certifying stabilizability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizabilityCandidate<G> {
    /// A controllable invariant subset of the legal states.
    pub n_prime: StateSet<G>,
    /// A controllable set, reached through `n_prime` without cycling outside it.
    pub p_set: StateSet<G>,
}

/// The outcome of checking a candidate.
#[derive(Clone, Debug)]
pub struct WitnessReport<G> {
    pub invariant: bool,
    pub p_controllable: bool,
    /// Some controller reaching exactly `P` makes every state of `P` outside
    /// `N′` reach `N′` with no cycle outside `N′`.
    pub connected_acyclic: bool,
    /// Such a controller, when one exists.
    pub base_controller: Option<Fsfc<G>>,
}

impl<G> WitnessReport<G> {
    pub fn verdict(&self) -> bool {
        self.invariant && self.p_controllable && self.connected_acyclic
    }
}

/// Checks a candidate against the legal set `legal`.
pub fn verify_stabilizability_witness<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    legal: &StateSet<G>,
    w: &StabilizabilityCandidate<G>,
) -> Result<WitnessReport<G>> {
    if !w.n_prime.is_subset_of(legal) {
        return Err(Error::Precondition(
            "N′ must be a subset of the legal states".to_string(),
        ));
    }
    w.p_set.check_dims(aut.dim())?;
    let invariant = check_controllable_invariant(aut, &w.n_prime)?.is_none();
    let p_controllable =
        !w.p_set.is_empty() && check_controllable(aut, &w.p_set)?.is_controllable();
    let mut report = WitnessReport {
        invariant,
        p_controllable,
        connected_acyclic: false,
        base_controller: None,
    };
    if !p_controllable {
        return Ok(report);
    }
    let graph = build_successor_graph(aut, &w.p_set)?;
    let inside: Vec<bool> = w.p_set.iter().map(|q| w.n_prime.contains(q)).collect();
    if let Ok(sub) = search(&graph, Some(&inside)) {
        report.connected_acyclic = true;
        report.base_controller = Some(synthesize_fsfc(aut, &graph, &sub)?);
    }
    Ok(report)
}

/// A stabilizing controller together with the evidence for it.
#[derive(Clone, Debug)]
pub struct StabilizingController<G> {
    pub controller: Fsfc<G>,
    pub base_controller: Fsfc<G>,
    /// The attractor conditions for `N′` in the resulting closed loop.
    pub report: AttractorReport<G>,
}

/// Starts from a controller reaching exactly `P` and redirects every
/// transition that would leave `N′` from inside it: disabled when the event
/// is fully controllable, otherwise scaled by the least `α ≥ uc(a)` landing in
/// `N′`.
pub fn synthesize_stabilizing_controller<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    legal: &StateSet<G>,
    w: &StabilizabilityCandidate<G>,
) -> Result<StabilizingController<G>> {
    let report = verify_stabilizability_witness(aut, legal, w)?;
    if !report.verdict() {
        return Err(Error::Precondition(format!(
            "candidate rejected (invariant: {}, controllable: {}, connected and acyclic: {})",
            report.invariant, report.p_controllable, report.connected_acyclic
        )));
    }
    let base = report
        .base_controller
        .expect("verified candidate has a controller");
    let controller = redirect(aut, &base, &w.n_prime)?;
    let cl = ClosedLoop::new(aut, &controller)?;
    let report = check_attractor(&cl.graph(), w.n_prime.states());
    Ok(StabilizingController {
        controller,
        base_controller: base,
        report,
    })
}

fn redirect<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    base: &Fsfc<G>,
    n_prime: &StateSet<G>,
) -> Result<Fsfc<G>> {
    let mut f = base.clone();
    for q in n_prime {
        for e in aut.event_ids() {
            let step = aut.step(q, e);
            let next = scale_product(base.get(q, e), &step);
            if next.is_zero() || n_prime.contains(&next) {
                continue;
            }
            let uc = aut.uc_degree(e);
            let value = if uc.is_zero() {
                G::zero()
            } else {
                least_into(&step, uc, n_prime).ok_or_else(|| Error::Infeasible {
                    state: q.to_string(),
                    event: aut.event(e).name.clone(),
                })?
            };
            f.set(q.clone(), e, value);
        }
    }
    Ok(f)
}

/// A certified stabilizability witness.
#[derive(Clone, Debug)]
pub struct StabilizabilityWitness<G> {
    pub candidate: StabilizabilityCandidate<G>,
    /// A controller under which `N′` is an attractor.
    pub controller: Fsfc<G>,
}

/// Scalars tried by the witness search: every grade in the automaton or the
/// legal set, plus `0` and `1`.
pub fn search_grid<G: Grade>(aut: &MaxMinAutomaton<G>, legal: &StateSet<G>) -> Vec<G> {
    let mut grid = aut.breakpoints();
    for q in legal {
        grid.extend(q.components().iter().copied());
    }
    grid.into_iter().collect()
}

/// Looks for a controller making a subset of `legal` an attractor.
///
/// The target is the largest controllable invariant subset `N′` of `legal`.
/// Control values range over [`search_grid`]. The states reachable from the
/// initial state under any such values are explored, at most `budget` of
/// them, and the states from which `N′` can be forced without cycling are
/// computed as a least fixpoint. `None` means no witness was found within
/// these limits, not that none exists.
pub fn search_stabilizing_witness<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    legal: &StateSet<G>,
    budget: usize,
) -> Result<Option<StabilizabilityWitness<G>>> {
    legal.check_dims(aut.dim())?;
    let n_prime = largest_controllable_invariant(aut, legal)?;
    if n_prime.is_empty() {
        return Ok(None);
    }
    let grid = search_grid(aut, legal);
    let Some(arena) = Arena::explore(aut, &n_prime, &grid, budget) else {
        return Ok(None);
    };
    let rank = arena.ranks();
    if rank[0].is_none() {
        return Ok(None);
    }
    let controller = arena.controller(aut, &n_prime, &rank);
    let reached = ClosedLoop::new(aut, &controller)?.reachable();
    let candidate = StabilizabilityCandidate {
        n_prime,
        p_set: StateSet::from_members(reached)?,
    };
    Ok(Some(StabilizabilityWitness {
        candidate,
        controller,
    }))
}

/// `(α, successor)` options for one state and event; `None` for a zero result.
type Moves<G> = Vec<(G, Option<usize>)>;

/// Every state reachable from the initial state under grid-valued control,
/// stopping at `N′`.
struct Arena<G> {
    states: Vec<FuzzyState<G>>,
    inside: Vec<bool>,
    moves: Vec<Vec<Moves<G>>>,
}

impl<G: Grade> Arena<G> {
    fn explore(
        aut: &MaxMinAutomaton<G>,
        n_prime: &StateSet<G>,
        grid: &[G],
        budget: usize,
    ) -> Option<Self> {
        let mut states = vec![aut.initial().clone()];
        let mut index = HashMap::from([(aut.initial().clone(), 0)]);
        let mut moves = Vec::new();
        let mut v = 0;
        while v < states.len() {
            if states.len() > budget {
                return None;
            }
            let q = states[v].clone();
            let mut row = Vec::with_capacity(aut.events().len());
            // States of N′ keep their own rows empty: their behaviour is fixed.
            if !n_prime.contains(&q) {
                for e in aut.event_ids() {
                    let base = aut.step(&q, e);
                    let mut opts = Vec::new();
                    for &alpha in grid.iter().filter(|&&a| a >= aut.uc_degree(e)) {
                        let next = scale_product(alpha, &base);
                        if next.is_zero() {
                            opts.push((alpha, None));
                            continue;
                        }
                        let fresh = states.len();
                        let t = *index.entry(next.clone()).or_insert_with(|| {
                            states.push(next);
                            fresh
                        });
                        opts.push((alpha, Some(t)));
                    }
                    row.push(opts);
                }
            }
            moves.push(row);
            v += 1;
        }
        let inside = states.iter().map(|q| n_prime.contains(q)).collect();
        Some(Arena {
            states,
            inside,
            moves,
        })
    }

    /// Rounds of the least fixpoint: `N′` has rank 0; a state gets rank
    /// `k + 1` once every event can be disabled or sent to rank at most `k`,
    /// and at least one event can be sent there.
    fn ranks(&self) -> Vec<Option<usize>> {
        let mut rank: Vec<Option<usize>> = self.inside.iter().map(|&b| b.then_some(0)).collect();
        let mut round = 0;
        loop {
            round += 1;
            let mut changed = false;
            let snapshot = rank.clone();
            for v in 0..self.states.len() {
                if snapshot[v].is_some() {
                    continue;
                }
                let settled =
                    |opt: &(G, Option<usize>)| opt.1.is_some_and(|t| snapshot[t].is_some());
                let every = self.moves[v]
                    .iter()
                    .all(|opts| opts.iter().any(|o| o.1.is_none() || settled(o)));
                let some = self.moves[v].iter().any(|opts| opts.iter().any(settled));
                if every && some {
                    rank[v] = Some(round);
                    changed = true;
                }
            }
            if !changed {
                return rank;
            }
        }
    }

    /// Reads a controller off the ranks: from each ranked state outside `N′`
    /// every event goes to the lowest-ranked option (least `α` on ties) or is
    /// disabled; inside `N′` transitions are kept inside.
    fn controller(
        &self,
        aut: &MaxMinAutomaton<G>,
        n_prime: &StateSet<G>,
        rank: &[Option<usize>],
    ) -> Fsfc<G> {
        let mut f = Fsfc::permissive();
        for v in 0..self.states.len() {
            let q = &self.states[v];
            let Some(r) = rank[v] else { continue };
            if r == 0 {
                continue;
            }
            for (e, opts) in self.moves[v].iter().enumerate() {
                let best = opts
                    .iter()
                    .filter_map(|&(alpha, t)| {
                        t.and_then(|t| rank[t].filter(|&rt| rt < r))
                            .map(|rt| (rt, alpha))
                    })
                    .min();
                let value = match best {
                    Some((_, alpha)) => alpha,
                    None => opts
                        .iter()
                        .find(|o| o.1.is_none())
                        .map(|o| o.0)
                        .expect("ranked states can disable unranked events"),
                };
                f.set(q.clone(), EventId(e), value);
            }
        }
        for q in n_prime {
            for e in aut.event_ids() {
                let base = aut.step(q, e);
                if base.is_zero() {
                    continue;
                }
                let uc = aut.uc_degree(e);
                let value = if uc.is_zero() {
                    G::zero()
                } else {
                    least_into(&base, uc, n_prime).expect("N′ is controllable invariant")
                };
                f.set(q.clone(), e, value);
            }
        }
        f
    }
}

/// The closed-loop transition graph of `f`.
pub fn closed_loop_graph<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    f: &Fsfc<G>,
) -> Result<TransitionGraph<G>> {
    Ok(ClosedLoop::new(aut, f)?.graph())
}
