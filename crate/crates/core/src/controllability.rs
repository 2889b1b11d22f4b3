//! Controllability of finite sets of fuzzy states.
//!
//! A set `P` is controllable when some controller makes the closed loop reach
//! exactly `P`. Deciding it amounts to finding, in the successor graph of
//! `P`, a subgraph that picks at most one target per event at every vertex,
//! covers every event a controller may not fully disable, and reaches every
//! vertex from the initial state.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::automaton::{EventId, Fsfc, MaxMinAutomaton};
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::lattice::{solve_scale, FuzzyState, ScaleSolution};

/// A finite set of nonzero fuzzy states with a stable numbering.
#[derive(Clone)]
pub struct StateSet<G> {
    states: Vec<FuzzyState<G>>,
    index: HashMap<FuzzyState<G>, usize>,
}

impl<G: Grade> StateSet<G> {
    /// Rejects the zero state and duplicates.
    pub fn new(states: Vec<FuzzyState<G>>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, q) in states.iter().enumerate() {
            if q.is_zero() {
                return Err(Error::ZeroState);
            }
            if index.insert(q.clone(), i).is_some() {
                return Err(Error::DuplicateState(q.to_string()));
            }
        }
        Ok(StateSet { states, index })
    }

    pub fn empty() -> Self {
        StateSet {
            states: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds a set from states known to be distinct and nonzero.
    pub fn from_members(states: impl IntoIterator<Item = FuzzyState<G>>) -> Result<Self> {
        let unique: BTreeSet<_> = states.into_iter().collect();
        Self::new(unique.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FuzzyState<G>] {
        &self.states
    }

    pub fn get(&self, i: usize) -> &FuzzyState<G> {
        &self.states[i]
    }

    pub fn index_of(&self, q: &FuzzyState<G>) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub fn contains(&self, q: &FuzzyState<G>) -> bool {
        self.index.contains_key(q)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FuzzyState<G>> {
        self.states.iter()
    }

    /// Membership as a sorted set, ignoring numbering.
    pub fn members(&self) -> BTreeSet<FuzzyState<G>> {
        self.states.iter().cloned().collect()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.states.iter().all(|q| other.contains(q))
    }

    pub(crate) fn check_dims(&self, n: usize) -> Result<()> {
        self.states.iter().try_for_each(|q| q.check_dim(n))
    }
}

impl<G: PartialEq> PartialEq for StateSet<G> {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
    }
}

impl<G: Eq> Eq for StateSet<G> {}

impl<G: fmt::Debug> fmt::Debug for StateSet<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.states).finish()
    }
}

impl<'a, G: Grade> IntoIterator for &'a StateSet<G> {
    type Item = &'a FuzzyState<G>;
    type IntoIter = std::slice::Iter<'a, FuzzyState<G>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// `(a, p) ∈ Succ(q)`, with the admissible scalars that realise it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccessorEdge<G> {
    pub source: usize,
    pub event: EventId,
    pub target: usize,
    /// `{α ≥ uc(a) : α · (q ∘ a) = p}`, never empty.
    pub range: ScaleSolution<G>,
}

fn successors_of<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
    v: usize,
) -> Vec<SuccessorEdge<G>> {
    let q = set.get(v);
    let mut out = Vec::new();
    for event in aut.event_ids() {
        let base = aut.step(q, event);
        if base.is_zero() {
            continue;
        }
        for (target, p) in set.iter().enumerate() {
            let range = solve_scale(&base, p)
                .expect("dimensions checked")
                .at_least(aut.uc_degree(event));
            if !range.is_empty() {
                out.push(SuccessorEdge {
                    source: v,
                    event,
                    target,
                    range,
                });
            }
        }
    }
    out
}

/// `Succ(q)` within `set`.
pub fn successor_set<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
    q: &FuzzyState<G>,
) -> Result<Vec<SuccessorEdge<G>>> {
    set.check_dims(aut.dim())?;
    let v = set
        .index_of(q)
        .ok_or_else(|| Error::NotAVertex(q.to_string()))?;
    Ok(successors_of(aut, set, v))
}

/// The successor graph of a finite set.
#[derive(Clone, Debug)]
pub struct SuccessorGraph<G> {
    set: StateSet<G>,
    root: Option<usize>,
    edges: Vec<SuccessorEdge<G>>,
    /// Edge indices per vertex and event.
    by_event: Vec<Vec<Vec<usize>>>,
    /// `uc(a) > 0` and `q ∘ a ≠ 0`: some target must be chosen.
    demanded: Vec<Vec<bool>>,
    event_names: Vec<String>,
}

pub fn build_successor_graph<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
) -> Result<SuccessorGraph<G>> {
    set.check_dims(aut.dim())?;
    let n_events = aut.events().len();
    let mut edges = Vec::new();
    let mut by_event = vec![vec![Vec::new(); n_events]; set.len()];
    let mut demanded = vec![vec![false; n_events]; set.len()];
    for (v, q) in set.iter().enumerate() {
        for event in aut.event_ids() {
            demanded[v][event.0] =
                aut.uc_degree(event) > G::zero() && !aut.step(q, event).is_zero();
        }
        for edge in successors_of(aut, set, v) {
            by_event[v][edge.event.0].push(edges.len());
            edges.push(edge);
        }
    }
    Ok(SuccessorGraph {
        root: set.index_of(aut.initial()),
        set: set.clone(),
        edges,
        by_event,
        demanded,
        event_names: aut.event_names(),
    })
}

impl<G: Grade> SuccessorGraph<G> {
    pub fn states(&self) -> &StateSet<G> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Index of the initial state, if it belongs to the set.
    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn edges(&self) -> &[SuccessorEdge<G>] {
        &self.edges
    }

    pub fn event_names(&self) -> &[String] {
        &self.event_names
    }

    pub fn event_count(&self) -> usize {
        self.event_names.len()
    }

    /// `Succ` of vertex `v`, as edges in event-then-target order.
    pub fn succ(&self, v: usize) -> impl Iterator<Item = &SuccessorEdge<G>> + '_ {
        self.by_event[v]
            .iter()
            .flatten()
            .map(move |&i| &self.edges[i])
    }

    pub fn edge(&self, v: usize, event: EventId, target: usize) -> Option<&SuccessorEdge<G>> {
        self.by_event[v][event.0]
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.target == target)
    }

    pub fn is_demanded(&self, v: usize, event: EventId) -> bool {
        self.demanded[v][event.0]
    }

    fn targets(&self, v: usize, event: usize) -> impl Iterator<Item = usize> + '_ {
        self.by_event[v][event]
            .iter()
            .map(move |&i| self.edges[i].target)
    }

    /// First demanded event at `v` without any successor, if any.
    fn uncovered(&self, v: usize) -> Option<EventId> {
        (0..self.event_count())
            .find(|&e| self.demanded[v][e] && self.by_event[v][e].is_empty())
            .map(EventId)
    }

    /// Per-event option lists for the full compatible-subset enumeration.
    fn compatible_options(&self, v: usize) -> Vec<Vec<Option<usize>>> {
        (0..self.event_count())
            .map(|e| {
                let mut opts: Vec<Option<usize>> = self.targets(v, e).map(Some).collect();
                if !self.demanded[v][e] {
                    opts.push(None);
                }
                opts
            })
            .collect()
    }
}

/// Lazy cartesian product over per-event option lists.
#[derive(Clone, Debug)]
struct Odometer {
    options: Vec<Vec<Option<usize>>>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(options: Vec<Vec<Option<usize>>>) -> Self {
        let done = options.iter().any(Vec::is_empty);
        Odometer {
            digits: vec![0; options.len()],
            options,
            done,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<Option<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self
            .digits
            .iter()
            .zip(&self.options)
            .map(|(&d, o)| o[d])
            .collect();
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.options[k].len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some(item)
    }
}

/// The compatible subsets of `Succ(v)`, each as `(event, target)` pairs.
/// Empty exactly when no compatible subset exists.
pub fn compatible_subsets<G: Grade>(
    graph: &SuccessorGraph<G>,
    v: usize,
) -> impl Iterator<Item = Vec<(EventId, usize)>> {
    Odometer::new(graph.compatible_options(v)).map(|choice| {
        choice
            .into_iter()
            .enumerate()
            .filter_map(|(e, t)| t.map(|t| (EventId(e), t)))
            .collect()
    })
}

/// One chosen target (or none) per vertex and event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllableSubgraph {
    choice: Vec<Vec<Option<usize>>>,
}

impl ControllableSubgraph {
    pub fn from_choices(choice: Vec<Vec<Option<usize>>>) -> Self {
        ControllableSubgraph { choice }
    }

    pub fn target(&self, v: usize, event: EventId) -> Option<usize> {
        self.choice[v][event.0]
    }

    pub fn choices(&self) -> &[Vec<Option<usize>>] {
        &self.choice
    }

    /// Chosen edges `(source, event, target)` in vertex-then-event order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, EventId, usize)> + '_ {
        self.choice.iter().enumerate().flat_map(|(v, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(e, t)| t.map(|t| (v, EventId(e), t)))
        })
    }

    /// Checks that this is a controllable subgraph of `graph`.
    pub fn validate<G: Grade>(&self, graph: &SuccessorGraph<G>) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSubgraph(msg));
        if self.choice.len() != graph.len() {
            return bad(format!(
                "{} rows for {} vertices",
                self.choice.len(),
                graph.len()
            ));
        }
        for (v, row) in self.choice.iter().enumerate() {
            if row.len() != graph.event_count() {
                return bad(format!("vertex {v} has {} entries", row.len()));
            }
            for (e, t) in row.iter().enumerate() {
                match t {
                    Some(t) if graph.edge(v, EventId(e), *t).is_none() => {
                        return bad(format!(
                            "no successor edge {v} -{}-> {t}",
                            graph.event_names[e]
                        ));
                    }
                    None if graph.demanded[v][e] => {
                        return bad(format!(
                            "event `{}` must be covered at {}",
                            graph.event_names[e],
                            graph.set.get(v)
                        ));
                    }
                    _ => {}
                }
            }
        }
        if graph.is_empty() {
            return Ok(());
        }
        let Some(root) = graph.root else {
            return bad("initial state is not in the set".to_string());
        };
        let reached = self.reached_from(root);
        if let Some(v) = reached.iter().position(|r| !r) {
            return bad(format!("{} is not reachable", graph.set.get(v)));
        }
        Ok(())
    }

    fn reached_from(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.choice.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for t in self.choice[v].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        seen
    }
}

/// Why a set is not controllable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction<G> {
    /// A nonempty controllable set must contain the initial state.
    InitialStateMissing,
    /// An event that cannot be disabled has no target inside the set.
    NoCompatibleSubset {
        state: FuzzyState<G>,
        event: EventId,
    },
    /// Every selection leaves some states unreachable; `reached` is the
    /// largest reachable subset seen during the search.
    Unreachable { reached: Vec<FuzzyState<G>> },
    /// No selection satisfies the extra connectivity and acyclicity demands.
    NotShaped,
}

#[derive(Clone, Debug)]
pub struct ControllabilityVerdict<G> {
    pub graph: SuccessorGraph<G>,
    pub subgraph: Option<ControllableSubgraph>,
    pub obstruction: Option<Obstruction<G>>,
}

impl<G: Grade> ControllabilityVerdict<G> {
    pub fn is_controllable(&self) -> bool {
        self.subgraph.is_some()
    }
}

/// Decides controllability by backtracking over per-vertex choices.
pub fn check_controllable<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    set: &StateSet<G>,
) -> Result<ControllabilityVerdict<G>> {
    let graph = build_successor_graph(aut, set)?;
    let outcome = search(&graph, None);
    Ok(match outcome {
        Ok(subgraph) => ControllabilityVerdict {
            graph,
            subgraph: Some(subgraph),
            obstruction: None,
        },
        Err(obstruction) => ControllabilityVerdict {
            graph,
            subgraph: None,
            obstruction: Some(obstruction),
        },
    })
}

/// Searches for a controllable subgraph. With `inside` set, additionally
/// requires every vertex outside it to reach it along chosen edges and the
/// chosen edges among outside vertices to be acyclic.
pub(crate) fn search<G: Grade>(
    graph: &SuccessorGraph<G>,
    inside: Option<&[bool]>,
) -> std::result::Result<ControllableSubgraph, Obstruction<G>> {
    if graph.is_empty() {
        return Ok(ControllableSubgraph { choice: Vec::new() });
    }
    let Some(root) = graph.root else {
        return Err(Obstruction::InitialStateMissing);
    };
    for v in 0..graph.len() {
        if let Some(event) = graph.uncovered(v) {
            return Err(Obstruction::NoCompatibleSubset {
                state: graph.set.get(v).clone(),
                event,
            });
        }
    }
    let mut search = Search::new(graph, inside);
    let mut reached = vec![false; graph.len()];
    reached[root] = true;
    if search.dfs(vec![root], reached, 0) {
        let choice = search
            .choice
            .into_iter()
            .map(|c| c.expect("every vertex assigned on success"))
            .collect();
        return Ok(ControllableSubgraph { choice });
    }
    if inside.is_some() {
        return Err(Obstruction::NotShaped);
    }
    Err(Obstruction::Unreachable {
        reached: (0..graph.len())
            .filter(|&v| search.best[v])
            .map(|v| graph.set.get(v).clone())
            .collect(),
    })
}

struct Search<'a, G> {
    graph: &'a SuccessorGraph<G>,
    options: Vec<Vec<Vec<Option<usize>>>>,
    /// Number of `(vertex, event)` option lists offering each vertex.
    providers: Vec<usize>,
    inside: Option<&'a [bool]>,
    choice: Vec<Option<Vec<Option<usize>>>>,
    best: Vec<bool>,
}

impl<'a, G: Grade> Search<'a, G> {
    fn new(graph: &'a SuccessorGraph<G>, inside: Option<&'a [bool]>) -> Self {
        let options: Vec<Vec<Vec<Option<usize>>>> = (0..graph.len())
            .map(|v| {
                let outside = inside.is_some_and(|m| !m[v]);
                (0..graph.event_count())
                    .map(|e| {
                        // Outside vertices may drop optional edges and never
                        // loop on themselves; elsewhere extra edges only help.
                        let mut opts: Vec<Option<usize>> = graph
                            .targets(v, e)
                            .filter(|&t| !(outside && t == v))
                            .map(Some)
                            .collect();
                        if opts.is_empty() || (outside && !graph.demanded[v][e]) {
                            opts.push(None);
                        }
                        opts
                    })
                    .collect()
            })
            .collect();
        let mut providers = vec![0; graph.len()];
        for row in &options {
            for opts in row {
                for t in opts.iter().flatten() {
                    providers[*t] += 1;
                }
            }
        }
        Search {
            graph,
            options,
            providers,
            inside,
            choice: vec![None; graph.len()],
            best: Vec::new(),
        }
    }

    fn dfs(&mut self, order: Vec<usize>, reached: Vec<bool>, cursor: usize) -> bool {
        if count(&reached) > count(&self.best) {
            self.best = reached.clone();
        }
        if cursor == order.len() {
            return reached.iter().all(|&r| r) && self.connected(false);
        }
        if !self.optimistic() {
            return false;
        }
        let v = order[cursor];
        // Only the set of chosen targets matters, not which event leads where.
        let mut tried = HashSet::new();
        let mut combos: Vec<(usize, usize, Vec<Option<usize>>)> = Vec::new();
        for combo in Odometer::new(self.options[v].clone()) {
            let targets: BTreeSet<usize> = combo.iter().flatten().copied().collect();
            let fresh: Vec<usize> = targets.iter().copied().filter(|&t| !reached[t]).collect();
            if tried.insert(targets) {
                let scarcity = fresh.iter().map(|&t| self.providers[t]).sum();
                combos.push((fresh.len(), scarcity, combo));
            }
        }
        // Most new vertices first, then those with the fewest other ways in.
        combos.sort_by_key(|(fresh, scarcity, _)| (Reverse(*fresh), *scarcity));
        for (_, _, combo) in combos {
            self.choice[v] = Some(combo);
            if self.closes_cycle(v) {
                continue;
            }
            let mut order = order.clone();
            let mut reached = reached.clone();
            for t in self.choice[v].iter().flatten().flatten() {
                if !reached[*t] {
                    reached[*t] = true;
                    order.push(*t);
                }
            }
            if self.dfs(order, reached, cursor + 1) {
                return true;
            }
        }
        self.choice[v] = None;
        false
    }

    /// Successors of `v`: chosen ones if assigned, otherwise every option.
    fn relaxed_successors(&self, v: usize) -> Vec<usize> {
        match &self.choice[v] {
            Some(row) => row.iter().flatten().copied().collect(),
            None => self.options[v]
                .iter()
                .flatten()
                .flatten()
                .copied()
                .collect(),
        }
    }

    /// Whether some completion of the current partial choice could succeed.
    fn optimistic(&self) -> bool {
        let root = self.graph.root.expect("checked by caller");
        let mut seen = vec![false; self.graph.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for t in self.relaxed_successors(v) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen.iter().all(|&s| s) && self.connected(true)
    }

    /// Every vertex outside the target set reaches it.
    fn connected(&self, relaxed: bool) -> bool {
        let Some(inside) = self.inside else {
            return true;
        };
        let n = self.graph.len();
        let mut preds = vec![Vec::new(); n];
        for v in 0..n {
            let succ = if relaxed {
                self.relaxed_successors(v)
            } else {
                self.choice[v].iter().flatten().flatten().copied().collect()
            };
            for t in succ {
                preds[t].push(v);
            }
        }
        let mut seen = inside.to_vec();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| seen[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Whether the choice at outside vertex `v` closes a cycle through it.
    fn closes_cycle(&self, v: usize) -> bool {
        let Some(inside) = self.inside else {
            return false;
        };
        if inside[v] {
            return false;
        }
        let mut seen = vec![false; self.graph.len()];
        let mut stack: Vec<usize> = self.choice[v].iter().flatten().flatten().copied().collect();
        while let Some(u) = stack.pop() {
            if u == v {
                return true;
            }
            if inside[u] || seen[u] {
                continue;
            }
            seen[u] = true;
            if let Some(row) = &self.choice[u] {
                stack.extend(row.iter().flatten());
            }
        }
        false
    }
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// Builds a controller realising a controllable subgraph: events with a chosen
/// target get the least admissible scalar, others are disabled, and every
/// state outside the set is left fully enabled.
pub fn synthesize_fsfc<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    graph: &SuccessorGraph<G>,
    subgraph: &ControllableSubgraph,
) -> Result<Fsfc<G>> {
    subgraph.validate(graph)?;
    let mut f = Fsfc::permissive();
    for (v, q) in graph.set.iter().enumerate() {
        for event in aut.event_ids() {
            if aut.step(q, event).is_zero() {
                continue;
            }
            let value = match subgraph.target(v, event) {
                None => G::zero(),
                Some(t) => graph
                    .edge(v, event, t)
                    .and_then(|edge| edge.range.least())
                    .expect("validated edge has a nonempty range"),
            };
            f.set(q.clone(), event, value);
        }
    }
    Ok(f)
}
