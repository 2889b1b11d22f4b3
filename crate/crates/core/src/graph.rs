//! Deterministic labelled transition graphs over fuzzy states.

use std::collections::{HashMap, VecDeque};

use crate::automaton::EventId;
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::lattice::FuzzyState;

/// A finite, deterministic transition graph whose vertices are fuzzy states.
///
/// Vertex `0` is the root. Vertices are numbered in breadth-first discovery
/// order with events explored in alphabet order, so numbering is reproducible.
#[derive(Clone, Debug)]
pub struct TransitionGraph<G> {
    vertices: Vec<FuzzyState<G>>,
    index: HashMap<FuzzyState<G>, usize>,
    succ: Vec<Vec<Option<usize>>>,
    event_names: Vec<String>,
}

impl<G: Grade> TransitionGraph<G> {
    /// Breadth-first closure of `root` under `step`; `None` means no edge.
    pub fn explore<F>(root: FuzzyState<G>, event_names: Vec<String>, mut step: F) -> Self
    where
        F: FnMut(&FuzzyState<G>, EventId) -> Option<FuzzyState<G>>,
    {
        let n_events = event_names.len();
        let mut graph = TransitionGraph {
            vertices: vec![root.clone()],
            index: HashMap::from([(root, 0)]),
            succ: Vec::new(),
            event_names,
        };
        let mut v = 0;
        while v < graph.vertices.len() {
            let mut row = Vec::with_capacity(n_events);
            for e in 0..n_events {
                let next = step(&graph.vertices[v], EventId(e)).map(|target| {
                    let fresh = graph.vertices.len();
                    *graph.index.entry(target.clone()).or_insert_with(|| {
                        graph.vertices.push(target);
                        fresh
                    })
                });
                row.push(next);
            }
            graph.succ.push(row);
            v += 1;
        }
        graph
    }

    pub fn root(&self) -> &FuzzyState<G> {
        &self.vertices[0]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[FuzzyState<G>] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &FuzzyState<G> {
        &self.vertices[v]
    }

    pub fn index_of(&self, state: &FuzzyState<G>) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub(crate) fn require(&self, state: &FuzzyState<G>) -> Result<usize> {
        self.index_of(state)
            .ok_or_else(|| Error::NotAVertex(state.to_string()))
    }

    pub fn event_count(&self) -> usize {
        self.event_names.len()
    }

    pub fn event_names(&self) -> &[String] {
        &self.event_names
    }

    pub fn successor(&self, v: usize, event: EventId) -> Option<usize> {
        self.succ[v][event.0]
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = (EventId, usize)> + '_ {
        self.succ[v]
            .iter()
            .enumerate()
            .filter_map(|(e, t)| t.map(|t| (EventId(e), t)))
    }

    /// All edges `(source, event, target)` in vertex-then-event order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, EventId, usize)> + '_ {
        (0..self.len()).flat_map(move |v| self.successors(v).map(move |(e, t)| (v, e, t)))
    }

    pub fn is_dead(&self, v: usize) -> bool {
        self.succ[v].iter().all(Option::is_none)
    }

    /// Marks every vertex reachable from the marked `sources`.
    pub fn forward_closure(&self, sources: &[bool]) -> Vec<bool> {
        let mut seen = sources.to_vec();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&v| seen[v]).collect();
        while let Some(v) = queue.pop_front() {
            for (_, t) in self.successors(v) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Marks every vertex from which some marked target is reachable.
    pub fn backward_closure(&self, targets: &[bool]) -> Vec<bool> {
        let mut preds = vec![Vec::new(); self.len()];
        for (v, _, t) in self.edges() {
            preds[t].push(v);
        }
        let mut seen = targets.to_vec();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&v| seen[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Shortest event word from `from` to `to`, if any. Ties go to the
    /// lexicographically smallest word in vertex/event order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<EventId>> {
        let mut parent: Vec<Option<(usize, EventId)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut word = Vec::new();
                let mut cur = to;
                while let Some((p, e)) = parent[cur] {
                    word.push(e);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for (e, t) in self.successors(v) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((v, e));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Breadth-first distances from `from`; `None` when unreachable.
    pub fn distances_from(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for (_, t) in self.successors(v) {
                if dist[t].is_none() {
                    dist[t] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}
