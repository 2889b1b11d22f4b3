//! Which fuzzy states can some controller make reachable.
//!
//! A controller can only shrink the open-loop trajectory by a scalar, and it
//! may never go below the uncontrollable degree of an event it uses. So the
//! reachable family is a union over open-loop states `q` of `{α·q : χ(q) ≤ α ≤ 1}`
//! where `χ(q)` is the least uncontrollable degree of any event occurring on a
//! path from the root to `q`.

use crate::automaton::{ClosedLoop, EventId, Fsfc, MaxMinAutomaton, Word};
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::graph::TransitionGraph;
use crate::lattice::{scale_product, solve_scale, FuzzyState};

/// `χ(q)`: the least uncontrollable degree among events labelling an edge
/// from which `q` can be reached; `1` if there is none.
pub fn chi<G: Grade>(graph: &TransitionGraph<G>, uc: &[G], q: &FuzzyState<G>) -> Result<G> {
    let v = graph.require(q)?;
    Ok(chi_at(graph, uc, v))
}

fn chi_at<G: Grade>(graph: &TransitionGraph<G>, uc: &[G], v: usize) -> G {
    let mut target = vec![false; graph.len()];
    target[v] = true;
    let reaches = graph.backward_closure(&target);
    graph
        .edges()
        .filter(|&(_, _, t)| reaches[t])
        .map(|(_, e, _)| uc[e.0])
        .min()
        .unwrap_or_else(G::one)
}

/// The symbolic family: each accessible state with its threshold.
#[derive(Clone, Debug)]
pub struct ReachFamily<G> {
    graph: TransitionGraph<G>,
    chi: Vec<G>,
    uc: Vec<G>,
}

/// A controller that drives the system to a requested state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachWitness<G> {
    pub base: FuzzyState<G>,
    pub alpha: G,
    pub path: Word,
    pub controller: Fsfc<G>,
}

pub fn reach_family<G: Grade>(aut: &MaxMinAutomaton<G>) -> ReachFamily<G> {
    let graph = aut.accessible_part();
    let uc = aut.uc_degrees();
    let chi = (0..graph.len()).map(|v| chi_at(&graph, &uc, v)).collect();
    ReachFamily { graph, chi, uc }
}

impl<G: Grade> ReachFamily<G> {
    pub fn graph(&self) -> &TransitionGraph<G> {
        &self.graph
    }

    /// `(base, χ(base))` pairs in vertex order.
    pub fn entries(&self) -> impl Iterator<Item = (&FuzzyState<G>, G)> + '_ {
        self.graph.vertices().iter().zip(self.chi.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn chi_of(&self, q: &FuzzyState<G>) -> Option<G> {
        self.graph.index_of(q).map(|v| self.chi[v])
    }

    /// Membership test. On success returns a controller that steers the
    /// system to `target`, using at most one non-default entry.
    pub fn contains(&self, target: &FuzzyState<G>) -> Result<Option<ReachWitness<G>>> {
        target.check_dim(self.graph.root().dim())?;
        if target.is_zero() {
            return Err(Error::ZeroState);
        }
        // Bases with a higher threshold need less control authority; try them first.
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.chi[v]));
        for v in order {
            let base = self.graph.vertex(v);
            let solution = solve_scale(base, target)?.at_least(self.chi[v]);
            if let Some(alpha) = solution.least() {
                return Ok(Some(self.witness(v, alpha, target)));
            }
        }
        Ok(None)
    }

    fn witness(&self, v: usize, alpha: G, target: &FuzzyState<G>) -> ReachWitness<G> {
        let base = self.graph.vertex(v).clone();
        let mut controller = Fsfc::permissive();
        if *target == base {
            let path = self
                .graph
                .shortest_path(0, v)
                .expect("every vertex is reachable");
            return ReachWitness {
                base,
                alpha,
                path,
                controller,
            };
        }
        // alpha < 1 here, so chi(v) < 1 and some event with that degree
        // labels an edge leading towards v.
        let chi = self.chi[v];
        let mut goal = vec![false; self.graph.len()];
        goal[v] = true;
        let reaches = self.graph.backward_closure(&goal);
        let event = (0..self.uc.len())
            .map(EventId)
            .find(|e| {
                self.uc[e.0] == chi && self.graph.edges().any(|(_, x, t)| x == *e && reaches[t])
            })
            .expect("chi below one is attained by some edge");
        let from_root = self.graph.distances_from(0);
        let (u, w) = self
            .graph
            .edges()
            .filter(|&(_, x, t)| x == event && reaches[t])
            .map(|(u, _, t)| (u, t))
            .min_by_key(|&(u, t)| {
                let tail = self
                    .graph
                    .shortest_path(t, v)
                    .map_or(usize::MAX, |p| p.len());
                from_root[u]
                    .unwrap_or(usize::MAX)
                    .saturating_add(1)
                    .saturating_add(tail)
            })
            .expect("an edge was found above");
        let mut path = self
            .graph
            .shortest_path(0, u)
            .expect("every vertex is reachable");
        path.push(event);
        path.extend(self.graph.shortest_path(w, v).expect("w reaches v"));
        controller.set(self.graph.vertex(u).clone(), event, alpha);
        debug_assert_eq!(scale_product(alpha, &base), *target);
        ReachWitness {
            base,
            alpha,
            path,
            controller,
        }
    }
}

/// Membership in the reachable family of `aut`.
pub fn family_contains<G: Grade>(
    fam: &ReachFamily<G>,
    target: &FuzzyState<G>,
) -> Result<Option<ReachWitness<G>>> {
    fam.contains(target)
}

impl<G: Grade> ReachWitness<G> {
    /// Replays the witness and returns the closed-loop state it ends in.
    pub fn replay(&self, aut: &MaxMinAutomaton<G>) -> Result<Option<FuzzyState<G>>> {
        Ok(ClosedLoop::new(aut, &self.controller)?.run(&self.path))
    }
}
