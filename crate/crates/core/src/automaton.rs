//! Max-min automata, state feedback controllers and closed-loop dynamics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::graph::TransitionGraph;
use crate::lattice::{compose_unchecked, scale_product, EventMatrix, FuzzyEvent, FuzzyState};

/// Position of an event in its automaton's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub usize);

/// A string of events.
pub type Word = Vec<EventId>;

/// A max-min automaton: crisp state labels, an initial fuzzy state and an
/// ordered alphabet of fuzzy events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxMinAutomaton<G> {
    state_labels: Vec<String>,
    initial: FuzzyState<G>,
    events: Vec<FuzzyEvent<G>>,
    by_name: HashMap<String, EventId>,
}

impl<G: Grade> MaxMinAutomaton<G> {
    pub fn new(
        state_labels: Vec<String>,
        initial: FuzzyState<G>,
        events: Vec<FuzzyEvent<G>>,
    ) -> Result<Self> {
        let n = state_labels.len();
        if n == 0 {
            return Err(Error::EmptyStateSpace);
        }
        initial.check_dim(n)?;
        if initial.is_zero() {
            return Err(Error::ZeroInitialState);
        }
        let mut by_name = HashMap::new();
        for (k, event) in events.iter().enumerate() {
            if event.matrix.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: event.matrix.dim(),
                });
            }
            if by_name.insert(event.name.clone(), EventId(k)).is_some() {
                return Err(Error::DuplicateEvent(event.name.clone()));
            }
        }
        Ok(MaxMinAutomaton {
            state_labels,
            initial,
            events,
            by_name,
        })
    }

    /// Labels crisp states `q0 … q{n-1}`.
    pub fn with_default_labels(initial: FuzzyState<G>, events: Vec<FuzzyEvent<G>>) -> Result<Self> {
        let labels = (0..initial.dim()).map(|i| format!("q{i}")).collect();
        Self::new(labels, initial, events)
    }

    pub fn dim(&self) -> usize {
        self.state_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn initial(&self) -> &FuzzyState<G> {
        &self.initial
    }

    pub fn events(&self) -> &[FuzzyEvent<G>] {
        &self.events
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len()).map(EventId)
    }

    pub fn event(&self, id: EventId) -> &FuzzyEvent<G> {
        &self.events[id.0]
    }

    pub fn event_names(&self) -> Vec<String> {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    pub fn uc_degree(&self, id: EventId) -> G {
        self.events[id.0].uc_degree
    }

    pub fn uc_degrees(&self) -> Vec<G> {
        self.events.iter().map(|e| e.uc_degree).collect()
    }

    pub fn event_id(&self, name: &str) -> Result<EventId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(name.to_string()))
    }

    /// Resolves a sequence of event names.
    pub fn word<S: AsRef<str>>(&self, names: &[S]) -> Result<Word> {
        names.iter().map(|n| self.event_id(n.as_ref())).collect()
    }

    /// Renders a word as concatenated names separated by spaces; `ε` if empty.
    pub fn format_word(&self, word: &[EventId]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.iter()
            .map(|e| self.events[e.0].name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Every grade occurring in the automaton, plus `0` and `1`.
    pub fn breakpoints(&self) -> BTreeSet<G> {
        let mut grid: BTreeSet<G> = [G::zero(), G::one()].into();
        grid.extend(self.initial.components().iter().copied());
        for event in &self.events {
            grid.extend(event.matrix.entries().iter().copied());
            grid.insert(event.uc_degree);
        }
        grid
    }

    pub(crate) fn check_state(&self, q: &FuzzyState<G>) -> Result<()> {
        q.check_dim(self.dim())
    }

    /// `δ(q, a) = q ∘ a`. The result may be the all-zero vector.
    pub fn step(&self, q: &FuzzyState<G>, event: EventId) -> FuzzyState<G> {
        compose_unchecked(q, &self.events[event.0].matrix)
    }

    pub fn step_by_name(&self, q: &FuzzyState<G>, name: &str) -> Result<FuzzyState<G>> {
        self.check_state(q)?;
        let id = self.event_id(name)?;
        Ok(self.step(q, id))
    }

    /// Left fold of [`step`](Self::step) from `from`.
    pub fn run_from(&self, from: &FuzzyState<G>, word: &[EventId]) -> FuzzyState<G> {
        word.iter().fold(from.clone(), |q, &e| self.step(&q, e))
    }

    /// `δ(q₀, s)`.
    pub fn run(&self, word: &[EventId]) -> FuzzyState<G> {
        self.run_from(&self.initial, word)
    }

    /// Open-loop degree of a word: `1` for `ε`, otherwise the height of `δ(q₀, s)`.
    pub fn language_degree(&self, word: &[EventId]) -> G {
        if word.is_empty() {
            return G::one();
        }
        self.run(word).height()
    }

    /// The accessible part: breadth-first closure of `q₀`, skipping zero results.
    pub fn accessible_part(&self) -> TransitionGraph<G> {
        TransitionGraph::explore(self.initial.clone(), self.event_names(), |q, e| {
            Some(self.step(q, e)).filter(|p| !p.is_zero())
        })
    }

    /// Open-loop trajectory along `word`. Stops early if a step yields the zero vector.
    pub fn trajectory(&self, word: &[EventId]) -> Trajectory<G> {
        let mut traj = Trajectory::start(self.initial.clone());
        for &e in word {
            let next = self.step(traj.last(), e);
            if next.is_zero() {
                break;
            }
            traj.push(e, None, next);
        }
        traj
    }
}

/// An alternating run `q₀ a₁ q₁ … a_k q_k`, with the control value applied at
/// each step when closed-loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory<G> {
    pub states: Vec<FuzzyState<G>>,
    pub events: Vec<EventId>,
    pub controls: Vec<Option<G>>,
}

impl<G: Grade> Trajectory<G> {
    fn start(q: FuzzyState<G>) -> Self {
        Trajectory {
            states: vec![q],
            events: Vec::new(),
            controls: Vec::new(),
        }
    }

    fn push(&mut self, event: EventId, control: Option<G>, next: FuzzyState<G>) {
        self.events.push(event);
        self.controls.push(control);
        self.states.push(next);
    }

    pub fn last(&self) -> &FuzzyState<G> {
        self.states
            .last()
            .expect("trajectory always has a start state")
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A fuzzy state feedback controller: a finite table of enabling degrees
/// `f(q)(a)` plus a default for every pair not in the table.
#[derive(Clone, PartialEq, Eq)]
pub struct Fsfc<G> {
    entries: BTreeMap<(FuzzyState<G>, EventId), G>,
    default: G,
}

impl<G: Grade> Fsfc<G> {
    pub fn new(default: G) -> Self {
        Fsfc {
            entries: BTreeMap::new(),
            default,
        }
    }

    /// The controller enabling everything fully.
    pub fn permissive() -> Self {
        Self::new(G::one())
    }

    pub fn set(&mut self, state: FuzzyState<G>, event: EventId, value: G) {
        self.entries.insert((state, event), value);
    }

    pub fn with(mut self, state: FuzzyState<G>, event: EventId, value: G) -> Self {
        self.set(state, event, value);
        self
    }

    pub fn get(&self, state: &FuzzyState<G>, event: EventId) -> G {
        // BTreeMap lookups need an owned key; states are short, so clone.
        self.entries
            .get(&(state.clone(), event))
            .copied()
            .unwrap_or(self.default)
    }

    pub fn default_value(&self) -> G {
        self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FuzzyState<G>, EventId, G)> {
        self.entries.iter().map(|((q, e), v)| (q, *e, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks `f(q)(a) ≥ Ẽ_uc(a)` for every stored entry and for the default.
    pub fn validate(&self, aut: &MaxMinAutomaton<G>) -> Result<()> {
        for ((q, e), v) in &self.entries {
            aut.check_state(q)?;
            if e.0 >= aut.events().len() {
                return Err(Error::UnknownEvent(format!("#{}", e.0)));
            }
            let floor = aut.uc_degree(*e);
            if *v < floor {
                return Err(Error::ControlBelowFloor {
                    state: q.to_string(),
                    event: aut.event(*e).name.clone(),
                    value: v.to_string(),
                    floor: floor.to_string(),
                });
            }
        }
        for e in aut.event_ids() {
            let floor = aut.uc_degree(e);
            if self.default < floor {
                return Err(Error::ControlBelowFloor {
                    state: "<default>".to_string(),
                    event: aut.event(e).name.clone(),
                    value: self.default.to_string(),
                    floor: floor.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl<G: fmt::Debug> fmt::Debug for Fsfc<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fsfc")
            .field("default", &self.default)
            .field("entries", &self.entries)
            .finish()
    }
}

/// An automaton under a validated controller.
#[derive(Clone, Copy, Debug)]
pub struct ClosedLoop<'a, G> {
    aut: &'a MaxMinAutomaton<G>,
    fsfc: &'a Fsfc<G>,
}

impl<'a, G: Grade> ClosedLoop<'a, G> {
    pub fn new(aut: &'a MaxMinAutomaton<G>, fsfc: &'a Fsfc<G>) -> Result<Self> {
        fsfc.validate(aut)?;
        Ok(ClosedLoop { aut, fsfc })
    }

    pub fn automaton(&self) -> &'a MaxMinAutomaton<G> {
        self.aut
    }

    pub fn controller(&self) -> &'a Fsfc<G> {
        self.fsfc
    }

    /// `δᶠ(q, a) = f(q)(a) · (q ∘ a)`, or `None` when that is the zero vector.
    pub fn step(&self, q: &FuzzyState<G>, event: EventId) -> Option<FuzzyState<G>> {
        let next = scale_product(self.fsfc.get(q, event), &self.aut.step(q, event));
        (!next.is_zero()).then_some(next)
    }

    pub fn step_by_name(&self, q: &FuzzyState<G>, name: &str) -> Result<Option<FuzzyState<G>>> {
        self.aut.check_state(q)?;
        Ok(self.step(q, self.aut.event_id(name)?))
    }

    /// `δᶠ(q₀, s)`, or `None` once some step is undefined.
    pub fn run(&self, word: &[EventId]) -> Option<FuzzyState<G>> {
        let mut q = self.aut.initial().clone();
        for &e in word {
            q = self.step(&q, e)?;
        }
        Some(q)
    }

    /// Closed-loop trajectory along `word`, truncated where a step is undefined.
    pub fn trajectory(&self, word: &[EventId]) -> Trajectory<G> {
        let mut traj = Trajectory::start(self.aut.initial().clone());
        for &e in word {
            let alpha = self.fsfc.get(traj.last(), e);
            match self.step(traj.last(), e) {
                Some(next) => traj.push(e, Some(alpha), next),
                None => break,
            }
        }
        traj
    }

    /// Closed-loop degree: `1` for `ε`, the height of `δᶠ(q₀, s)` when defined, else `0`.
    pub fn language_degree(&self, word: &[EventId]) -> G {
        if word.is_empty() {
            return G::one();
        }
        self.run(word).map_or_else(G::zero, |q| q.height())
    }

    /// The reachable part of the closed loop as a transition graph.
    pub fn graph(&self) -> TransitionGraph<G> {
        TransitionGraph::explore(
            self.aut.initial().clone(),
            self.aut.event_names(),
            |q, e| self.step(q, e),
        )
    }

    /// `R(Gᶠ)`.
    pub fn reachable(&self) -> BTreeSet<FuzzyState<G>> {
        self.graph().vertices().iter().cloned().collect()
    }
}

/// An event whose matrix is the identity, handy for fixtures.
pub fn identity_event<G: Grade>(name: &str, n: usize, uc_degree: G) -> FuzzyEvent<G> {
    FuzzyEvent::new(name, EventMatrix::identity(n), uc_degree)
}
