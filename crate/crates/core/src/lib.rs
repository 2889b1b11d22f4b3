//! State-feedback control of fuzzy discrete-event systems modeled by max-min
//! automata.
//!
//! The algorithms are generic over the scalar [`Grade`]. The crate root
//! re-exports concrete aliases over the exact decimal [`Possibility`] grade,
//! which is what the file formats and the command-line tool use.

pub mod automaton;
pub mod controllability;
pub mod error;
pub mod fixtures;
pub mod grade;
pub mod graph;
pub mod io;
pub mod language;
pub mod lattice;
pub mod reachability;
pub mod stability;

pub use automaton::{EventId, Word};
pub use error::{Error, Result};
pub use grade::{Grade, Possibility};
pub use lattice::{maxmin_compose, scale_product, solve_scale, ScaleSolution};

/// Exact rational grades.
pub type RationalGrade = num_rational::Ratio<i64>;
/// Floating-point grades.
pub type FloatGrade = ordered_float::OrderedFloat<f64>;

pub type FuzzyState = lattice::FuzzyState<Possibility>;
pub type EventMatrix = lattice::EventMatrix<Possibility>;
pub type FuzzyEvent = lattice::FuzzyEvent<Possibility>;
pub type MaxMinAutomaton = automaton::MaxMinAutomaton<Possibility>;
pub type Fsfc = automaton::Fsfc<Possibility>;
pub type ClosedLoop<'a> = automaton::ClosedLoop<'a, Possibility>;
pub type Trajectory = automaton::Trajectory<Possibility>;
pub type TransitionGraph = graph::TransitionGraph<Possibility>;
pub type ReachFamily = reachability::ReachFamily<Possibility>;
pub type ReachWitness = reachability::ReachWitness<Possibility>;
pub type StateSet = controllability::StateSet<Possibility>;
pub type SuccessorGraph = controllability::SuccessorGraph<Possibility>;
pub type FuzzyLanguage = language::FuzzyLanguage<Possibility>;
