//! Small reference systems used by the tests, the examples in the README and
//! the command-line tool's bundled data files.
//!
//! The main one models ammonia concentration in a waste water tank. Crisp
//! states are high, medium and low concentration; events are nitrification
//! (`a`), aeration (`b`), temperature increase (`c`) and decrease (`d`).

use crate::automaton::{Fsfc, MaxMinAutomaton};
use crate::grade::{Grade, Possibility};
use crate::language::FuzzyLanguage;
use crate::lattice::{EventMatrix, FuzzyEvent, FuzzyState};

fn state(text: &str) -> FuzzyState<Possibility> {
    text.parse().expect("fixture state literal")
}

fn grade(text: &str) -> Possibility {
    text.parse().expect("fixture grade literal")
}

fn matrix(rows: [&str; 3]) -> EventMatrix<Possibility> {
    EventMatrix::from_rows(
        rows.iter()
            .map(|r| state(r).components().to_vec())
            .collect(),
    )
    .expect("square fixture")
}

fn labels() -> Vec<String> {
    ["high", "medium", "low"].map(String::from).to_vec()
}

const NITRIFICATION: [&str; 3] = ["0.1,0.9,0.1", "0,0,1", "0,0,1"];

/// The waste water system with degrees of uncontrollability 0, 0.1, 1, 1.
pub fn wastewater() -> MaxMinAutomaton<Possibility> {
    let events = vec![
        FuzzyEvent::new("a", matrix(NITRIFICATION), grade("0")),
        FuzzyEvent::new(
            "b",
            matrix(["0.9,0.1,0", "0,0.1,0.9", "0,0,1"]),
            grade("0.1"),
        ),
        FuzzyEvent::new("c", matrix(["1,0.1,0", "0,0.5,0.5", "0,0,1"]), grade("1")),
        FuzzyEvent::new("d", matrix(["1,0,0", "0.5,0.5,0", "0,0.5,0.5"]), grade("1")),
    ];
    MaxMinAutomaton::new(labels(), state("[0.9,0.1,0]"), events).expect("valid fixture")
}

/// The nine open-loop reachable states of [`wastewater`] in their customary
/// numbering, followed by `[0.1, 0.1, 0.1]`, which only a controller reaches.
pub fn wastewater_states() -> Vec<FuzzyState<Possibility>> {
    [
        "[0.9,0.1,0]",
        "[0.9,0.1,0.1]",
        "[0.5,0.5,0.1]",
        "[0.1,0.9,0.1]",
        "[0.1,0.1,0.9]",
        "[0.5,0.1,0.5]",
        "[0.5,0.5,0.5]",
        "[0.1,0.5,0.5]",
        "[0.1,0.1,0.5]",
        "[0.1,0.1,0.1]",
    ]
    .map(state)
    .to_vec()
}

/// The admissible set excluding the undesirable `[0.5, 0.1, 0.5]` and
/// `[0.1, 0.1, 0.5]`, in numbering order.
pub fn admissible_set() -> Vec<FuzzyState<Possibility>> {
    let all = wastewater_states();
    [0, 1, 2, 3, 4, 6, 7, 9]
        .iter()
        .map(|&i| all[i].clone())
        .collect()
}

/// A hand-designed controller whose closed loop reaches exactly [`admissible_set`].
pub fn admissible_controller() -> Fsfc<Possibility> {
    let aut = wastewater();
    let q = wastewater_states();
    let ev = |name| aut.event_id(name).expect("fixture event");
    let (a, b) = (ev("a"), ev("b"));
    let mut f = Fsfc::permissive();
    for i in [0, 1, 2] {
        f.set(q[i].clone(), b, grade("0.1"));
    }
    for i in [3, 4] {
        f.set(q[i].clone(), a, grade("0"));
    }
    f.set(q[6].clone(), a, grade("0.5"));
    f.set(q[6].clone(), b, grade("0.1"));
    for i in [7, 9] {
        f.set(q[i].clone(), a, grade("0"));
        f.set(q[i].clone(), b, grade("0.1"));
    }
    f
}

/// Only nitrification, now with degree of uncontrollability 0.8.
pub fn nitrification_only() -> MaxMinAutomaton<Possibility> {
    let events = vec![FuzzyEvent::new("a", matrix(NITRIFICATION), grade("0.8"))];
    MaxMinAutomaton::new(labels(), state("[0.9,0.1,0]"), events).expect("valid fixture")
}

/// Two controllable sets for [`nitrification_only`] whose union and
/// intersection are both uncontrollable.
pub fn nitrification_pair() -> (Vec<FuzzyState<Possibility>>, Vec<FuzzyState<Possibility>>) {
    (
        ["[0.9,0.1,0]", "[0.1,0.9,0.1]", "[0.1,0.1,0.9]"]
            .map(state)
            .to_vec(),
        ["[0.9,0.1,0]", "[0.1,0.8,0.1]", "[0.1,0.1,0.8]"]
            .map(state)
            .to_vec(),
    )
}

/// Three fully controllable events over the same crisp states.
pub fn three_event() -> MaxMinAutomaton<Possibility> {
    let events = vec![
        FuzzyEvent::new(
            "a1",
            matrix(["0.4,0,0", "0.4,0.4,0", "0.4,0.9,0.4"]),
            grade("0"),
        ),
        FuzzyEvent::new(
            "a2",
            matrix(["0.4,0,0", "0.9,0.4,0", "0.4,0.4,0.4"]),
            grade("0"),
        ),
        FuzzyEvent::new(
            "a3",
            matrix(["0.4,0,0", "0.4,0.4,0", "0.9,0.4,0.4"]),
            grade("0"),
        ),
    ];
    MaxMinAutomaton::new(labels(), state("[0.9,0.1,0]"), events).expect("valid fixture")
}

/// A controllable language over [`three_event`] that is not consistent.
pub fn three_event_language() -> FuzzyLanguage<Possibility> {
    let aut = three_event();
    let entries = [
        (vec!["a1"], "0.2"),
        (vec!["a2"], "0.3"),
        (vec!["a3"], "0.3"),
        (vec!["a2", "a1"], "0.2"),
        (vec!["a3", "a1"], "0.3"),
    ];
    FuzzyLanguage::new(
        entries
            .iter()
            .map(|(w, d)| (aut.word(w).expect("fixture word"), grade(d))),
    )
    .expect("valid fixture language")
}

/// A copy of `aut` with every degree of uncontrollability replaced by `uc`.
pub fn with_uc<G: Grade>(aut: &MaxMinAutomaton<G>, uc: G) -> MaxMinAutomaton<G> {
    let events = aut
        .events()
        .iter()
        .map(|e| FuzzyEvent::new(e.name.clone(), e.matrix.clone(), uc))
        .collect();
    MaxMinAutomaton::new(aut.state_labels().to_vec(), aut.initial().clone(), events)
        .expect("same shape")
}
