//! JSON documents for automata and analysis inputs, and Graphviz export.
//!
//! Every grade is carried as a decimal string so that reading and writing a
//! document never goes through binary floating point.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automaton::{Fsfc, MaxMinAutomaton};
use crate::controllability::{ControllableSubgraph, StateSet, SuccessorGraph};
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::graph::TransitionGraph;
use crate::language::FuzzyLanguage;
use crate::lattice::{EventMatrix, FuzzyEvent, FuzzyState};
use crate::stability::StabilizabilityCandidate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDocument {
    pub n: usize,
    pub state_labels: Vec<String>,
    pub initial: Vec<String>,
    pub events: Vec<EventDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDocument {
    pub name: String,
    pub uncontrollable_degree: String,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageEntry {
    pub word: Vec<String>,
    pub degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideEntry {
    pub state: Vec<String>,
    pub event: String,
    pub value: String,
}

/// An analysis input, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecDocument {
    State {
        state: Vec<String>,
    },
    StateSet {
        states: Vec<Vec<String>>,
    },
    Language {
        entries: Vec<LanguageEntry>,
    },
    Fsfc {
        default: String,
        overrides: Vec<OverrideEntry>,
    },
    Witness {
        n: Vec<Vec<String>>,
        n_prime: Vec<Vec<String>>,
        p: Vec<Vec<String>>,
    },
}

/// A validated analysis input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spec<G> {
    State(FuzzyState<G>),
    StateSet(StateSet<G>),
    Language(FuzzyLanguage<G>),
    Fsfc(Fsfc<G>),
    Witness {
        legal: StateSet<G>,
        candidate: StabilizabilityCandidate<G>,
    },
}

impl<G> Spec<G> {
    pub fn kind(&self) -> &'static str {
        match self {
            Spec::State(_) => "state",
            Spec::StateSet(_) => "state_set",
            Spec::Language(_) => "language",
            Spec::Fsfc(_) => "fsfc",
            Spec::Witness { .. } => "witness",
        }
    }
}

fn doc_err(location: impl Into<String>, message: impl ToString) -> Error {
    Error::Document {
        location: location.into(),
        message: message.to_string(),
    }
}

fn json_err(e: serde_json::Error) -> Error {
    doc_err(format!("line {} column {}", e.line(), e.column()), e)
}

fn at<T>(location: impl FnOnce() -> String, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Document { .. } => e,
        other => doc_err(location(), other),
    })
}

fn grade_at<G: Grade>(text: &str, location: impl FnOnce() -> String) -> Result<G> {
    at(location, G::parse_grade(text))
}

fn vector_at<G: Grade>(items: &[String], n: usize, location: &str) -> Result<FuzzyState<G>> {
    if items.len() != n {
        return Err(doc_err(
            location,
            Error::DimensionMismatch {
                expected: n,
                found: items.len(),
            },
        ));
    }
    let comps = items
        .iter()
        .enumerate()
        .map(|(i, t)| grade_at(t, || format!("{location}[{i}]")))
        .collect::<Result<Vec<G>>>()?;
    Ok(FuzzyState::new(comps))
}

fn render<G: Grade>(q: &FuzzyState<G>) -> Vec<String> {
    q.components().iter().map(|c| c.to_string()).collect()
}

impl AutomatonDocument {
    pub fn from_automaton<G: Grade>(aut: &MaxMinAutomaton<G>) -> Self {
        AutomatonDocument {
            n: aut.dim(),
            state_labels: aut.state_labels().to_vec(),
            initial: render(aut.initial()),
            events: aut
                .events()
                .iter()
                .map(|e| EventDocument {
                    name: e.name.clone(),
                    uncontrollable_degree: e.uc_degree.to_string(),
                    matrix: e
                        .matrix
                        .rows()
                        .map(|row| row.iter().map(|x| x.to_string()).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_automaton<G: Grade>(&self) -> Result<MaxMinAutomaton<G>> {
        let n = self.n;
        if n == 0 {
            return Err(doc_err("n", Error::EmptyStateSpace));
        }
        if self.state_labels.len() != n {
            return Err(doc_err(
                "state_labels",
                Error::DimensionMismatch {
                    expected: n,
                    found: self.state_labels.len(),
                },
            ));
        }
        let initial = vector_at(&self.initial, n, "initial")?;
        if initial.is_zero() {
            return Err(doc_err("initial", Error::ZeroInitialState));
        }
        let mut events = Vec::with_capacity(self.events.len());
        for (k, e) in self.events.iter().enumerate() {
            let uc = grade_at(&e.uncontrollable_degree, || {
                format!("events[{k}].uncontrollable_degree")
            })?;
            if e.matrix.len() != n {
                return Err(doc_err(
                    format!("events[{k}].matrix"),
                    Error::DimensionMismatch {
                        expected: n,
                        found: e.matrix.len(),
                    },
                ));
            }
            let rows = e
                .matrix
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    vector_at(row, n, &format!("events[{k}].matrix[{i}]"))
                        .map(|r| r.components().to_vec())
                })
                .collect::<Result<Vec<_>>>()?;
            let matrix = EventMatrix::from_rows(rows)?;
            events.push(FuzzyEvent::new(e.name.clone(), matrix, uc));
        }
        at(
            || "events".to_string(),
            MaxMinAutomaton::new(self.state_labels.clone(), initial, events),
        )
    }
}

pub fn parse_automaton<G: Grade>(text: &str) -> Result<MaxMinAutomaton<G>> {
    let doc: AutomatonDocument = serde_json::from_str(text).map_err(json_err)?;
    doc.to_automaton()
}

pub fn automaton_to_json<G: Grade>(aut: &MaxMinAutomaton<G>) -> String {
    serde_json::to_string_pretty(&AutomatonDocument::from_automaton(aut))
        .expect("documents always serialize")
}

fn set_at<G: Grade>(items: &[Vec<String>], n: usize, location: &str) -> Result<StateSet<G>> {
    let states = items
        .iter()
        .enumerate()
        .map(|(i, v)| vector_at(v, n, &format!("{location}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    at(|| location.to_string(), StateSet::new(states))
}

impl SpecDocument {
    pub fn to_spec<G: Grade>(&self, aut: &MaxMinAutomaton<G>) -> Result<Spec<G>> {
        let n = aut.dim();
        Ok(match self {
            SpecDocument::State { state } => {
                let q = vector_at(state, n, "state")?;
                if q.is_zero() {
                    return Err(doc_err("state", Error::ZeroState));
                }
                Spec::State(q)
            }
            SpecDocument::StateSet { states } => Spec::StateSet(set_at(states, n, "states")?),
            SpecDocument::Language { entries } => {
                let mut pairs = Vec::with_capacity(entries.len());
                for (i, e) in entries.iter().enumerate() {
                    let word = at(|| format!("entries[{i}].word"), aut.word(&e.word))?;
                    let degree = grade_at(&e.degree, || format!("entries[{i}].degree"))?;
                    pairs.push((word, degree));
                }
                Spec::Language(at(|| "entries".to_string(), FuzzyLanguage::new(pairs))?)
            }
            SpecDocument::Fsfc { default, overrides } => {
                let mut f = Fsfc::new(grade_at(default, || "default".to_string())?);
                for (i, o) in overrides.iter().enumerate() {
                    let q = vector_at(&o.state, n, &format!("overrides[{i}].state"))?;
                    let e = at(|| format!("overrides[{i}].event"), aut.event_id(&o.event))?;
                    f.set(
                        q,
                        e,
                        grade_at(&o.value, || format!("overrides[{i}].value"))?,
                    );
                }
                at(|| "overrides".to_string(), f.validate(aut))?;
                Spec::Fsfc(f)
            }
            SpecDocument::Witness {
                n: legal,
                n_prime,
                p,
            } => Spec::Witness {
                legal: set_at(legal, n, "n")?,
                candidate: StabilizabilityCandidate {
                    n_prime: set_at(n_prime, n, "n_prime")?,
                    p_set: set_at(p, n, "p")?,
                },
            },
        })
    }

    pub fn from_spec<G: Grade>(aut: &MaxMinAutomaton<G>, spec: &Spec<G>) -> Self {
        let set = |s: &StateSet<G>| s.iter().map(render).collect();
        match spec {
            Spec::State(q) => SpecDocument::State { state: render(q) },
            Spec::StateSet(s) => SpecDocument::StateSet { states: set(s) },
            Spec::Language(k) => SpecDocument::Language {
                entries: k
                    .support()
                    .filter(|(w, _)| !w.is_empty())
                    .map(|(w, d)| LanguageEntry {
                        word: w.iter().map(|&e| aut.event(e).name.clone()).collect(),
                        degree: d.to_string(),
                    })
                    .collect(),
            },
            Spec::Fsfc(f) => SpecDocument::Fsfc {
                default: f.default_value().to_string(),
                overrides: f
                    .entries()
                    .map(|(q, e, v)| OverrideEntry {
                        state: render(q),
                        event: aut.event(e).name.clone(),
                        value: v.to_string(),
                    })
                    .collect(),
            },
            Spec::Witness { legal, candidate } => SpecDocument::Witness {
                n: set(legal),
                n_prime: set(&candidate.n_prime),
                p: set(&candidate.p_set),
            },
        }
    }
}

pub fn parse_spec<G: Grade>(aut: &MaxMinAutomaton<G>, text: &str) -> Result<Spec<G>> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(json_err)?;
    doc.to_spec(aut)
}

pub fn spec_to_json<G: Grade>(aut: &MaxMinAutomaton<G>, spec: &Spec<G>) -> String {
    serde_json::to_string_pretty(&SpecDocument::from_spec(aut, spec))
        .expect("documents always serialize")
}

/// Parses a one-line spec:
///
/// - `state:[0,0.1,0.9]`
/// - `set:[0.9,0.1,0];[0.1,0.9,0.1]`, or `set:` for the empty set
/// - `fsfc:1` for a constant controller
/// - `language:a1=0.2;a2 a1=0.2`
pub fn parse_inline_spec<G: Grade>(aut: &MaxMinAutomaton<G>, text: &str) -> Result<Spec<G>> {
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| doc_err("inline spec", "expected `kind:value`"))?;
    let body = body.trim();
    let parts = || body.split(';').map(str::trim).filter(|s| !s.is_empty());
    let doc = match kind.trim() {
        "state" => SpecDocument::State {
            state: split_vector(body),
        },
        "set" | "state_set" => SpecDocument::StateSet {
            states: parts().map(split_vector).collect(),
        },
        "fsfc" => SpecDocument::Fsfc {
            default: body.to_string(),
            overrides: Vec::new(),
        },
        "language" => SpecDocument::Language {
            entries: parts()
                .map(|entry| {
                    let (word, degree) = entry.split_once('=').ok_or_else(|| {
                        doc_err(
                            "inline spec",
                            format!("expected `word=degree`, found `{entry}`"),
                        )
                    })?;
                    Ok(LanguageEntry {
                        word: word.split_whitespace().map(String::from).collect(),
                        degree: degree.trim().to_string(),
                    })
                })
                .collect::<Result<_>>()?,
        },
        other => return Err(doc_err("inline spec", format!("unknown kind `{other}`"))),
    };
    doc.to_spec(aut)
}

fn split_vector(text: &str) -> Vec<String> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Vec::new();
    }
    inner.split(',').map(|s| s.trim().to_string()).collect()
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dot_nodes<'a, G: Grade>(
    out: &mut String,
    states: impl Iterator<Item = &'a FuzzyState<G>>,
    root: Option<usize>,
) {
    for (v, q) in states.enumerate() {
        let shape = if Some(v) == root {
            ", shape=doublecircle"
        } else {
            ""
        };
        let _ = writeln!(out, "  v{v} [label={}{shape}];", quote(&q.to_string()));
    }
}

/// Renders a transition graph; the root is drawn as a double circle.
pub fn export_dot_graph<G: Grade>(g: &TransitionGraph<G>) -> String {
    let mut out = String::from("digraph transitions {\n");
    dot_nodes(&mut out, g.vertices().iter(), (!g.is_empty()).then_some(0));
    for (u, e, v) in g.edges() {
        let _ = writeln!(
            out,
            "  v{u} -> v{v} [label={}];",
            quote(&g.event_names()[e.0])
        );
    }
    out.push_str("}\n");
    out
}

/// Renders a successor graph; edges carry their event and admissible scalars.
pub fn export_dot_successors<G: Grade>(sg: &SuccessorGraph<G>) -> String {
    let mut out = String::from("digraph successors {\n");
    dot_nodes(&mut out, sg.states().iter(), sg.root());
    for edge in sg.edges() {
        let label = format!("{} {}", sg.event_names()[edge.event.0], edge.range);
        let _ = writeln!(
            out,
            "  v{} -> v{} [label={}];",
            edge.source,
            edge.target,
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}

/// Renders the edges selected by a controllable subgraph.
pub fn export_dot_subgraph<G: Grade>(sg: &SuccessorGraph<G>, sub: &ControllableSubgraph) -> String {
    let mut out = String::from("digraph subgraph {\n");
    dot_nodes(&mut out, sg.states().iter(), sg.root());
    for (u, e, v) in sub.edges() {
        let _ = writeln!(
            out,
            "  v{u} -> v{v} [label={}];",
            quote(&sg.event_names()[e.0])
        );
    }
    out.push_str("}\n");
    out
}
