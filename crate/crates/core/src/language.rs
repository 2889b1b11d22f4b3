//! Fuzzy languages, event-feedback supervisors, and how they relate to state
//! feedback.

use std::collections::{BTreeMap, HashMap};

use crate::automaton::{ClosedLoop, EventId, Fsfc, MaxMinAutomaton, Word};
use crate::controllability::StateSet;
use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::lattice::{scale_product, FuzzyState};

/// A fuzzy language with finite support.
///
/// Either the empty language, or a map with degree `1` at the empty word in
/// which no word has a larger degree than its prefix. Words of degree zero
/// are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzyLanguage<G> {
    entries: BTreeMap<Word, G>,
}

impl<G: Grade> FuzzyLanguage<G> {
    /// Builds a nonempty language. The empty word defaults to `1`; giving it
    /// any other degree is an error, as is a repeated word.
    pub fn new(entries: impl IntoIterator<Item = (Word, G)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (word, degree) in entries {
            if map.insert(word.clone(), degree).is_some() {
                return Err(Error::InvalidLanguage(format!(
                    "word {word:?} listed twice"
                )));
            }
        }
        match map.get(&Vec::new()) {
            Some(&d) if d != G::one() => {
                return Err(Error::InvalidLanguage(format!(
                    "the empty word has degree {d}, expected 1"
                )));
            }
            _ => {
                map.insert(Vec::new(), G::one());
            }
        }
        map.retain(|_, d| !d.is_zero());
        for (word, &degree) in &map {
            if let Some((_, prefix)) = word.split_last() {
                let before = map.get(prefix).copied().unwrap_or_else(G::zero);
                if before < degree {
                    return Err(Error::InvalidLanguage(format!(
                        "degree {degree} of {word:?} exceeds degree {before} of its prefix"
                    )));
                }
            }
        }
        Ok(FuzzyLanguage { entries: map })
    }

    /// The empty language, zero everywhere.
    pub fn empty() -> Self {
        FuzzyLanguage {
            entries: BTreeMap::new(),
        }
    }

    /// The language containing only the empty word.
    pub fn epsilon() -> Self {
        FuzzyLanguage {
            entries: BTreeMap::from([(Vec::new(), G::one())]),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degree(&self, word: &[EventId]) -> G {
        self.entries.get(word).copied().unwrap_or_else(G::zero)
    }

    /// Words of nonzero degree in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&Word, G)> + '_ {
        self.entries.iter().map(|(w, d)| (w, *d))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Length of the longest supported word.
    pub fn depth(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Pointwise `≤`.
    pub fn is_sublanguage_of(&self, other: &Self) -> bool {
        self.support().all(|(w, d)| d <= other.degree(w))
    }

    /// Builds from a map already known to be a language.
    fn from_map(entries: BTreeMap<Word, G>) -> Self {
        FuzzyLanguage { entries }
    }
}

/// `(L₁L₂)(s) = max over s = s₁s₂ of min(L₁(s₁), L₂(s₂))`.
pub fn concatenate<G: Grade>(l1: &FuzzyLanguage<G>, l2: &FuzzyLanguage<G>) -> FuzzyLanguage<G> {
    let mut out: BTreeMap<Word, G> = BTreeMap::new();
    for (s1, d1) in l1.support() {
        for (s2, d2) in l2.support() {
            let mut word = s1.clone();
            word.extend_from_slice(s2);
            let d = d1.min(d2);
            let slot = out.entry(word).or_insert(d);
            *slot = (*slot).max(d);
        }
    }
    FuzzyLanguage::from_map(out)
}

/// The language `1/ε + Σ uc(a)/a` lifting the degrees of uncontrollability.
pub fn uc_lifting<G: Grade>(aut: &MaxMinAutomaton<G>) -> FuzzyLanguage<G> {
    let mut map = BTreeMap::from([(Vec::new(), G::one())]);
    for e in aut.event_ids() {
        let uc = aut.uc_degree(e);
        if !uc.is_zero() {
            map.insert(vec![e], uc);
        }
    }
    FuzzyLanguage::from_map(map)
}

/// Enumerates words of length at most `max_len` whose degree under `degree`
/// is nonzero. `degree` must be prefix-monotone.
fn enumerate<G: Grade>(
    events: usize,
    max_len: usize,
    mut degree: impl FnMut(&[EventId]) -> G,
) -> FuzzyLanguage<G> {
    let mut map = BTreeMap::from([(Vec::new(), G::one())]);
    let mut stack = vec![Vec::new()];
    while let Some(word) = stack.pop() {
        if word.len() == max_len {
            continue;
        }
        for e in 0..events {
            let mut next = word.clone();
            next.push(EventId(e));
            let d = degree(&next);
            if !d.is_zero() {
                map.insert(next.clone(), d);
                stack.push(next);
            }
        }
    }
    FuzzyLanguage::from_map(map)
}

/// The generated language truncated to words of length at most `max_len`.
pub fn generated_language<G: Grade>(aut: &MaxMinAutomaton<G>, max_len: usize) -> FuzzyLanguage<G> {
    enumerate(aut.events().len(), max_len, |w| aut.language_degree(w))
}

/// The closed-loop language of a controller, truncated at `max_len`.
pub fn closed_loop_language<G: Grade>(cl: &ClosedLoop<'_, G>, max_len: usize) -> FuzzyLanguage<G> {
    enumerate(cl.automaton().events().len(), max_len, |w| {
        cl.language_degree(w)
    })
}

/// Fails with the first supported word whose degree exceeds the generated one.
pub fn check_sublanguage<G: Grade>(aut: &MaxMinAutomaton<G>, k: &FuzzyLanguage<G>) -> Result<()> {
    for (word, degree) in k.support() {
        let generated = aut.language_degree(word);
        if degree > generated {
            return Err(Error::NotSublanguage {
                word: aut.format_word(word),
                degree: degree.to_string(),
                generated: generated.to_string(),
            });
        }
    }
    Ok(())
}

/// A word and event where `K(s) ∧ uc(a) ∧ L(sa) ≤ K(sa)` fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation<G> {
    pub word: Word,
    pub event: EventId,
    /// `K(s) ∧ uc(a) ∧ L(sa)`.
    pub forced: G,
    /// `K(sa)`.
    pub degree: G,
}

/// Pointwise check over supported words shorter than `horizon`. Words outside
/// the support have degree zero and satisfy the inequality trivially.
fn pointwise_violation<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
    horizon: usize,
) -> Option<Violation<G>> {
    for (word, kd) in k.support().filter(|(w, _)| w.len() < horizon) {
        for event in aut.event_ids() {
            let mut next = word.clone();
            next.push(event);
            let forced = kd.min(aut.uc_degree(event)).min(aut.language_degree(&next));
            let degree = k.degree(&next);
            if forced > degree {
                return Some(Violation {
                    word: word.clone(),
                    event,
                    forced,
                    degree,
                });
            }
        }
    }
    None
}

/// Language controllability. `None` means controllable; otherwise the first
/// violating word and event in lexicographic order.
///
/// `max_len` must exceed the depth of `K` so that every one-step extension of
/// the support is examined.
pub fn language_controllable<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
    max_len: usize,
) -> Result<Option<Violation<G>>> {
    if k.is_empty() {
        return Ok(None);
    }
    if max_len < k.depth() + 1 {
        return Err(Error::Precondition(format!(
            "max length {max_len} must be at least {} for a language of depth {}",
            k.depth() + 1,
            k.depth()
        )));
    }
    check_sublanguage(aut, k)?;
    Ok(pointwise_violation(aut, k, max_len))
}

/// The containment form `K·ℰ_uc ∩ L ⊆ K`, evaluated on the finite support
/// of `K·ℰ_uc`.
pub fn containment_controllable<G: Grade>(aut: &MaxMinAutomaton<G>, k: &FuzzyLanguage<G>) -> bool {
    concatenate(k, &uc_lifting(aut))
        .support()
        .all(|(w, d)| d.min(aut.language_degree(w)) <= k.degree(w))
}

/// An event-feedback supervisor: an enabling degree for every event after
/// every observed word.
pub trait Supervisor<G: Grade> {
    fn control(&self, word: &[EventId], event: EventId) -> G;
}

/// `S(s)(a) = K(sa) ∨ uc(a)`.
#[derive(Clone, Debug)]
pub struct LanguageSupervisor<G> {
    language: FuzzyLanguage<G>,
    uc: Vec<G>,
}

impl<G: Grade> Supervisor<G> for LanguageSupervisor<G> {
    fn control(&self, word: &[EventId], event: EventId) -> G {
        let mut next = word.to_vec();
        next.push(event);
        self.language.degree(&next).max(self.uc[event.0])
    }
}

/// A supervisor realising a controllable language.
pub fn supervisor_from_language<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
) -> Result<LanguageSupervisor<G>> {
    if let Some(v) = language_controllable(aut, k, k.depth() + 1)? {
        return Err(Error::Precondition(format!(
            "language is not controllable at word `{}` and event `{}`",
            aut.format_word(&v.word),
            aut.event(v.event).name
        )));
    }
    Ok(LanguageSupervisor {
        language: k.clone(),
        uc: aut.uc_degrees(),
    })
}

/// Follows a state feedback controller: `S(s)(a) = f(δᶠ(q₀, s))(a)` when the
/// closed-loop state is defined, else `1`.
#[derive(Clone, Copy, Debug)]
pub struct FsfcSupervisor<'a, G> {
    closed_loop: ClosedLoop<'a, G>,
}

impl<G: Grade> Supervisor<G> for FsfcSupervisor<'_, G> {
    fn control(&self, word: &[EventId], event: EventId) -> G {
        match self.closed_loop.run(word) {
            Some(q) => self.closed_loop.controller().get(&q, event),
            None => G::one(),
        }
    }
}

pub fn supervisor_from_fsfc<'a, G: Grade>(
    aut: &'a MaxMinAutomaton<G>,
    f: &'a Fsfc<G>,
) -> Result<FsfcSupervisor<'a, G>> {
    Ok(FsfcSupervisor {
        closed_loop: ClosedLoop::new(aut, f)?,
    })
}

/// `L_S(sa) = L(sa) ∧ S(s)(a) ∧ L_S(s)`, for words up to `max_len`.
pub fn closed_loop_language_of_supervisor<G: Grade, S: Supervisor<G> + ?Sized>(
    aut: &MaxMinAutomaton<G>,
    sup: &S,
    max_len: usize,
) -> FuzzyLanguage<G> {
    let mut map = BTreeMap::from([(Vec::new(), G::one())]);
    let mut stack: Vec<(Word, FuzzyState<G>, G)> =
        vec![(Vec::new(), aut.initial().clone(), G::one())];
    while let Some((word, state, degree)) = stack.pop() {
        if word.len() == max_len {
            continue;
        }
        for event in aut.event_ids() {
            let next_state = aut.step(&state, event);
            let d = next_state
                .height()
                .min(sup.control(&word, event))
                .min(degree);
            if d.is_zero() {
                continue;
            }
            let mut next = word.clone();
            next.push(event);
            map.insert(next.clone(), d);
            stack.push((next, next_state, d));
        }
    }
    FuzzyLanguage::from_map(map)
}

/// The supervisor's decisions after every word of the generated language up
/// to `max_len`, as rows of per-event degrees.
pub fn tabulate_supervisor<G: Grade, S: Supervisor<G> + ?Sized>(
    aut: &MaxMinAutomaton<G>,
    sup: &S,
    max_len: usize,
) -> Vec<(Word, Vec<G>)> {
    generated_language(aut, max_len)
        .support()
        .map(|(w, _)| {
            (
                w.clone(),
                aut.event_ids().map(|e| sup.control(w, e)).collect(),
            )
        })
        .collect()
}

/// Whether the closed-loop language of `f` is controllable, judged on words
/// up to `max_len`: extensions are examined only for words shorter than
/// `max_len`, since longer ones are cut off by the truncation.
pub fn fsfc_closed_loop_is_controllable_language<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    f: &Fsfc<G>,
    max_len: usize,
) -> Result<Option<Violation<G>>> {
    let cl = ClosedLoop::new(aut, f)?;
    let k = closed_loop_language(&cl, max_len);
    check_sublanguage(aut, &k)?;
    Ok(pointwise_violation(aut, &k, max_len))
}

/// Two supported words reaching the same scaled state whose one-event
/// extensions have different nonzero degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistency {
    pub first: Word,
    pub second: Word,
    pub event: EventId,
}

/// `K(s)·(q₀ ∘ s)`, the state a word of `K` stands for.
fn scaled_state<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
    word: &[EventId],
) -> FuzzyState<G> {
    scale_product(k.degree(word), &aut.run(word))
}

/// Supported words grouped by the state they stand for, in support order.
fn words_by_state<'k, G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &'k FuzzyLanguage<G>,
) -> Vec<(FuzzyState<G>, Vec<&'k Word>)> {
    let mut groups: Vec<(FuzzyState<G>, Vec<&Word>)> = Vec::new();
    let mut index: HashMap<FuzzyState<G>, usize> = HashMap::new();
    for (word, _) in k.support() {
        let q = scaled_state(aut, k, word);
        if q.is_zero() {
            continue;
        }
        match index.get(&q) {
            Some(&i) => groups[i].1.push(word),
            None => {
                index.insert(q.clone(), groups.len());
                groups.push((q, vec![word]));
            }
        }
    }
    groups
}

/// `None` if `K` is consistent, otherwise the first offending pair.
pub fn consistency_check<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
) -> Option<Inconsistency> {
    for (_, words) in words_by_state(aut, k) {
        for event in aut.event_ids() {
            let mut seen: Option<(&Word, G)> = None;
            for word in &words {
                let mut next = (*word).clone();
                next.push(event);
                let d = k.degree(&next);
                if d.is_zero() {
                    continue;
                }
                match seen {
                    None => seen = Some((word, d)),
                    Some((first, d0)) if d0 != d => {
                        return Some(Inconsistency {
                            first: first.clone(),
                            second: (*word).clone(),
                            event,
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    None
}

/// `R(K)`: the nonzero states `K(s)·(q₀ ∘ s)` over the support, in order of
/// first appearance.
pub fn reach_of_language<G: Grade>(aut: &MaxMinAutomaton<G>, k: &FuzzyLanguage<G>) -> StateSet<G> {
    let states = words_by_state(aut, k).into_iter().map(|(q, _)| q).collect();
    StateSet::new(states).expect("grouping removes duplicates and zeros")
}

/// `f(q)(a) = (max over s with K(s)·(q₀∘s) = q of K(sa)) ∨ uc(a)` on `R(K)`,
/// and `1` elsewhere. Requires `K` controllable and consistent.
pub fn fsfc_from_language<G: Grade>(
    aut: &MaxMinAutomaton<G>,
    k: &FuzzyLanguage<G>,
) -> Result<Fsfc<G>> {
    if let Some(v) = language_controllable(aut, k, k.depth() + 1)? {
        return Err(Error::Precondition(format!(
            "language is not controllable at word `{}` and event `{}`",
            aut.format_word(&v.word),
            aut.event(v.event).name
        )));
    }
    if let Some(c) = consistency_check(aut, k) {
        return Err(Error::Precondition(format!(
            "language is not consistent: `{}` and `{}` disagree on `{}`",
            aut.format_word(&c.first),
            aut.format_word(&c.second),
            aut.event(c.event).name
        )));
    }
    let mut f = Fsfc::permissive();
    for (q, words) in words_by_state(aut, k) {
        for event in aut.event_ids() {
            let best = words
                .iter()
                .map(|w| {
                    let mut next = (*w).clone();
                    next.push(event);
                    k.degree(&next)
                })
                .max()
                .unwrap_or_else(G::zero);
            f.set(q.clone(), event, best.max(aut.uc_degree(event)));
        }
    }
    Ok(f)
}
