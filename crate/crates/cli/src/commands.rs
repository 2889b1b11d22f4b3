use std::fmt::Write as _;

use fuzzy_des::controllability::{
    build_successor_graph, check_controllable as check, synthesize_fsfc, Obstruction,
};
use fuzzy_des::io::{
    export_dot_graph, export_dot_subgraph, export_dot_successors, Spec, SpecDocument,
};
use fuzzy_des::language::{
    closed_loop_language, closed_loop_language_of_supervisor, consistency_check,
    fsfc_closed_loop_is_controllable_language, fsfc_from_language, language_controllable,
    reach_of_language, supervisor_from_fsfc, supervisor_from_language, tabulate_supervisor,
    Supervisor,
};
use fuzzy_des::reachability::reach_family;
use fuzzy_des::stability::{
    find_cycles, infimal_attractor, is_stable, search_stabilizing_witness,
    synthesize_stabilizing_controller, verify_stabilizability_witness,
};
use fuzzy_des::{
    ClosedLoop, EventId, Fsfc, FuzzyLanguage, MaxMinAutomaton, Possibility, StateSet,
    TransitionGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{load_spec, state_json, usage, CmdResult, Context, GraphKind, Report, UsageError};

fn expect_state_set(ctx: &Context) -> Result<StateSet, UsageError> {
    match ctx.spec()? {
        Spec::StateSet(s) => Ok(s),
        other => Err(usage(format!(
            "expected a state_set spec, found {}",
            other.kind()
        ))),
    }
}

fn fsfc_json(aut: &MaxMinAutomaton, f: &Fsfc) -> Value {
    serde_json::to_value(SpecDocument::from_spec(aut, &Spec::Fsfc(f.clone())))
        .expect("documents serialize")
}

fn fsfc_text(aut: &MaxMinAutomaton, f: &Fsfc) -> String {
    let mut out = format!("default {}\n", f.default_value());
    for (q, e, v) in f.entries() {
        let _ = writeln!(out, "f({q})({}) = {v}", aut.event(e).name);
    }
    out
}

fn set_json(set: &StateSet) -> Value {
    set.iter().map(state_json).collect()
}

fn set_text(set: &StateSet) -> String {
    set.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn language_json(aut: &MaxMinAutomaton, k: &FuzzyLanguage) -> Value {
    k.support()
        .map(|(w, d)| json!({ "word": aut.format_word(w), "degree": d.to_string() }))
        .collect()
}

fn language_text(aut: &MaxMinAutomaton, k: &FuzzyLanguage) -> String {
    let mut out = String::new();
    for (w, d) in k.support() {
        let _ = writeln!(out, "  {} {d}", aut.format_word(w));
    }
    out
}

fn graph_json(g: &TransitionGraph) -> Value {
    json!({
        "vertices": g.vertices().iter().map(state_json).collect::<Vec<_>>(),
        "edges": g.edges().map(|(u, e, v)| json!([u, g.event_names()[e.0], v])).collect::<Vec<_>>(),
    })
}

fn mask_states(g: &TransitionGraph, mask: &[bool]) -> Vec<Value> {
    (0..g.len())
        .filter(|&v| mask[v])
        .map(|v| state_json(g.vertex(v)))
        .collect()
}

pub(crate) fn reach(ctx: &Context) -> CmdResult {
    let fam = reach_family(&ctx.aut);
    let mut text = format!("{} accessible states\n", fam.len());
    let mut bases = Vec::new();
    for (q, chi) in fam.entries() {
        let _ = writeln!(text, "{q} chi={chi}");
        bases.push(json!({ "state": state_json(q), "chi": chi.to_string() }));
    }
    Ok(Report::new(true, text, json!({ "bases": bases })).with_dot(export_dot_graph(fam.graph())))
}

pub(crate) fn member(ctx: &Context) -> CmdResult {
    let q = match ctx.spec()? {
        Spec::State(q) => q,
        other => {
            return Err(usage(format!(
                "expected a state spec, found {}",
                other.kind()
            )))
        }
    };
    let fam = reach_family(&ctx.aut);
    Ok(match fam.contains(&q)? {
        Some(w) => {
            let text = format!(
                "{q} is controllably reachable\nbase {} scaled by {} along {}\n{}",
                w.base,
                w.alpha,
                ctx.aut.format_word(&w.path),
                fsfc_text(&ctx.aut, &w.controller)
            );
            let json = json!({
                "member": true,
                "state": state_json(&q),
                "base": state_json(&w.base),
                "alpha": w.alpha.to_string(),
                "path": ctx.aut.format_word(&w.path),
                "controller": fsfc_json(&ctx.aut, &w.controller),
            });
            Report::new(true, text, json)
        }
        None => Report::new(
            false,
            format!("{q} is not controllably reachable\n"),
            json!({ "member": false, "state": state_json(&q) }),
        ),
    })
}

pub(crate) fn succ(ctx: &Context) -> CmdResult {
    let set = expect_state_set(ctx)?;
    let graph = build_successor_graph(&ctx.aut, &set)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for (v, q) in set.iter().enumerate() {
        let _ = writeln!(text, "Succ({q})");
        let mut edges = Vec::new();
        for e in graph.succ(v) {
            let name = &ctx.aut.event(e.event).name;
            let _ = writeln!(text, "  {name} -> {} alpha {}", set.get(e.target), e.range);
            edges.push(json!({ "event": name, "target": state_json(set.get(e.target)), "alpha": e.range.to_string() }));
        }
        rows.push(json!({ "state": state_json(q), "successors": edges }));
    }
    Ok(Report::new(true, text, json!(rows)).with_dot(export_dot_successors(&graph)))
}

fn obstruction_text(aut: &MaxMinAutomaton, o: &Obstruction<Possibility>) -> String {
    match o {
        Obstruction::InitialStateMissing => "the initial state is not in the set".to_string(),
        Obstruction::NoCompatibleSubset { state, event } => {
            format!(
                "event {} at {state} can only leave the set",
                aut.event(*event).name
            )
        }
        Obstruction::Unreachable { reached } => format!(
            "no selection reaches every state; at best {}",
            reached
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ),
        Obstruction::NotShaped => "no selection meets the connectivity demands".to_string(),
    }
}

pub(crate) fn check_controllable(ctx: &Context) -> CmdResult {
    let set = expect_state_set(ctx)?;
    let verdict = check(&ctx.aut, &set)?;
    Ok(match (&verdict.subgraph, &verdict.obstruction) {
        (Some(sub), _) => {
            let mut text = String::from("controllable\n");
            let mut edges = Vec::new();
            for (u, e, v) in sub.edges() {
                let name = &ctx.aut.event(e).name;
                let _ = writeln!(text, "  {} -{name}-> {}", set.get(u), set.get(v));
                edges.push(json!([
                    state_json(set.get(u)),
                    name,
                    state_json(set.get(v))
                ]));
            }
            Report::new(
                true,
                text,
                json!({ "controllable": true, "subgraph": edges }),
            )
            .with_dot(export_dot_subgraph(&verdict.graph, sub))
        }
        (None, o) => {
            let reason = o
                .as_ref()
                .map_or_else(String::new, |o| obstruction_text(&ctx.aut, o));
            Report::new(
                false,
                format!("not controllable: {reason}\n"),
                json!({ "controllable": false, "reason": reason }),
            )
            .with_dot(export_dot_successors(&verdict.graph))
        }
    })
}

pub(crate) fn synthesize(ctx: &Context) -> CmdResult {
    let set = expect_state_set(ctx)?;
    let verdict = check(&ctx.aut, &set)?;
    let Some(sub) = &verdict.subgraph else {
        let reason = verdict
            .obstruction
            .as_ref()
            .map_or_else(String::new, |o| obstruction_text(&ctx.aut, o));
        return Ok(Report::new(
            false,
            format!("not controllable: {reason}\n"),
            json!({ "controllable": false, "reason": reason }),
        ));
    };
    let f = synthesize_fsfc(&ctx.aut, &verdict.graph, sub)?;
    let graph = ClosedLoop::new(&ctx.aut, &f)?.graph();
    Ok(
        Report::new(true, fsfc_text(&ctx.aut, &f), fsfc_json(&ctx.aut, &f))
            .with_dot(export_dot_graph(&graph)),
    )
}

fn expect_language(ctx: &Context) -> Result<FuzzyLanguage, UsageError> {
    match ctx.spec()? {
        Spec::Language(k) => Ok(k),
        other => Err(usage(format!(
            "expected a language spec, found {}",
            other.kind()
        ))),
    }
}

pub(crate) fn check_language(ctx: &Context) -> CmdResult {
    let k = expect_language(ctx)?;
    let horizon = ctx.max_len.max(k.depth() + 1);
    let violation = language_controllable(&ctx.aut, &k, horizon)?;
    let inconsistency = consistency_check(&ctx.aut, &k);
    let reach = reach_of_language(&ctx.aut, &k);
    let reach_controllable = check(&ctx.aut, &reach)?.is_controllable();
    let mut text = String::new();
    match &violation {
        None => text.push_str("controllable\n"),
        Some(v) => {
            let _ = writeln!(
                text,
                "not controllable: after {} event {} is forced to {} but has degree {}",
                ctx.aut.format_word(&v.word),
                ctx.aut.event(v.event).name,
                v.forced,
                v.degree
            );
        }
    }
    match &inconsistency {
        None => text.push_str("consistent\n"),
        Some(c) => {
            let _ = writeln!(
                text,
                "not consistent: {} and {} reach the same state but disagree on {}",
                ctx.aut.format_word(&c.first),
                ctx.aut.format_word(&c.second),
                ctx.aut.event(c.event).name
            );
        }
    }
    let _ = writeln!(text, "reached states {}", set_text(&reach));
    let _ = writeln!(text, "reached states controllable: {reach_controllable}");
    let json = json!({
        "controllable": violation.is_none(),
        "violation": violation.as_ref().map(|v| json!({
            "word": ctx.aut.format_word(&v.word),
            "event": ctx.aut.event(v.event).name,
            "forced": v.forced.to_string(),
            "degree": v.degree.to_string(),
        })),
        "consistent": inconsistency.is_none(),
        "inconsistency": inconsistency.as_ref().map(|c| json!({
            "first": ctx.aut.format_word(&c.first),
            "second": ctx.aut.format_word(&c.second),
            "event": ctx.aut.event(c.event).name,
        })),
        "reached": set_json(&reach),
        "reached_controllable": reach_controllable,
    });
    Ok(Report::new(violation.is_none(), text, json))
}

fn supervisor_table<S: Supervisor<Possibility>>(ctx: &Context, sup: &S) -> (String, Value) {
    let names = ctx.aut.event_names();
    let rows = tabulate_supervisor(&ctx.aut, sup, ctx.max_len.saturating_sub(1));
    let mut text = format!("word {}\n", names.join(" "));
    let mut json_rows = Vec::new();
    for (w, controls) in &rows {
        let values: Vec<String> = controls.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(text, "{} {}", ctx.aut.format_word(w), values.join(" "));
        json_rows.push(json!({ "word": ctx.aut.format_word(w), "controls": values }));
    }
    let lang = closed_loop_language_of_supervisor(&ctx.aut, sup, ctx.max_len);
    text.push_str("closed-loop language\n");
    text.push_str(&language_text(&ctx.aut, &lang));
    (
        text,
        json!({ "events": names, "table": json_rows, "language": language_json(&ctx.aut, &lang) }),
    )
}

pub(crate) fn derive_supervisor(ctx: &Context) -> CmdResult {
    match ctx.spec()? {
        Spec::Language(k) => match supervisor_from_language(&ctx.aut, &k) {
            Ok(sup) => {
                let (text, json) = supervisor_table(ctx, &sup);
                Ok(Report::new(true, text, json))
            }
            Err(fuzzy_des::Error::Precondition(m)) => {
                Ok(Report::new(false, format!("{m}\n"), json!({ "error": m })))
            }
            Err(e) => Err(e.into()),
        },
        Spec::Fsfc(f) => {
            let sup = supervisor_from_fsfc(&ctx.aut, &f)?;
            let (text, json) = supervisor_table(ctx, &sup);
            Ok(Report::new(true, text, json))
        }
        other => Err(usage(format!(
            "expected a language or fsfc spec, found {}",
            other.kind()
        ))),
    }
}

pub(crate) fn bridge(ctx: &Context) -> CmdResult {
    match ctx.spec()? {
        Spec::Fsfc(f) => {
            let cl = ClosedLoop::new(&ctx.aut, &f)?;
            let lang = closed_loop_language(&cl, ctx.max_len);
            let sup = supervisor_from_fsfc(&ctx.aut, &f)?;
            let same = closed_loop_language_of_supervisor(&ctx.aut, &sup, ctx.max_len) == lang;
            let violation = fsfc_closed_loop_is_controllable_language(&ctx.aut, &f, ctx.max_len)?;
            let ok = same && violation.is_none();
            let text = format!(
                "closed-loop language up to length {}: {} words\nsupervisor generates the same language: {same}\nlanguage controllable: {}\n{}",
                ctx.max_len,
                lang.len(),
                violation.is_none(),
                language_text(&ctx.aut, &lang)
            );
            let json = json!({
                "language": language_json(&ctx.aut, &lang),
                "supervisor_agrees": same,
                "controllable": violation.is_none(),
            });
            Ok(Report::new(ok, text, json))
        }
        Spec::Language(k) => {
            let f = match fsfc_from_language(&ctx.aut, &k) {
                Ok(f) => f,
                Err(fuzzy_des::Error::Precondition(m)) => {
                    return Ok(Report::new(false, format!("{m}\n"), json!({ "error": m })));
                }
                Err(e) => return Err(e.into()),
            };
            let reach = reach_of_language(&ctx.aut, &k);
            let reached = ClosedLoop::new(&ctx.aut, &f)?.reachable();
            let same = reached == reach.members();
            let text = format!(
                "{}reached states {}\ncontroller reaches exactly these: {same}\n",
                fsfc_text(&ctx.aut, &f),
                set_text(&reach)
            );
            let json = json!({ "controller": fsfc_json(&ctx.aut, &f), "reached": set_json(&reach), "matches": same });
            Ok(Report::new(same, text, json))
        }
        other => Err(usage(format!(
            "expected a language or fsfc spec, found {}",
            other.kind()
        ))),
    }
}

pub(crate) fn stability(ctx: &Context, controller: Option<&str>) -> CmdResult {
    let graph = match controller {
        Some(text) => match load_spec(&ctx.aut, text)? {
            Spec::Fsfc(f) => ClosedLoop::new(&ctx.aut, &f)?.graph(),
            other => {
                return Err(usage(format!(
                    "--controller expects an fsfc spec, found {}",
                    other.kind()
                )))
            }
        },
        None => ctx.aut.accessible_part(),
    };
    let legal = match &ctx.spec {
        Some(_) => Some(expect_state_set(ctx)?),
        None => None,
    };
    let cycles = find_cycles(&graph);
    let inf = infimal_attractor(&graph);
    let mut text = format!("{} states\n", graph.len());
    let on_cycles: Vec<String> = (0..graph.len())
        .filter(|&v| cycles[v])
        .map(|v| graph.vertex(v).to_string())
        .collect();
    let least: Vec<String> = (0..graph.len())
        .filter(|&v| inf[v])
        .map(|v| graph.vertex(v).to_string())
        .collect();
    let _ = writeln!(text, "on cycles: {}", on_cycles.join(" "));
    let _ = writeln!(text, "least attractor: {}", least.join(" "));
    let stable = legal.as_ref().map(|n| is_stable(&graph, n.states()));
    if let Some(s) = stable {
        let _ = writeln!(text, "{}", if s { "stable" } else { "not stable" });
    }
    let json = json!({
        "graph": graph_json(&graph),
        "cycles": mask_states(&graph, &cycles),
        "least_attractor": mask_states(&graph, &inf),
        "stable": stable,
    });
    Ok(Report::new(stable.unwrap_or(true), text, json).with_dot(export_dot_graph(&graph)))
}

pub(crate) fn stabilize(ctx: &Context, budget: usize) -> CmdResult {
    match ctx.spec()? {
        Spec::Witness { legal, candidate } => {
            let report = verify_stabilizability_witness(&ctx.aut, &legal, &candidate)?;
            if !report.verdict() {
                let text = format!(
                    "witness rejected\ninvariant: {}\nreachable set controllable: {}\nreaches the invariant set without cycles: {}\n",
                    report.invariant, report.p_controllable, report.connected_acyclic
                );
                let json = json!({
                    "accepted": false,
                    "invariant": report.invariant,
                    "p_controllable": report.p_controllable,
                    "connected_acyclic": report.connected_acyclic,
                });
                return Ok(Report::new(false, text, json));
            }
            let out = synthesize_stabilizing_controller(&ctx.aut, &legal, &candidate)?;
            let graph = ClosedLoop::new(&ctx.aut, &out.controller)?.graph();
            let text = format!("witness accepted\n{}", fsfc_text(&ctx.aut, &out.controller));
            let json = json!({ "accepted": true, "controller": fsfc_json(&ctx.aut, &out.controller) });
            Ok(Report::new(out.report.verdict(), text, json).with_dot(export_dot_graph(&graph)))
        }
        Spec::StateSet(legal) => match search_stabilizing_witness(&ctx.aut, &legal, budget)? {
            Some(w) => {
                let graph = ClosedLoop::new(&ctx.aut, &w.controller)?.graph();
                let text = format!(
                    "stabilizable\ninvariant set {}\nreached set {}\n{}",
                    set_text(&w.candidate.n_prime),
                    set_text(&w.candidate.p_set),
                    fsfc_text(&ctx.aut, &w.controller)
                );
                let json = json!({
                    "found": true,
                    "n_prime": set_json(&w.candidate.n_prime),
                    "p": set_json(&w.candidate.p_set),
                    "controller": fsfc_json(&ctx.aut, &w.controller),
                });
                Ok(Report::new(true, text, json).with_dot(export_dot_graph(&graph)))
            }
            None => Ok(Report::new(
                false,
                "no witness found within the search limits (this does not prove the system unstabilizable)\n".to_string(),
                json!({ "found": false }),
            )),
        },
        other => Err(usage(format!("expected a witness or state_set spec, found {}", other.kind()))),
    }
}

pub(crate) fn simulate(
    ctx: &Context,
    events: Option<&str>,
    seed: Option<u64>,
    steps: usize,
) -> CmdResult {
    let word: Vec<EventId> = match events {
        Some(text) => {
            let names: Vec<&str> = text.split_whitespace().collect();
            ctx.aut.word(&names)?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let m = ctx.aut.events().len();
            (0..steps).map(|_| EventId(rng.gen_range(0..m))).collect()
        }
    };
    let controller = match &ctx.spec {
        Some(_) => match ctx.spec()? {
            Spec::Fsfc(f) => Some(f),
            other => {
                return Err(usage(format!(
                    "expected an fsfc spec, found {}",
                    other.kind()
                )))
            }
        },
        None => None,
    };
    let (traj, degrees): (_, Vec<Possibility>) = match &controller {
        Some(f) => {
            let cl = ClosedLoop::new(&ctx.aut, f)?;
            let traj = cl.trajectory(&word);
            let degrees = (1..=traj.len())
                .map(|k| cl.language_degree(&traj.events[..k]))
                .collect();
            (traj, degrees)
        }
        None => {
            let traj = ctx.aut.trajectory(&word);
            let degrees = (1..=traj.len())
                .map(|k| ctx.aut.language_degree(&traj.events[..k]))
                .collect();
            (traj, degrees)
        }
    };
    let mut text = format!("start {}\n", traj.states[0]);
    let mut steps_json = Vec::new();
    for (k, d) in degrees.iter().enumerate() {
        let name = &ctx.aut.event(traj.events[k]).name;
        let control = traj.controls[k].map_or_else(|| "-".to_string(), |c| c.to_string());
        let _ = writeln!(
            text,
            "{name} control {control} -> {} degree {d}",
            traj.states[k + 1]
        );
        steps_json.push(json!({
            "event": name,
            "control": traj.controls[k].map(|c| c.to_string()),
            "state": state_json(&traj.states[k + 1]),
            "degree": d.to_string(),
        }));
    }
    if traj.len() < word.len() {
        let _ = writeln!(
            text,
            "stopped: {} has no transition",
            ctx.aut.event(word[traj.len()]).name
        );
    }
    let json = json!({
        "start": state_json(&traj.states[0]),
        "steps": steps_json,
        "completed": traj.len() == word.len(),
    });
    Ok(Report::new(true, text, json))
}

pub(crate) fn export_dot(ctx: &Context, kind: GraphKind) -> CmdResult {
    let dot = match kind {
        GraphKind::Accessible => export_dot_graph(&ctx.aut.accessible_part()),
        GraphKind::Successors => {
            export_dot_successors(&build_successor_graph(&ctx.aut, &expect_state_set(ctx)?)?)
        }
        GraphKind::Subgraph => {
            let verdict = check(&ctx.aut, &expect_state_set(ctx)?)?;
            match &verdict.subgraph {
                Some(sub) => export_dot_subgraph(&verdict.graph, sub),
                None => {
                    return Ok(Report::new(
                        false,
                        "not controllable\n".to_string(),
                        json!({ "controllable": false }),
                    ))
                }
            }
        }
        GraphKind::ClosedLoop => match ctx.spec()? {
            Spec::Fsfc(f) => export_dot_graph(&ClosedLoop::new(&ctx.aut, &f)?.graph()),
            other => {
                return Err(usage(format!(
                    "expected an fsfc spec, found {}",
                    other.kind()
                )))
            }
        },
    };
    Ok(Report::new(true, dot.clone(), json!({ "dot": dot })).with_dot(dot))
}
