//! Independent reference semantics used to cross-check the engine.
//!
//! `oracle_violates` enumerates the final states of every complete run of a
//! program by structural recursion over the AST (sets of states, a fixpoint
//! for iteration) — no program counters, no automaton, no search queue. The
//! scenario-language tests use `denote`, the analogous recursion yielding
//! sentence sequences instead of states.

use scrkit::model::{eval_cond, eval_event, successors, SpecModel, SystemState};
use scrkit::scenario::{Guard, Program, Scenario, Sentence};
use std::collections::{BTreeSet, HashSet};

/// True when some complete run of the scenario ends in a state falsifying
/// the check. Panics on consistency errors: callers generate clean specs.
pub fn oracle_violates(spec: &SpecModel, scenario: &Scenario) -> bool {
    let mut starts = HashSet::new();
    starts.insert(spec.initial_state());
    let finals = run_program(spec, scenario, &scenario.program, &starts);
    finals.iter().any(|s| !eval_cond(&scenario.check, s))
}

fn run_program(
    spec: &SpecModel,
    scenario: &Scenario,
    program: &Program,
    starts: &HashSet<SystemState>,
) -> HashSet<SystemState> {
    match program {
        Program::Sentence(i) => starts
            .iter()
            .flat_map(|s| run_sentence(spec, &scenario.sentences[*i], s))
            .collect(),
        Program::Seq(a, b) => {
            let mid = run_program(spec, scenario, a, starts);
            run_program(spec, scenario, b, &mid)
        }
        Program::Star(body) => {
            // Least fixpoint: states reachable by zero or more body runs.
            let mut acc = starts.clone();
            let mut frontier = starts.clone();
            while !frontier.is_empty() {
                let next: HashSet<SystemState> = run_program(spec, scenario, body, &frontier)
                    .into_iter()
                    .filter(|s| !acc.contains(s))
                    .collect();
                acc.extend(next.iter().cloned());
                frontier = next;
            }
            acc
        }
    }
}

fn run_sentence(spec: &SpecModel, sentence: &Sentence, state: &SystemState) -> Vec<SystemState> {
    match sentence {
        Sentence::Test(f) => {
            if eval_cond(f, state) {
                vec![state.clone()]
            } else {
                Vec::new()
            }
        }
        Sentence::StateChange => successors(spec, state)
            .into_iter()
            .map(|(_, r)| r.expect("consistency-clean specification"))
            .collect(),
        Sentence::GuardedChange(guard) => successors(spec, state)
            .into_iter()
            .map(|(_, r)| r.expect("consistency-clean specification"))
            .filter(|next| match guard {
                Guard::Event(ev) => eval_event(ev, state, next),
                Guard::Cond(c) => eval_cond(c, next),
            })
            .collect(),
    }
}

/// All sentence sequences of length at most `max_len` denoted by a program:
/// a sentence denotes itself, sequencing concatenates, iteration closes
/// under repetition.
pub fn denote(program: &Program, max_len: usize) -> BTreeSet<Vec<usize>> {
    match program {
        Program::Sentence(i) => {
            let mut set = BTreeSet::new();
            if max_len >= 1 {
                set.insert(vec![*i]);
            }
            set
        }
        Program::Seq(a, b) => {
            let left = denote(a, max_len);
            let right = denote(b, max_len);
            let mut set = BTreeSet::new();
            for x in &left {
                for y in &right {
                    if x.len() + y.len() <= max_len {
                        let mut xy = x.clone();
                        xy.extend_from_slice(y);
                        set.insert(xy);
                    }
                }
            }
            set
        }
        Program::Star(body) => {
            let unit = denote(body, max_len);
            let mut acc: BTreeSet<Vec<usize>> = BTreeSet::new();
            acc.insert(Vec::new());
            let mut frontier = acc.clone();
            while !frontier.is_empty() {
                let mut next = BTreeSet::new();
                for x in &frontier {
                    for y in &unit {
                        if x.len() + y.len() <= max_len {
                            let mut xy = x.clone();
                            xy.extend_from_slice(y);
                            if !acc.contains(&xy) {
                                next.insert(xy);
                            }
                        }
                    }
                }
                acc.extend(next.iter().cloned());
                frontier = next;
            }
            acc
        }
    }
}

/// Enumerates every sequence over `alphabet_size` symbols up to `max_len`.
pub fn all_sequences(alphabet_size: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &level {
            for symbol in 0..alphabet_size {
                let mut s = seq.clone();
                s.push(symbol);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}
