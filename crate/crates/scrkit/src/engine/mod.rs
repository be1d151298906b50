//! Bounded explicit-state exploration of the product of a specification's
//! transition system and a scenario's pc automaton.
//!
//! The search is breadth-first with deduplication on (system state, pc), so
//! a reported counterexample is of minimal length; ties are broken by
//! exploring inputs in (variable declaration, value) order, making traces
//! reproducible. The check formula is evaluated at every visit of an
//! accepting pc. With `workers > 1` the frontier is expanded in parallel,
//! level by level, with results merged in frontier order — verdict and trace
//! are identical to the sequential search.

use crate::diag::{DiagCode, Diagnostic, SourceSpan};
use crate::model::{
    eval_cond, eval_event, step, successors, CondExpr, InputEvent, SpecModel, StepError,
    SystemState, TableRef,
};
use crate::scenario::{Guard, Pc, PcAutomaton, Scenario, Sentence};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub sys: SystemState,
    pub pc: Pc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    Initial,
    /// A test sentence fired: the state repeats, the pc advances.
    Test { sentence: usize },
    /// A one-input transition, under a change sentence when driven by a
    /// scenario (plain simulation has no sentence).
    Change {
        input: InputEvent,
        sentence: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub kind: StepKind,
    pub state: SystemState,
    /// Present for scenario analyses, absent for plain simulation.
    pub pc: Option<Pc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// The check formula the final state falsifies, when the trace is a
    /// counterexample.
    pub violated: Option<CondExpr>,
}

impl Trace {
    pub fn final_state(&self) -> &SystemState {
        &self.steps.last().expect("traces are never empty").state
    }

    /// Inputs of the change steps, in order.
    pub fn inputs(&self) -> Vec<InputEvent> {
        self.steps
            .iter()
            .filter_map(|s| match &s.kind {
                StepKind::Change { input, .. } => Some(*input),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// A complete run of the program reaches a state falsifying the check.
    Violation(Trace),
    NoViolationWithinBound {
        /// Deepest level reached (transitions from the initial state).
        depth: usize,
        states_explored: usize,
        /// The frontier emptied before the bound: the verdict covers the
        /// whole reachable product space, not just a bounded prefix.
        exhausted: bool,
    },
    /// The specification itself is defective (nondeterministic tables).
    ConsistencyError(Vec<Diagnostic>),
}

impl Verdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::Violation(_))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("depth bound must be at least 1")]
    InvalidBound,
    #[error("input {position} is illegal: {source}")]
    IllegalInput { position: usize, source: StepError },
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Maximum number of transitions from the initial state.
    pub bound: usize,
    /// Worker threads for frontier expansion; 1 means sequential.
    pub workers: usize,
    /// When set, successor lists are deterministically shuffled before
    /// insertion. Verdict and minimal counterexample length are unaffected;
    /// used to exercise order independence.
    pub shuffle_seed: Option<u64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            bound: 10_000,
            workers: 1,
            shuffle_seed: None,
        }
    }
}

/// A labeled product transition.
pub type ProductEdge = (StepKind, ProductState);

/// A step error together with the input that produced it.
pub type FailedInput = (Option<InputEvent>, StepError);

/// Successors of a product state, in deterministic order: automaton edges
/// sorted by sentence, inputs in (declaration, value) order. A step error is
/// attached to the input that produced it.
pub fn product_successors(
    spec: &SpecModel,
    scenario: &Scenario,
    aut: &PcAutomaton,
    ps: &ProductState,
) -> Result<Vec<ProductEdge>, FailedInput> {
    let edges = &aut.edges[ps.pc];
    let needs_changes = edges
        .iter()
        .any(|(s, _)| scenario.sentences[*s].changes_state());
    let all_changes = if needs_changes {
        successors(spec, &ps.sys)
    } else {
        Vec::new()
    };

    let mut out = Vec::new();
    for &(sentence_idx, target) in edges {
        match &scenario.sentences[sentence_idx] {
            Sentence::Test(f) => {
                if eval_cond(f, &ps.sys) {
                    out.push((
                        StepKind::Test {
                            sentence: sentence_idx,
                        },
                        ProductState {
                            sys: ps.sys.clone(),
                            pc: target,
                        },
                    ));
                }
            }
            sentence => {
                for (input, result) in &all_changes {
                    let next = match result {
                        Ok(next) => next,
                        Err(e) => return Err((Some(*input), e.clone())),
                    };
                    let keep = match sentence {
                        Sentence::StateChange => true,
                        Sentence::GuardedChange(Guard::Event(ev)) => {
                            eval_event(ev, &ps.sys, next)
                        }
                        Sentence::GuardedChange(Guard::Cond(c)) => eval_cond(c, next),
                        Sentence::Test(_) => unreachable!(),
                    };
                    if keep {
                        out.push((
                            StepKind::Change {
                                input: *input,
                                sentence: Some(sentence_idx),
                            },
                            ProductState {
                                sys: next.clone(),
                                pc: target,
                            },
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

struct Node {
    ps: ProductState,
    parent: usize,
    kind: StepKind,
    depth: usize,
}

/// Bounded breadth-first analysis of a scenario over a specification.
pub fn analyze(
    spec: &SpecModel,
    scenario: &Scenario,
    aut: &PcAutomaton,
    options: &AnalyzeOptions,
) -> Result<Verdict, EngineError> {
    if options.bound == 0 {
        return Err(EngineError::InvalidBound);
    }
    let pool = (options.workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .expect("thread pool construction")
    });

    let root = ProductState {
        sys: spec.initial_state(),
        pc: aut.initial,
    };
    let mut nodes = vec![Node {
        ps: root.clone(),
        parent: usize::MAX,
        kind: StepKind::Initial,
        depth: 0,
    }];
    let mut visited: HashSet<ProductState> = HashSet::new();
    visited.insert(root.clone());
    if aut.accepting[root.pc] && !eval_cond(&scenario.check, &root.sys) {
        return Ok(Verdict::Violation(build_trace(scenario, &nodes, 0)));
    }

    let mut frontier: Vec<usize> = vec![0];
    let mut depth_reached = 0;
    while !frontier.is_empty() {
        let level = nodes[frontier[0]].depth;
        if level >= options.bound {
            break;
        }
        let expand = |&i: &usize| product_successors(spec, scenario, aut, &nodes[i].ps);
        let expansions: Vec<_> = match &pool {
            Some(pool) => pool.install(|| {
                use rayon::prelude::*;
                frontier.par_iter().map(expand).collect()
            }),
            None => frontier.iter().map(expand).collect(),
        };

        let mut next_frontier = Vec::new();
        for (&parent, expansion) in frontier.iter().zip(expansions) {
            let mut succs = match expansion {
                Ok(s) => s,
                Err((input, e)) => {
                    return Ok(Verdict::ConsistencyError(vec![runtime_diag(
                        spec, input, &e,
                    )]))
                }
            };
            if let Some(seed) = options.shuffle_seed {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (parent as u64).wrapping_mul(0x9e3779b97f4a7c15));
                succs.shuffle(&mut rng);
            }
            for (kind, ps) in succs {
                if !visited.insert(ps.clone()) {
                    continue;
                }
                let depth = nodes[parent].depth + 1;
                depth_reached = depth_reached.max(depth);
                let idx = nodes.len();
                nodes.push(Node {
                    ps: ps.clone(),
                    parent,
                    kind,
                    depth,
                });
                if aut.accepting[ps.pc] && !eval_cond(&scenario.check, &ps.sys) {
                    return Ok(Verdict::Violation(build_trace(scenario, &nodes, idx)));
                }
                next_frontier.push(idx);
            }
        }
        frontier = next_frontier;
    }

    Ok(Verdict::NoViolationWithinBound {
        depth: depth_reached,
        states_explored: visited.len(),
        exhausted: frontier.is_empty(),
    })
}

fn runtime_diag(spec: &SpecModel, input: Option<InputEvent>, error: &StepError) -> Diagnostic {
    let span = match error {
        StepError::NondeterministicTransition { variable, .. } => spec
            .var_id(variable)
            .map(|id| table_span(spec, id))
            .unwrap_or_default(),
        _ => SourceSpan::default(),
    };
    let context = input
        .map(|i| {
            format!(
                " (reached by a change of {} to {})",
                spec.var(i.var).name,
                spec.display_value(i.var, i.new_value)
            )
        })
        .unwrap_or_default();
    Diagnostic::error(DiagCode::Disjointness, format!("{error}{context}"), span)
}

fn table_span(spec: &SpecModel, dependent: crate::model::VarId) -> SourceSpan {
    for (var, table) in &spec.update_order {
        if *var == dependent {
            return match table {
                TableRef::Mode(i) => spec.mode_tables[*i].span,
                TableRef::Event(i) => spec.event_tables[*i].span,
                TableRef::Cond(i) => spec.cond_tables[*i].span,
            };
        }
    }
    SourceSpan::default()
}

fn build_trace(scenario: &Scenario, nodes: &[Node], last: usize) -> Trace {
    let mut chain = Vec::new();
    let mut at = last;
    while at != usize::MAX {
        chain.push(at);
        at = nodes[at].parent;
    }
    chain.reverse();
    Trace {
        steps: chain
            .into_iter()
            .map(|i| TraceStep {
                kind: nodes[i].kind.clone(),
                state: nodes[i].ps.sys.clone(),
                pc: Some(nodes[i].ps.pc),
            })
            .collect(),
        violated: Some(scenario.check.clone()),
    }
}

/// Applies a fixed input sequence, yielding the unique deterministic trace.
pub fn simulate(spec: &SpecModel, inputs: &[InputEvent]) -> Result<Trace, EngineError> {
    let mut steps = vec![TraceStep {
        kind: StepKind::Initial,
        state: spec.initial_state(),
        pc: None,
    }];
    for (position, &input) in inputs.iter().enumerate() {
        let current = &steps.last().unwrap().state;
        let next = step(spec, current, input).map_err(|source| EngineError::IllegalInput {
            position: position + 1,
            source,
        })?;
        steps.push(TraceStep {
            kind: StepKind::Change {
                input,
                sentence: None,
            },
            state: next,
            pc: None,
        });
    }
    Ok(Trace {
        steps,
        violated: None,
    })
}

#[cfg(test)]
mod tests;
