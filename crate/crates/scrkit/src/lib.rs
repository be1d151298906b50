//! scrkit analyzes SCR-style tabular requirements specifications.
//!
//! A specification (`.scr`) declares typed monitored, term and controlled
//! variables, mode classes and the tables that drive them. A scenario
//! (`.scn`) is a small program over the specification's transitions — tests,
//! arbitrary changes, guarded changes, sequencing and iteration — plus a
//! state formula checked when the program completes. The engine explores the
//! product of the table semantics and the scenario by bounded breadth-first
//! search and reports either a shortest counterexample trace or the absence
//! of violations within the bound. A backend emits the same model as a
//! self-contained Promela file for cross-checking with Spin.

pub mod corpus;
pub mod diag;
pub mod engine;
pub mod model;
pub mod output;
pub mod parse;
pub mod promela;
pub mod scenario;

pub use diag::{DiagCode, Diagnostic, Severity, SourceSpan};
pub use engine::{analyze, simulate, AnalyzeOptions, StepKind, Trace, TraceStep, Verdict};
pub use model::{
    check_consistency, eval_cond, eval_event, fire_mode_table, step, successors, CondExpr,
    EventExpr, InputEvent, SpecModel, SystemState, TypeDef, TypeKind, Value, VarId, VarRole,
};
pub use parse::{parse_spec, render_spec};
pub use promela::{emit_promela, EmitOptions, EmittedModel};
pub use scenario::{compile_to_automaton, parse_scenario, PcAutomaton, Program, Scenario, Sentence};
