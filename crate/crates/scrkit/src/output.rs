//! Trace and verdict serialization.
//!
//! Two formats: a line-oriented text form, one step per line
//! (`#k  <input or step kind>  =>  var=val changes…  [pc=j]`), and a
//! structured JSON document whose schema lives in `docs/formats.md`. The
//! JSON types double as the schema validator: tests deserialize tool output
//! back into them.

use crate::diag::Diagnostic;
use crate::engine::{StepKind, Trace, Verdict};
use crate::model::{SpecModel, SystemState, VarId};
use crate::scenario::{render_sentence, Scenario};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Renders a trace in the line-oriented text format. Step 0 lists the whole
/// initial state; later steps list only the variables that changed.
pub fn render_trace_text(spec: &SpecModel, scenario: Option<&Scenario>, trace: &Trace) -> String {
    let mut out = String::new();
    let mut previous: Option<&SystemState> = None;
    for (k, step) in trace.steps.iter().enumerate() {
        let kind = match &step.kind {
            StepKind::Initial => "initial".to_string(),
            StepKind::Test { sentence } => match scenario {
                Some(s) => format!("test {}", render_sentence(spec, &s.sentences[*sentence])),
                None => "test".to_string(),
            },
            StepKind::Change { input, .. } => format!(
                "{} := {}",
                spec.var(input.var).name,
                spec.display_value(input.var, input.new_value)
            ),
        };
        let changes = match previous {
            None => render_assignments(spec, &step.state, None),
            Some(prev) => {
                let diff = prev.diff(&step.state);
                if diff.is_empty() {
                    "(no change)".to_string()
                } else {
                    render_assignments(spec, &step.state, Some(&diff))
                }
            }
        };
        let _ = write!(out, "#{k}  {kind}  =>  {changes}");
        if let Some(pc) = step.pc {
            let _ = write!(out, "  [pc={pc}]");
        }
        out.push('\n');
        previous = Some(&step.state);
    }
    out
}

fn render_assignments(spec: &SpecModel, state: &SystemState, only: Option<&[VarId]>) -> String {
    spec.vars
        .iter()
        .enumerate()
        .map(|(i, _)| VarId(i))
        .filter(|v| only.is_none_or(|d| d.contains(v)))
        .map(|v| {
            format!(
                "{}={}",
                spec.var(v).name,
                spec.display_value(v, state.get(v))
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Structured output
// ---------------------------------------------------------------------------

/// Top-level document emitted once per run with `--output structured`.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub command: String,
    pub spec: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// `violation`, `no-violation-within-bound`, `consistency-error` or
    /// `clean` for commands without a verdict.
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_reached: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states_explored: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStepReport>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<DiagnosticReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TraceStepReport {
    pub step: usize,
    /// `initial`, `test` or `change`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputReport>,
    /// Index of the scenario sentence that fired, when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence: Option<usize>,
    /// Variables that changed in this step, with their new values.
    pub changes: BTreeMap<String, String>,
    /// The complete state after the step.
    pub state: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InputReport {
    pub var: String,
    pub value: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub severity: String,
    pub code: String,
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl DiagnosticReport {
    pub fn from_diagnostic(d: &Diagnostic) -> Self {
        Self {
            severity: d.severity.to_string(),
            code: d.code.as_str().to_string(),
            message: d.message.clone(),
            line: d.span.start_line,
            col: d.span.start_col,
        }
    }
}

pub fn verdict_label(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::Violation(_) => "violation",
        Verdict::NoViolationWithinBound { .. } => "no-violation-within-bound",
        Verdict::ConsistencyError(_) => "consistency-error",
    }
}

pub fn trace_report(spec: &SpecModel, trace: &Trace) -> Vec<TraceStepReport> {
    let mut previous: Option<SystemState> = None;
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            let full: BTreeMap<String, String> = spec
                .vars
                .iter()
                .enumerate()
                .map(|(i, decl)| {
                    (
                        decl.name.clone(),
                        spec.display_value(VarId(i), step.state.get(VarId(i))),
                    )
                })
                .collect();
            let changes: BTreeMap<String, String> = match &previous {
                None => full.clone(),
                Some(prev) => prev
                    .diff(&step.state)
                    .into_iter()
                    .map(|v| {
                        (
                            spec.var(v).name.clone(),
                            spec.display_value(v, step.state.get(v)),
                        )
                    })
                    .collect(),
            };
            previous = Some(step.state.clone());
            let (kind, input, sentence) = match &step.kind {
                StepKind::Initial => ("initial", None, None),
                StepKind::Test { sentence } => ("test", None, Some(*sentence)),
                StepKind::Change { input, sentence } => (
                    "change",
                    Some(InputReport {
                        var: spec.var(input.var).name.clone(),
                        value: spec.display_value(input.var, input.new_value),
                    }),
                    *sentence,
                ),
            };
            TraceStepReport {
                step: k,
                kind: kind.to_string(),
                input,
                sentence,
                changes,
                state: full,
                pc: step.pc,
            }
        })
        .collect()
}
