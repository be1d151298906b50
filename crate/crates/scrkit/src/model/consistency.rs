//! Completeness and disjointness checking.
//!
//! Mode and event tables are checked semantically: the checker enumerates
//! every type-correct pre-state and every legal one-input step from it,
//! computes the table-driven successor, and reports row pairs that fire on
//! the same step. Condition tables are checked propositionally over single
//! states: rows of one mode group must not overlap and must cover every
//! valuation unless a no-change default is declared.

use super::step::{firing_mode_rows, legal_inputs};
use super::{
    eval_cond, eval_event, CondExpr, ConditionTable, EventTable, SpecModel, SystemState, TableRef,
    Value, VarId,
};
use crate::diag::{DiagCode, Diagnostic};
use std::collections::BTreeSet;

/// Runs all table checks. Diagnostics are data: an empty result means the
/// specification is consistency-clean.
pub fn check_consistency(spec: &SpecModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    transition_sweep(spec, &mut diags);
    for table in &spec.cond_tables {
        cond_table_overlap(spec, table, &mut diags);
        if !table.no_change_default {
            cond_table_completeness(spec, table, &mut diags);
        }
        cond_table_mode_coverage(spec, table, &mut diags);
    }
    diags
}

/// Exhaustive sweep over (pre-state, input) pairs. Each offending row pair
/// is reported once, with the first witness found.
fn transition_sweep(spec: &SpecModel, diags: &mut Vec<Diagnostic>) {
    let mut reported: BTreeSet<(usize, usize, usize, usize)> = BTreeSet::new();
    for state in spec.all_states() {
        for input in legal_inputs(spec, &state) {
            // Build the successor table by table, recording multi-fires and
            // continuing with the first firing row so the sweep stays total.
            let mut next = state.clone();
            next.set(input.var, input.new_value);
            for &(var, table) in &spec.update_order {
                let value = match table {
                    TableRef::Mode(i) => {
                        let t = &spec.mode_tables[i];
                        let rows = firing_mode_rows(t, &state, &next);
                        if rows.len() > 1 {
                            report_pairs(
                                spec,
                                diags,
                                &mut reported,
                                0,
                                i,
                                &rows,
                                t.mode_class,
                                &state,
                                input.var,
                            );
                        }
                        rows.first()
                            .map(|&r| t.rows[r].new_mode)
                            .unwrap_or_else(|| state.get(t.mode_class))
                    }
                    TableRef::Event(i) => {
                        let t = &spec.event_tables[i];
                        let rows = firing_event_rows(t, &state, &next);
                        let conflict = distinct_values(rows.iter().map(|&r| t.rows[r].value));
                        if conflict {
                            report_pairs(
                                spec,
                                diags,
                                &mut reported,
                                1,
                                i,
                                &rows,
                                t.dependent,
                                &state,
                                input.var,
                            );
                        }
                        rows.first()
                            .map(|&r| t.rows[r].value)
                            .unwrap_or_else(|| state.get(t.dependent))
                    }
                    TableRef::Cond(i) => {
                        // Overlaps are reported by the propositional check.
                        let t = &spec.cond_tables[i];
                        t.rows
                            .iter()
                            .find(|row| {
                                t.mode_class
                                    .is_none_or(|mc| row.modes.contains(next.get(mc)))
                                    && eval_cond(&row.cond, &next)
                            })
                            .map(|row| row.value)
                            .unwrap_or_else(|| state.get(t.dependent))
                    }
                };
                next.set(var, value);
            }
        }
    }
}

fn firing_event_rows(table: &EventTable, old: &SystemState, new: &SystemState) -> Vec<usize> {
    table
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| {
            table
                .mode_class
                .is_none_or(|mc| row.modes.contains(old.get(mc)))
                && eval_event(&row.event, old, new)
        })
        .map(|(i, _)| i)
        .collect()
}

fn distinct_values(mut values: impl Iterator<Item = Value>) -> bool {
    match values.next() {
        None => false,
        Some(first) => values.any(|v| v != first),
    }
}

#[allow(clippy::too_many_arguments)]
fn report_pairs(
    spec: &SpecModel,
    diags: &mut Vec<Diagnostic>,
    reported: &mut BTreeSet<(usize, usize, usize, usize)>,
    kind: usize,
    table_idx: usize,
    rows: &[usize],
    variable: VarId,
    state: &SystemState,
    input_var: VarId,
) {
    let (span, label) = match kind {
        0 => (spec.mode_tables[table_idx].span, "mode table"),
        _ => (spec.event_tables[table_idx].span, "event table"),
    };
    for (a_pos, &a) in rows.iter().enumerate() {
        for &b in &rows[a_pos + 1..] {
            if !reported.insert((kind, table_idx, a, b)) {
                continue;
            }
            let witness_mode = match kind {
                0 => {
                    let mc = spec.mode_tables[table_idx].mode_class;
                    format!(
                        " in mode {}",
                        spec.display_value(mc, state.get(mc))
                    )
                }
                _ => String::new(),
            };
            diags.push(Diagnostic::error(
                DiagCode::Disjointness,
                format!(
                    "{label} for {}: rows {} and {} can fire on the same step \
                     (witness: a change of {}{})",
                    spec.var(variable).name,
                    a + 1,
                    b + 1,
                    spec.var(input_var).name,
                    witness_mode,
                ),
                span,
            ));
        }
    }
}

/// Assignments over just the variables a set of conditions reads.
fn valuations_over(spec: &SpecModel, vars: &[VarId]) -> Vec<SystemState> {
    let mut states = vec![spec.initial_state()];
    for &v in vars {
        let ty = &spec.var(v).ty;
        let mut expanded = Vec::with_capacity(states.len() * ty.cardinality());
        for s in &states {
            for value in ty.values() {
                let mut s2 = s.clone();
                s2.set(v, value);
                expanded.push(s2);
            }
        }
        states = expanded;
    }
    states
}

fn rows_in_mode(
    table: &ConditionTable,
    mode: Option<Value>,
) -> impl Iterator<Item = (usize, &super::CondRow)> {
    table.rows.iter().enumerate().filter(move |(_, row)| {
        mode.is_none_or(|m| row.modes.contains(m))
    })
}

fn cond_vars(spec: &SpecModel, table: &ConditionTable, mode: Option<Value>) -> Vec<VarId> {
    let mut vars = Vec::new();
    for (_, row) in rows_in_mode(table, mode) {
        row.cond.variables(&mut vars);
    }
    vars.dedup();
    spec.vars
        .iter()
        .enumerate()
        .map(|(i, _)| VarId(i))
        .filter(|v| vars.contains(v))
        .collect()
}

fn mode_domain(spec: &SpecModel, table: &ConditionTable) -> Vec<Option<Value>> {
    match table.mode_class {
        None => vec![None],
        Some(mc) => spec.var(mc).ty.values().map(Some).collect(),
    }
}

fn cond_table_overlap(spec: &SpecModel, table: &ConditionTable, diags: &mut Vec<Diagnostic>) {
    for mode in mode_domain(spec, table) {
        let rows: Vec<_> = rows_in_mode(table, mode).collect();
        let vars = cond_vars(spec, table, mode);
        let mut reported = BTreeSet::new();
        for state in valuations_over(spec, &vars) {
            let holding: Vec<usize> = rows
                .iter()
                .filter(|(_, row)| eval_cond(&row.cond, &state))
                .map(|(i, _)| *i)
                .collect();
            for (a_pos, &a) in holding.iter().enumerate() {
                for &b in &holding[a_pos + 1..] {
                    if !reported.insert((a, b)) {
                        continue;
                    }
                    let conflicting = table.rows[a].value != table.rows[b].value;
                    let severity_msg = format!(
                        "condition table for {}: rows {} and {} overlap{}{}",
                        spec.var(table.dependent).name,
                        a + 1,
                        b + 1,
                        mode.map(|m| {
                            format!(
                                " in mode {}",
                                spec.display_value(table.mode_class.unwrap(), m)
                            )
                        })
                        .unwrap_or_default(),
                        if conflicting {
                            " with different assigned values"
                        } else {
                            ""
                        },
                    );
                    diags.push(if conflicting {
                        Diagnostic::error(DiagCode::Overlap, severity_msg, table.span)
                    } else {
                        Diagnostic::warning(DiagCode::Overlap, severity_msg, table.span)
                    });
                }
            }
        }
    }
}

fn cond_table_completeness(spec: &SpecModel, table: &ConditionTable, diags: &mut Vec<Diagnostic>) {
    for mode in mode_domain(spec, table) {
        let rows: Vec<_> = rows_in_mode(table, mode).collect();
        if rows.is_empty() {
            // Reported separately as a mode-coverage gap.
            continue;
        }
        let disjunction = rows
            .iter()
            .map(|(_, row)| row.cond.clone())
            .reduce(CondExpr::or)
            .unwrap();
        let vars = cond_vars(spec, table, mode);
        if let Some(gap) = valuations_over(spec, &vars)
            .into_iter()
            .find(|state| !eval_cond(&disjunction, state))
        {
            let witness = vars
                .iter()
                .map(|&v| {
                    format!("{}={}", spec.var(v).name, spec.display_value(v, gap.get(v)))
                })
                .collect::<Vec<_>>()
                .join(", ");
            diags.push(Diagnostic::error(
                DiagCode::Incompleteness,
                format!(
                    "condition table for {}: no row covers {}{} and no no-change default is declared",
                    spec.var(table.dependent).name,
                    if witness.is_empty() {
                        "any state".to_string()
                    } else {
                        witness
                    },
                    mode.map(|m| {
                        format!(
                            " in mode {}",
                            spec.display_value(table.mode_class.unwrap(), m)
                        )
                    })
                    .unwrap_or_default(),
                ),
                table.span,
            ));
        }
    }
}

fn cond_table_mode_coverage(spec: &SpecModel, table: &ConditionTable, diags: &mut Vec<Diagnostic>) {
    let Some(mc) = table.mode_class else {
        return;
    };
    if table.no_change_default {
        return;
    }
    for mode in spec.var(mc).ty.values() {
        if rows_in_mode(table, Some(mode)).next().is_none() {
            diags.push(Diagnostic::error(
                DiagCode::Incompleteness,
                format!(
                    "condition table for {}: mode {} has no rows and no no-change default is declared",
                    spec.var(table.dependent).name,
                    spec.display_value(mc, mode),
                ),
                table.span,
            ));
        }
    }
}
