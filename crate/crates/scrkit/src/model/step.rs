//! The one-step successor relation.
//!
//! A step applies one input event (exactly one monitored variable changes)
//! and then updates every dependent variable in dependency order. Each table
//! reads old values from the pre-state and new values from the in-progress
//! successor; the update order guarantees every new value a table reads has
//! already been computed.

use super::{
    eval_cond, eval_event, InputEvent, ModeTransitionTable, SpecModel, SystemState, TableRef,
    Value, VarRole,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    /// Two or more rows of one table fire on the same step. A consistency
    /// defect in the specification; never resolved silently.
    #[error("nondeterministic transition in table for {variable}: rows {rows:?} fire together")]
    NondeterministicTransition { variable: String, rows: Vec<usize> },

    /// Input whose value equals the current one or lies outside the type.
    #[error("illegal input for {variable}: {reason}")]
    IllegalInput { variable: String, reason: String },
}

/// Rows of a mode table that fire for `(old, new)` given the current mode.
pub(crate) fn firing_mode_rows(
    table: &ModeTransitionTable,
    old: &SystemState,
    new: &SystemState,
) -> Vec<usize> {
    let current = old.get(table.mode_class);
    table
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.old_mode == current && eval_event(&row.event, old, new))
        .map(|(i, _)| i)
        .collect()
}

/// Applies one mode transition table. No firing row keeps the mode; more
/// than one firing row is a hard error carrying the offending row indices.
pub fn fire_mode_table(
    spec: &SpecModel,
    table: &ModeTransitionTable,
    old: &SystemState,
    new: &SystemState,
) -> Result<Value, StepError> {
    let rows = firing_mode_rows(table, old, new);
    match rows.as_slice() {
        [] => Ok(old.get(table.mode_class)),
        [row] => Ok(table.rows[*row].new_mode),
        _ => Err(StepError::NondeterministicTransition {
            variable: spec.var(table.mode_class).name.clone(),
            rows,
        }),
    }
}

/// Applies an event table: values of rows whose mode group matches the old
/// mode and whose event fires. Conflicting values are an error; agreeing
/// duplicates collapse.
fn fire_event_table(
    spec: &SpecModel,
    idx: usize,
    old: &SystemState,
    new: &SystemState,
) -> Result<Value, StepError> {
    let table = &spec.event_tables[idx];
    let mut assigned: Option<Value> = None;
    let mut firing = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(mc) = table.mode_class {
            if !row.modes.contains(old.get(mc)) {
                continue;
            }
        }
        if eval_event(&row.event, old, new) {
            firing.push(i);
            match assigned {
                None => assigned = Some(row.value),
                Some(v) if v == row.value => {}
                Some(_) => {
                    return Err(StepError::NondeterministicTransition {
                        variable: spec.var(table.dependent).name.clone(),
                        rows: firing,
                    })
                }
            }
        }
    }
    Ok(assigned.unwrap_or_else(|| old.get(table.dependent)))
}

/// Applies a condition table: conditions and the mode group are evaluated on
/// the new state. No matching row keeps the old value (a completeness gap
/// the consistency checker reports unless a no-change default is declared).
fn fire_cond_table(
    spec: &SpecModel,
    idx: usize,
    old: &SystemState,
    new: &SystemState,
) -> Result<Value, StepError> {
    let table = &spec.cond_tables[idx];
    let mut assigned: Option<Value> = None;
    let mut firing = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(mc) = table.mode_class {
            if !row.modes.contains(new.get(mc)) {
                continue;
            }
        }
        if eval_cond(&row.cond, new) {
            firing.push(i);
            match assigned {
                None => assigned = Some(row.value),
                Some(v) if v == row.value => {}
                Some(_) => {
                    return Err(StepError::NondeterministicTransition {
                        variable: spec.var(table.dependent).name.clone(),
                        rows: firing,
                    })
                }
            }
        }
    }
    Ok(assigned.unwrap_or_else(|| old.get(table.dependent)))
}

/// Constructs the successor of `state` under `input`. Deterministic given
/// `(state, input)` whenever no consistency error arises.
pub fn step(
    spec: &SpecModel,
    state: &SystemState,
    input: InputEvent,
) -> Result<SystemState, StepError> {
    let decl = spec.var(input.var);
    if decl.role != VarRole::Monitored {
        return Err(StepError::IllegalInput {
            variable: decl.name.clone(),
            reason: format!("not a monitored variable ({})", decl.role),
        });
    }
    if !decl.ty.contains(input.new_value) {
        return Err(StepError::IllegalInput {
            variable: decl.name.clone(),
            reason: "value outside the declared type".into(),
        });
    }
    if state.get(input.var) == input.new_value {
        return Err(StepError::IllegalInput {
            variable: decl.name.clone(),
            reason: "value unchanged (one-input steps must change the variable)".into(),
        });
    }

    let mut next = state.clone();
    next.set(input.var, input.new_value);
    for &(var, table) in &spec.update_order {
        let value = match table {
            TableRef::Mode(i) => fire_mode_table(spec, &spec.mode_tables[i], state, &next)?,
            TableRef::Event(i) => fire_event_table(spec, i, state, &next)?,
            TableRef::Cond(i) => fire_cond_table(spec, i, state, &next)?,
        };
        next.set(var, value);
    }
    Ok(next)
}

/// Every legal input in `state`, in (declaration order, value order).
pub fn legal_inputs(spec: &SpecModel, state: &SystemState) -> Vec<InputEvent> {
    let mut inputs = Vec::new();
    for (id, decl) in spec.monitored() {
        let current = state.get(id);
        for value in decl.ty.values() {
            if value != current {
                inputs.push(InputEvent {
                    var: id,
                    new_value: value,
                });
            }
        }
    }
    inputs
}

/// All one-input successors of `state`. Step errors are attached to the
/// offending input rather than aborting the whole expansion.
pub fn successors(
    spec: &SpecModel,
    state: &SystemState,
) -> Vec<(InputEvent, Result<SystemState, StepError>)> {
    legal_inputs(spec, state)
        .into_iter()
        .map(|input| (input, step(spec, state, input)))
        .collect()
}
