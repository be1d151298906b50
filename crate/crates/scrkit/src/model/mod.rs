//! SCR domain model: typed variable declarations, tables, states and the
//! operational semantics of a step.

mod consistency;
mod expr;
mod step;

pub use consistency::check_consistency;
pub use expr::{eval_cond, eval_event, ChangeArg, CmpOp, CondExpr, EventExpr, Operand, Trigger};
pub use step::{fire_mode_table, step, successors, StepError};

use crate::diag::SourceSpan;
use std::collections::BTreeMap;
use std::fmt;

/// Index of a variable declaration inside a [`SpecModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarRole {
    Monitored,
    ModeClass,
    Term,
    Controlled,
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Monitored => write!(f, "monitored"),
            VarRole::ModeClass => write!(f, "mode class"),
            VarRole::Term => write!(f, "term"),
            VarRole::Controlled => write!(f, "controlled"),
        }
    }
}

/// The shape of a finite value domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeKind {
    Bool,
    /// Inclusive integer range; `lo <= hi`.
    Int { lo: i64, hi: i64 },
    /// Non-empty list of distinct literal names; value order is declaration order.
    Enum { values: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub kind: TypeKind,
}

impl TypeDef {
    /// Number of values in the domain. All domains are finite.
    pub fn cardinality(&self) -> usize {
        match &self.kind {
            TypeKind::Bool => 2,
            TypeKind::Int { lo, hi } => (hi - lo + 1) as usize,
            TypeKind::Enum { values } => values.len(),
        }
    }

    /// The `idx`-th value of the domain in canonical order
    /// (false < true; numeric order; enum declaration order).
    pub fn value_at(&self, idx: usize) -> Value {
        match &self.kind {
            TypeKind::Bool => Value::Bool(idx == 1),
            TypeKind::Int { lo, .. } => Value::Int(lo + idx as i64),
            TypeKind::Enum { .. } => Value::Enum(idx as u16),
        }
    }

    pub fn contains(&self, value: Value) -> bool {
        match (&self.kind, value) {
            (TypeKind::Bool, Value::Bool(_)) => true,
            (TypeKind::Int { lo, hi }, Value::Int(n)) => (*lo..=*hi).contains(&n),
            (TypeKind::Enum { values }, Value::Enum(i)) => (i as usize) < values.len(),
            _ => false,
        }
    }

    pub fn enum_index(&self, literal: &str) -> Option<u16> {
        match &self.kind {
            TypeKind::Enum { values } => values
                .iter()
                .position(|v| v == literal)
                .map(|i| i as u16),
            _ => None,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.cardinality()).map(|i| self.value_at(i))
    }
}

/// A runtime value. Enum values are stored as the index into their type's
/// literal list, so ordering follows declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub role: VarRole,
    pub ty: TypeDef,
    pub initial: Value,
    pub span: SourceSpan,
}

/// One row of a mode transition table: `old -- event --> new`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRow {
    pub old_mode: Value,
    pub event: EventExpr,
    pub new_mode: Value,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransitionTable {
    pub mode_class: VarId,
    pub rows: Vec<ModeRow>,
    pub span: SourceSpan,
}

/// Set of modes a table row applies in; `None` means every mode (written `*`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet(pub Option<Vec<Value>>);

impl ModeSet {
    pub fn any() -> Self {
        ModeSet(None)
    }

    pub fn contains(&self, mode: Value) -> bool {
        match &self.0 {
            None => true,
            Some(modes) => modes.contains(&mode),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub modes: ModeSet,
    pub event: EventExpr,
    pub value: Value,
    pub span: SourceSpan,
}

/// Assigns a term or controlled variable on events. The mode column, when
/// present, is matched against the governing mode class in the old state.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTable {
    pub dependent: VarId,
    pub mode_class: Option<VarId>,
    pub rows: Vec<EventRow>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondRow {
    pub modes: ModeSet,
    pub cond: CondExpr,
    pub value: Value,
    pub span: SourceSpan,
}

/// Assigns a term or controlled variable from conditions on the new state.
/// The mode column is matched against the governing mode class in the new
/// state. `no_change_default` permits states no row covers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTable {
    pub dependent: VarId,
    pub mode_class: Option<VarId>,
    pub rows: Vec<CondRow>,
    pub no_change_default: bool,
    pub span: SourceSpan,
}

/// Which table defines a dependent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRef {
    Mode(usize),
    Event(usize),
    Cond(usize),
}

/// A type-checked SCR specification. Construction goes through the parser or
/// the builder in test code; both enforce the structural invariants
/// (unique names, acyclic table dependencies, one table per dependent).
#[derive(Debug, Clone, PartialEq)]
pub struct SpecModel {
    pub name: String,
    /// Named constants, untyped until resolved at each use site.
    pub constants: BTreeMap<String, Constant>,
    /// Types declared in the `types` section. Variables may also declare
    /// their type inline, in which case it is not listed here.
    pub types: Vec<TypeDef>,
    /// Declarations in canonical order: monitored, terms, controlled, mode
    /// classes; parse order within each group.
    pub vars: Vec<VariableDecl>,
    pub mode_tables: Vec<ModeTransitionTable>,
    pub event_tables: Vec<EventTable>,
    pub cond_tables: Vec<ConditionTable>,
    /// Dependent variables (mode classes, terms, controlled) in evaluation
    /// order: every table only reads new values of variables that precede it.
    pub update_order: Vec<(VarId, TableRef)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    Int(i64),
    /// Unresolved enum literal; matched against the variable's type per use.
    EnumLiteral(String),
}

impl SpecModel {
    pub fn var(&self, id: VarId) -> &VariableDecl {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn monitored(&self) -> impl Iterator<Item = (VarId, &VariableDecl)> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == VarRole::Monitored)
            .map(|(i, v)| (VarId(i), v))
    }

    /// The declared initial state.
    pub fn initial_state(&self) -> SystemState {
        SystemState {
            values: self.vars.iter().map(|v| v.initial).collect(),
        }
    }

    /// Renders a value as it appears in source, using `var`'s type for enum
    /// literal names.
    pub fn display_value(&self, var: VarId, value: Value) -> String {
        match (value, &self.var(var).ty.kind) {
            (Value::Bool(b), _) => b.to_string(),
            (Value::Int(n), _) => n.to_string(),
            (Value::Enum(i), TypeKind::Enum { values }) => values[i as usize].clone(),
            (Value::Enum(i), _) => format!("#{i}"),
        }
    }

    /// Clears every source span, leaving only the semantic content. Two
    /// models that parse to the same specification compare equal afterwards.
    pub fn strip_spans(&mut self) {
        for v in &mut self.vars {
            v.span = SourceSpan::default();
        }
        for t in &mut self.mode_tables {
            t.span = SourceSpan::default();
            for r in &mut t.rows {
                r.span = SourceSpan::default();
            }
        }
        for t in &mut self.event_tables {
            t.span = SourceSpan::default();
            for r in &mut t.rows {
                r.span = SourceSpan::default();
            }
        }
        for t in &mut self.cond_tables {
            t.span = SourceSpan::default();
            for r in &mut t.rows {
                r.span = SourceSpan::default();
            }
        }
    }

    /// Iterates over every total assignment of values to all variables.
    /// Exhaustive checks rely on all domains being finite.
    pub fn all_states(&self) -> AllStates<'_> {
        AllStates {
            spec: self,
            next: Some(SystemState {
                values: self.vars.iter().map(|v| v.ty.value_at(0)).collect(),
            }),
        }
    }
}

/// A total assignment of values to all declared variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    values: Vec<Value>,
}

impl SystemState {
    pub fn new(values: Vec<Value>) -> Self {
        Self { values }
    }

    pub fn get(&self, var: VarId) -> Value {
        self.values[var.0]
    }

    pub fn set(&mut self, var: VarId, value: Value) {
        self.values[var.0] = value;
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// Variables whose value differs from `other`, in declaration order.
    pub fn diff(&self, other: &SystemState) -> Vec<VarId> {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| VarId(i))
            .collect()
    }
}

pub struct AllStates<'a> {
    spec: &'a SpecModel,
    next: Option<SystemState>,
}

impl Iterator for AllStates<'_> {
    type Item = SystemState;

    fn next(&mut self) -> Option<SystemState> {
        let current = self.next.take()?;
        // Odometer increment over the per-variable domains.
        let mut bumped = current.clone();
        let mut done = true;
        for (i, decl) in self.spec.vars.iter().enumerate() {
            let ty = &decl.ty;
            let idx = value_index(ty, bumped.values[i]);
            if idx + 1 < ty.cardinality() {
                bumped.values[i] = ty.value_at(idx + 1);
                done = false;
                break;
            }
            bumped.values[i] = ty.value_at(0);
        }
        if !done {
            self.next = Some(bumped);
        }
        Some(current)
    }
}

/// Position of `value` in its type's canonical order.
pub fn value_index(ty: &TypeDef, value: Value) -> usize {
    match (value, &ty.kind) {
        (Value::Bool(b), TypeKind::Bool) => b as usize,
        (Value::Int(n), TypeKind::Int { lo, .. }) => (n - lo) as usize,
        (Value::Enum(i), TypeKind::Enum { .. }) => i as usize,
        _ => panic!("value {value:?} not in type {}", ty.name),
    }
}

/// A change of exactly one monitored variable: the only way the environment
/// drives the system forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputEvent {
    pub var: VarId,
    pub new_value: Value,
}
