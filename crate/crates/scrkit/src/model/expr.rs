//! Condition and event expressions and their evaluation.
//!
//! Conditions are boolean formulas over single states. Events are predicates
//! over an (old, new) state pair: `@T(c)` fires when `c` becomes true, `@F(c)`
//! when it becomes false, `@C(x)` when `x` changes value. An optional `when`
//! clause is evaluated in the old state. `@C` over a compound formula (not
//! just a variable) is accepted as an extension and means the formula's truth
//! value changes.

use super::{SystemState, Value, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// Ordering comparisons only make sense on integer domains.
    pub fn is_ordering(&self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

/// Right-hand side of a comparison: a resolved value, remembering the named
/// constant it came from so rendering can reproduce the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Operand {
    pub value: Value,
    pub symbol: Option<String>,
}

impl Operand {
    pub fn literal(value: Value) -> Self {
        Self {
            value,
            symbol: None,
        }
    }

    pub fn constant(name: impl Into<String>, value: Value) -> Self {
        Self {
            value,
            symbol: Some(name.into()),
        }
    }
}

/// A boolean state formula.
#[derive(Debug, Clone, PartialEq)]
pub enum CondExpr {
    Lit(bool),
    /// A boolean variable used as an atom.
    Var(VarId),
    Cmp {
        var: VarId,
        op: CmpOp,
        rhs: Operand,
    },
    Not(Box<CondExpr>),
    And(Box<CondExpr>, Box<CondExpr>),
    Or(Box<CondExpr>, Box<CondExpr>),
}

impl CondExpr {
    pub fn negate(self) -> CondExpr {
        CondExpr::Not(Box::new(self))
    }

    pub fn and(self, rhs: CondExpr) -> CondExpr {
        CondExpr::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: CondExpr) -> CondExpr {
        CondExpr::Or(Box::new(self), Box::new(rhs))
    }

    /// Variables read by this formula, in first-occurrence order.
    pub fn variables(&self, out: &mut Vec<VarId>) {
        match self {
            CondExpr::Lit(_) => {}
            CondExpr::Var(v) => push_unique(out, *v),
            CondExpr::Cmp { var, .. } => push_unique(out, *var),
            CondExpr::Not(inner) => inner.variables(out),
            CondExpr::And(a, b) | CondExpr::Or(a, b) => {
                a.variables(out);
                b.variables(out);
            }
        }
    }
}

fn push_unique(out: &mut Vec<VarId>, v: VarId) {
    if !out.contains(&v) {
        out.push(v);
    }
}

/// What `@C` watches: a variable or, as an extension, a formula.
#[derive(Debug, Clone, PartialEq)]
pub enum ChangeArg {
    Var(VarId),
    Formula(CondExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trigger {
    /// `@T(c)`: c false in the old state, true in the new.
    BecomesTrue(CondExpr),
    /// `@F(c)`: c true in the old state, false in the new.
    BecomesFalse(CondExpr),
    /// `@C(x)`: the watched value differs between old and new.
    Changes(ChangeArg),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventExpr {
    pub trigger: Trigger,
    pub when: Option<CondExpr>,
}

impl EventExpr {
    pub fn becomes_true(cond: CondExpr) -> Self {
        Self {
            trigger: Trigger::BecomesTrue(cond),
            when: None,
        }
    }

    pub fn becomes_false(cond: CondExpr) -> Self {
        Self {
            trigger: Trigger::BecomesFalse(cond),
            when: None,
        }
    }

    pub fn changes(arg: ChangeArg) -> Self {
        Self {
            trigger: Trigger::Changes(arg),
            when: None,
        }
    }

    pub fn with_when(mut self, when: CondExpr) -> Self {
        self.when = Some(when);
        self
    }

    /// Variables whose *new* value the event reads. The `when` clause is
    /// excluded: it only reads the old state.
    pub fn new_state_reads(&self, out: &mut Vec<VarId>) {
        match &self.trigger {
            Trigger::BecomesTrue(c) | Trigger::BecomesFalse(c) => c.variables(out),
            Trigger::Changes(ChangeArg::Var(v)) => push_unique(out, *v),
            Trigger::Changes(ChangeArg::Formula(c)) => c.variables(out),
        }
    }

    /// All variables the event mentions, including the `when` clause.
    pub fn variables(&self, out: &mut Vec<VarId>) {
        self.new_state_reads(out);
        if let Some(when) = &self.when {
            when.variables(out);
        }
    }
}

/// Evaluates a state formula. Total on type-checked expressions.
pub fn eval_cond(expr: &CondExpr, state: &SystemState) -> bool {
    match expr {
        CondExpr::Lit(b) => *b,
        CondExpr::Var(v) => match state.get(*v) {
            Value::Bool(b) => b,
            other => panic!("boolean atom over non-boolean value {other:?}"),
        },
        CondExpr::Cmp { var, op, rhs } => {
            let lhs = state.get(*var);
            compare(lhs, *op, rhs.value)
        }
        CondExpr::Not(inner) => !eval_cond(inner, state),
        CondExpr::And(a, b) => eval_cond(a, state) && eval_cond(b, state),
        CondExpr::Or(a, b) => eval_cond(a, state) || eval_cond(b, state),
    }
}

fn compare(lhs: Value, op: CmpOp, rhs: Value) -> bool {
    match op {
        CmpOp::Eq => lhs == rhs,
        CmpOp::Ne => lhs != rhs,
        CmpOp::Lt => lhs < rhs,
        CmpOp::Le => lhs <= rhs,
        CmpOp::Gt => lhs > rhs,
        CmpOp::Ge => lhs >= rhs,
    }
}

/// Evaluates an event over a step from `old` to `new`.
pub fn eval_event(ev: &EventExpr, old: &SystemState, new: &SystemState) -> bool {
    let fired = match &ev.trigger {
        Trigger::BecomesTrue(c) => !eval_cond(c, old) && eval_cond(c, new),
        Trigger::BecomesFalse(c) => eval_cond(c, old) && !eval_cond(c, new),
        Trigger::Changes(ChangeArg::Var(v)) => old.get(*v) != new.get(*v),
        Trigger::Changes(ChangeArg::Formula(c)) => eval_cond(c, old) != eval_cond(c, new),
    };
    fired
        && ev
            .when
            .as_ref()
            .is_none_or(|when| eval_cond(when, old))
}
