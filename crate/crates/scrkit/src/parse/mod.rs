//! Parser for the `.scr` specification format.
//!
//! The format is line-oriented in style but whitespace-insensitive outside
//! tokens: a `spec` header followed by `constants`, `types`, `monitored`,
//! `terms`, `controlled` sections, `modeclass` blocks (declaration plus mode
//! transition rows) and `eventtable`/`condtable` blocks. Rows are written
//! `OLD -- EVENT --> NEW`, events exactly as `@T(expr)`, `@F(expr)`,
//! `@C(var)` with an optional `when expr`. Comments start with `#`.
//!
//! Parsing produces a type-checked [`SpecModel`] or a non-empty list of
//! source-located diagnostics. See `docs/formats.md` for the grammar.

mod lex;
mod render;

pub use render::{render_cond, render_event, render_spec};

pub(crate) use lex::{lex, TokKind, Token};

use crate::diag::{DiagCode, Diagnostic, SourceSpan};
use crate::model::{
    ChangeArg, CmpOp, CondExpr, CondRow, ConditionTable, Constant, EventExpr, EventRow,
    EventTable, ModeRow, ModeSet, ModeTransitionTable, Operand, SpecModel, TableRef, Trigger,
    TypeDef, TypeKind, Value, VarId, VarRole, VariableDecl,
};
use std::collections::BTreeMap;

/// Words with structural meaning; not usable as declared names.
const RESERVED: &[&str] = &[
    "spec", "constants", "types", "monitored", "terms", "controlled", "modeclass", "eventtable",
    "condtable", "for", "initial", "modes", "when", "int", "bool", "enum", "default", "nochange",
    "true", "false", "not", "and", "or", "NOT", "AND", "OR", "program", "check", "stateChange",
];

pub(crate) fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

// ---------------------------------------------------------------------------
// Token cursor
// ---------------------------------------------------------------------------

pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Self { tokens, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at(&self, kind: TokKind) -> bool {
        self.peek().kind == kind
    }

    pub(crate) fn at_ident(&self, text: &str) -> bool {
        self.peek().kind == TokKind::Ident && self.peek().text == text
    }

    pub(crate) fn eat_ident(&mut self, text: &str) -> bool {
        if self.at_ident(text) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, kind: TokKind, what: &str) -> Result<Token, Diagnostic> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {what}")))
        }
    }

    pub(crate) fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        let t = self.expect(TokKind::Ident, what)?;
        Ok((t.text, t.span))
    }

    pub(crate) fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic::error(DiagCode::Syntax, message, self.peek().span)
    }
}

// ---------------------------------------------------------------------------
// Raw (unresolved) syntax trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) enum RawValue {
    Int(i64),
    Bool(bool),
    Ident(String),
}

#[derive(Debug, Clone)]
pub(crate) struct RawExpr {
    pub kind: RawExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub(crate) enum RawExprKind {
    Lit(bool),
    Atom(String),
    Cmp(String, CmpOp, RawValue, SourceSpan),
    Not(Box<RawExpr>),
    And(Box<RawExpr>, Box<RawExpr>),
    Or(Box<RawExpr>, Box<RawExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawTriggerKind {
    True,
    False,
    Change,
}

#[derive(Debug, Clone)]
pub(crate) struct RawEvent {
    pub kind: RawTriggerKind,
    pub arg: RawExpr,
    pub when: Option<RawExpr>,
}

#[derive(Debug, Clone)]
enum RawType {
    Bool,
    Int(i64, i64),
    Enum(Vec<(String, SourceSpan)>),
    Named(String, SourceSpan),
}

#[derive(Debug)]
struct RawVar {
    name: String,
    role: VarRole,
    ty: RawType,
    initial: RawValue,
    initial_span: SourceSpan,
    span: SourceSpan,
}

#[derive(Debug)]
struct RawModeRow {
    old: (String, SourceSpan),
    event: RawEvent,
    new: (String, SourceSpan),
    span: SourceSpan,
}

#[derive(Debug)]
struct RawModeClass {
    name: String,
    modes: Vec<(String, SourceSpan)>,
    initial: Option<(String, SourceSpan)>,
    rows: Vec<RawModeRow>,
    span: SourceSpan,
}

#[derive(Debug)]
struct RawDepRow {
    modes: Option<Vec<(String, SourceSpan)>>,
    event: Option<RawEvent>,
    cond: Option<RawExpr>,
    value: RawValue,
    value_span: SourceSpan,
    span: SourceSpan,
}

#[derive(Debug)]
struct RawDepTable {
    is_event: bool,
    dependent: (String, SourceSpan),
    mode_class: Option<(String, SourceSpan)>,
    rows: Vec<RawDepRow>,
    no_change_default: bool,
    span: SourceSpan,
}

#[derive(Debug, Default)]
struct RawSpec {
    name: String,
    constants: Vec<(String, RawValue, SourceSpan)>,
    types: Vec<(String, RawType, SourceSpan)>,
    vars: Vec<RawVar>,
    mode_classes: Vec<RawModeClass>,
    dep_tables: Vec<RawDepTable>,
}

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

/// Parses and type-checks a textual specification.
pub fn parse_spec(text: &str) -> Result<SpecModel, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(tokens);
    let raw = parse_raw_spec(&mut cur).map_err(|d| vec![d])?;
    resolve(raw)
}

fn parse_raw_spec(cur: &mut Cursor) -> Result<RawSpec, Diagnostic> {
    if !cur.eat_ident("spec") {
        return Err(Diagnostic::error(
            DiagCode::Syntax,
            "expected spec header",
            cur.peek().span,
        ));
    }
    let (name, _) = cur.expect_ident("a specification name")?;
    let mut raw = RawSpec {
        name,
        ..RawSpec::default()
    };

    while !cur.at(TokKind::Eof) {
        let t = cur.peek().clone();
        match t.text.as_str() {
            "constants" => parse_constants(cur, &mut raw)?,
            "types" => parse_types(cur, &mut raw)?,
            "monitored" => parse_var_section(cur, &mut raw, VarRole::Monitored)?,
            "terms" => parse_var_section(cur, &mut raw, VarRole::Term)?,
            "controlled" => parse_var_section(cur, &mut raw, VarRole::Controlled)?,
            "modeclass" => parse_modeclass(cur, &mut raw)?,
            "eventtable" => parse_dep_table(cur, &mut raw, true)?,
            "condtable" => parse_dep_table(cur, &mut raw, false)?,
            _ => {
                return Err(cur.error_here(
                    "expected a section: constants, types, monitored, terms, controlled, \
                     modeclass, eventtable or condtable",
                ))
            }
        }
    }
    Ok(raw)
}

fn parse_constants(cur: &mut Cursor, raw: &mut RawSpec) -> Result<(), Diagnostic> {
    cur.bump();
    cur.expect(TokKind::LBrace, "`{`")?;
    while !cur.at(TokKind::RBrace) {
        let (name, span) = cur.expect_ident("a constant name")?;
        cur.expect(TokKind::Eq, "`=`")?;
        let (value, _) = parse_raw_value(cur)?;
        raw.constants.push((name, value, span));
    }
    cur.bump();
    Ok(())
}

fn parse_types(cur: &mut Cursor, raw: &mut RawSpec) -> Result<(), Diagnostic> {
    cur.bump();
    cur.expect(TokKind::LBrace, "`{`")?;
    while !cur.at(TokKind::RBrace) {
        let (name, span) = cur.expect_ident("a type name")?;
        cur.expect(TokKind::Colon, "`:`")?;
        let ty = parse_type(cur)?;
        raw.types.push((name, ty, span));
    }
    cur.bump();
    Ok(())
}

fn parse_type(cur: &mut Cursor) -> Result<RawType, Diagnostic> {
    if cur.eat_ident("bool") {
        Ok(RawType::Bool)
    } else if cur.eat_ident("int") {
        let lo = cur.expect(TokKind::Int, "a lower bound")?;
        cur.expect(TokKind::DotDot, "`..`")?;
        let hi = cur.expect(TokKind::Int, "an upper bound")?;
        Ok(RawType::Int(
            lo.text.parse().map_err(|_| cur.error_here("integer out of range"))?,
            hi.text.parse().map_err(|_| cur.error_here("integer out of range"))?,
        ))
    } else if cur.eat_ident("enum") {
        cur.expect(TokKind::LBrace, "`{`")?;
        let mut values = vec![cur.expect_ident("an enum literal")?];
        while cur.at(TokKind::Comma) {
            cur.bump();
            values.push(cur.expect_ident("an enum literal")?);
        }
        cur.expect(TokKind::RBrace, "`}`")?;
        Ok(RawType::Enum(values))
    } else if cur.at(TokKind::Ident) {
        let (name, span) = cur.expect_ident("a type")?;
        Ok(RawType::Named(name, span))
    } else {
        Err(cur.error_here("expected a type: bool, int lo .. hi, enum { ... } or a type name"))
    }
}

fn parse_var_section(cur: &mut Cursor, raw: &mut RawSpec, role: VarRole) -> Result<(), Diagnostic> {
    cur.bump();
    cur.expect(TokKind::LBrace, "`{`")?;
    while !cur.at(TokKind::RBrace) {
        let (name, span) = cur.expect_ident("a variable name")?;
        cur.expect(TokKind::Colon, "`:`")?;
        let ty = parse_type(cur)?;
        if !cur.eat_ident("initial") {
            return Err(cur.error_here("expected `initial`"));
        }
        let (initial, initial_span) = parse_raw_value(cur)?;
        raw.vars.push(RawVar {
            name,
            role,
            ty,
            initial,
            initial_span,
            span,
        });
    }
    cur.bump();
    Ok(())
}

fn parse_raw_value(cur: &mut Cursor) -> Result<(RawValue, SourceSpan), Diagnostic> {
    let t = cur.peek().clone();
    match t.kind {
        TokKind::Int => {
            cur.bump();
            let n = t
                .text
                .parse()
                .map_err(|_| Diagnostic::error(DiagCode::Lex, "integer out of range", t.span))?;
            Ok((RawValue::Int(n), t.span))
        }
        TokKind::Ident if t.text == "true" => {
            cur.bump();
            Ok((RawValue::Bool(true), t.span))
        }
        TokKind::Ident if t.text == "false" => {
            cur.bump();
            Ok((RawValue::Bool(false), t.span))
        }
        TokKind::Ident => {
            cur.bump();
            Ok((RawValue::Ident(t.text), t.span))
        }
        _ => Err(cur.error_here("expected a value")),
    }
}

fn parse_modeclass(cur: &mut Cursor, raw: &mut RawSpec) -> Result<(), Diagnostic> {
    cur.bump();
    let (name, span) = cur.expect_ident("a mode class name")?;
    cur.expect(TokKind::LBrace, "`{`")?;
    let mut mc = RawModeClass {
        name,
        modes: Vec::new(),
        initial: None,
        rows: Vec::new(),
        span,
    };
    while !cur.at(TokKind::RBrace) {
        if cur.at_ident("modes") {
            cur.bump();
            cur.expect(TokKind::LBrace, "`{`")?;
            mc.modes.push(cur.expect_ident("a mode name")?);
            while cur.at(TokKind::Comma) {
                cur.bump();
                mc.modes.push(cur.expect_ident("a mode name")?);
            }
            cur.expect(TokKind::RBrace, "`}`")?;
        } else if cur.at_ident("initial") {
            cur.bump();
            mc.initial = Some(cur.expect_ident("a mode name")?);
        } else {
            let old = cur.expect_ident("a mode name, `modes` or `initial`")?;
            cur.expect(TokKind::DashDash, "`--`")?;
            let event = parse_raw_event(cur)?;
            cur.expect(TokKind::Arrow, "`-->`")?;
            let new = cur.expect_ident("a mode name")?;
            let span = old.1.merge(new.1);
            mc.rows.push(RawModeRow {
                old,
                event,
                new,
                span,
            });
        }
    }
    cur.bump();
    raw.mode_classes.push(mc);
    Ok(())
}

fn parse_dep_table(cur: &mut Cursor, raw: &mut RawSpec, is_event: bool) -> Result<(), Diagnostic> {
    cur.bump();
    let dependent = cur.expect_ident("a variable name")?;
    let mode_class = if cur.eat_ident("for") {
        Some(cur.expect_ident("a mode class name")?)
    } else {
        None
    };
    let span = dependent.1;
    cur.expect(TokKind::LBrace, "`{`")?;
    let mut table = RawDepTable {
        is_event,
        dependent,
        mode_class,
        rows: Vec::new(),
        no_change_default: false,
        span,
    };
    while !cur.at(TokKind::RBrace) {
        if cur.at_ident("default") {
            cur.bump();
            if !cur.eat_ident("nochange") {
                return Err(cur.error_here("expected `nochange`"));
            }
            table.no_change_default = true;
            continue;
        }
        let row_start = cur.peek().span;
        let modes = if cur.at(TokKind::Star) {
            cur.bump();
            None
        } else {
            let mut modes = vec![cur.expect_ident("a mode name or `*`")?];
            while cur.at(TokKind::Comma) {
                cur.bump();
                modes.push(cur.expect_ident("a mode name")?);
            }
            Some(modes)
        };
        cur.expect(TokKind::DashDash, "`--`")?;
        let (event, cond) = if is_event {
            (Some(parse_raw_event(cur)?), None)
        } else {
            (None, Some(parse_raw_cond(cur)?))
        };
        cur.expect(TokKind::Arrow, "`-->`")?;
        let (value, value_span) = parse_raw_value(cur)?;
        table.rows.push(RawDepRow {
            modes,
            event,
            cond,
            value,
            value_span,
            span: row_start.merge(value_span),
        });
    }
    cur.bump();
    raw.dep_tables.push(table);
    Ok(())
}

// ---------------------------------------------------------------------------
// Expression grammar (shared with the scenario parser)
// ---------------------------------------------------------------------------

pub(crate) fn parse_raw_event(cur: &mut Cursor) -> Result<RawEvent, Diagnostic> {
    let t = cur.peek().clone();
    let kind = match t.kind {
        TokKind::AtT => RawTriggerKind::True,
        TokKind::AtF => RawTriggerKind::False,
        TokKind::AtC => RawTriggerKind::Change,
        _ => return Err(cur.error_here("expected `@T`, `@F` or `@C`")),
    };
    cur.bump();
    cur.expect(TokKind::LParen, "`(`")?;
    let arg = parse_raw_cond(cur)?;
    cur.expect(TokKind::RParen, "`)`")?;
    let when = if cur.eat_ident("when") {
        Some(parse_raw_cond(cur)?)
    } else {
        None
    };
    Ok(RawEvent { kind, arg, when })
}

pub(crate) fn parse_raw_cond(cur: &mut Cursor) -> Result<RawExpr, Diagnostic> {
    parse_or(cur)
}

fn is_connective(t: &Token, names: [&str; 2]) -> bool {
    t.kind == TokKind::Ident && (t.text == names[0] || t.text == names[1])
}

fn parse_or(cur: &mut Cursor) -> Result<RawExpr, Diagnostic> {
    let mut lhs = parse_and(cur)?;
    while is_connective(cur.peek(), ["OR", "or"]) {
        cur.bump();
        let rhs = parse_and(cur)?;
        let span = lhs.span.merge(rhs.span);
        lhs = RawExpr {
            kind: RawExprKind::Or(Box::new(lhs), Box::new(rhs)),
            span,
        };
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor) -> Result<RawExpr, Diagnostic> {
    let mut lhs = parse_unary(cur)?;
    while is_connective(cur.peek(), ["AND", "and"]) {
        cur.bump();
        let rhs = parse_unary(cur)?;
        let span = lhs.span.merge(rhs.span);
        lhs = RawExpr {
            kind: RawExprKind::And(Box::new(lhs), Box::new(rhs)),
            span,
        };
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<RawExpr, Diagnostic> {
    if is_connective(cur.peek(), ["NOT", "not"]) {
        let start = cur.bump().span;
        let inner = parse_unary(cur)?;
        let span = start.merge(inner.span);
        return Ok(RawExpr {
            kind: RawExprKind::Not(Box::new(inner)),
            span,
        });
    }
    parse_atom(cur)
}

fn parse_atom(cur: &mut Cursor) -> Result<RawExpr, Diagnostic> {
    let t = cur.peek().clone();
    match t.kind {
        TokKind::LParen => {
            cur.bump();
            let inner = parse_or(cur)?;
            cur.expect(TokKind::RParen, "`)`")?;
            Ok(inner)
        }
        TokKind::Ident if t.text == "true" || t.text == "false" => {
            cur.bump();
            Ok(RawExpr {
                kind: RawExprKind::Lit(t.text == "true"),
                span: t.span,
            })
        }
        TokKind::Ident => {
            cur.bump();
            let op = match cur.peek().kind {
                TokKind::Eq => Some(CmpOp::Eq),
                TokKind::Ne => Some(CmpOp::Ne),
                TokKind::Lt => Some(CmpOp::Lt),
                TokKind::Le => Some(CmpOp::Le),
                TokKind::Gt => Some(CmpOp::Gt),
                TokKind::Ge => Some(CmpOp::Ge),
                _ => None,
            };
            match op {
                None => Ok(RawExpr {
                    kind: RawExprKind::Atom(t.text),
                    span: t.span,
                }),
                Some(op) => {
                    cur.bump();
                    let (value, vspan) = parse_raw_value(cur)?;
                    Ok(RawExpr {
                        kind: RawExprKind::Cmp(t.text, op, value, vspan),
                        span: t.span.merge(vspan),
                    })
                }
            }
        }
        _ => Err(cur.error_here("expected a formula")),
    }
}

// ---------------------------------------------------------------------------
// Resolution and type checking
// ---------------------------------------------------------------------------

/// Name environment for resolving expressions.
pub(crate) struct ResolveCtx<'a> {
    pub vars: &'a [VariableDecl],
    pub constants: &'a BTreeMap<String, Constant>,
}

impl<'a> ResolveCtx<'a> {
    pub(crate) fn for_spec(spec: &'a SpecModel) -> Self {
        Self {
            vars: &spec.vars,
            constants: &spec.constants,
        }
    }

    fn lookup(&self, name: &str) -> Option<(VarId, &VariableDecl)> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| (VarId(i), &self.vars[i]))
    }

    pub(crate) fn resolve_cond(&self, raw: &RawExpr) -> Result<CondExpr, Diagnostic> {
        match &raw.kind {
            RawExprKind::Lit(b) => Ok(CondExpr::Lit(*b)),
            RawExprKind::Atom(name) => {
                let (id, decl) = self.lookup(name).ok_or_else(|| {
                    Diagnostic::error(
                        DiagCode::Undeclared,
                        format!("undeclared variable `{name}`"),
                        raw.span,
                    )
                })?;
                if decl.ty.kind != TypeKind::Bool {
                    return Err(Diagnostic::error(
                        DiagCode::Type,
                        format!("`{name}` is not boolean and cannot stand alone in a formula"),
                        raw.span,
                    ));
                }
                Ok(CondExpr::Var(id))
            }
            RawExprKind::Cmp(name, op, value, vspan) => {
                let (id, decl) = self.lookup(name).ok_or_else(|| {
                    Diagnostic::error(
                        DiagCode::Undeclared,
                        format!("undeclared variable `{name}`"),
                        raw.span,
                    )
                })?;
                if op.is_ordering() && !matches!(decl.ty.kind, TypeKind::Int { .. }) {
                    return Err(Diagnostic::error(
                        DiagCode::Type,
                        format!(
                            "ordering comparison `{}` requires an integer variable, `{name}` is not",
                            op.as_str()
                        ),
                        raw.span,
                    ));
                }
                let rhs = self.resolve_operand(&decl.ty, value, *vspan)?;
                Ok(CondExpr::Cmp { var: id, op: *op, rhs })
            }
            RawExprKind::Not(inner) => Ok(self.resolve_cond(inner)?.negate()),
            RawExprKind::And(a, b) => Ok(self.resolve_cond(a)?.and(self.resolve_cond(b)?)),
            RawExprKind::Or(a, b) => Ok(self.resolve_cond(a)?.or(self.resolve_cond(b)?)),
        }
    }

    fn resolve_operand(
        &self,
        ty: &TypeDef,
        value: &RawValue,
        span: SourceSpan,
    ) -> Result<Operand, Diagnostic> {
        let type_err = |msg: String| Diagnostic::error(DiagCode::Type, msg, span);
        match value {
            RawValue::Int(n) => match ty.kind {
                TypeKind::Int { .. } => Ok(Operand::literal(Value::Int(*n))),
                _ => Err(type_err(format!(
                    "integer literal compared against non-integer type {}",
                    ty.name
                ))),
            },
            RawValue::Bool(b) => match ty.kind {
                TypeKind::Bool => Ok(Operand::literal(Value::Bool(*b))),
                _ => Err(type_err(format!(
                    "boolean literal compared against non-boolean type {}",
                    ty.name
                ))),
            },
            RawValue::Ident(name) => {
                if let Some(constant) = self.constants.get(name) {
                    return match (constant, &ty.kind) {
                        (Constant::Int(n), TypeKind::Int { .. }) => {
                            Ok(Operand::constant(name, Value::Int(*n)))
                        }
                        (Constant::EnumLiteral(lit), TypeKind::Enum { .. }) => ty
                            .enum_index(lit)
                            .map(|i| Operand::constant(name, Value::Enum(i)))
                            .ok_or_else(|| {
                                type_err(format!(
                                    "constant `{name}` = `{lit}` is not a value of type {}",
                                    ty.name
                                ))
                            }),
                        _ => Err(type_err(format!(
                            "constant `{name}` does not fit type {}",
                            ty.name
                        ))),
                    };
                }
                if let Some(i) = ty.enum_index(name) {
                    return Ok(Operand::literal(Value::Enum(i)));
                }
                if self.lookup(name).is_some() {
                    return Err(type_err(format!(
                        "`{name}` is a variable; comparisons must be against constants"
                    )));
                }
                Err(Diagnostic::error(
                    DiagCode::Undeclared,
                    format!("`{name}` is not a constant or a value of type {}", ty.name),
                    span,
                ))
            }
        }
    }

    pub(crate) fn resolve_event(&self, raw: &RawEvent) -> Result<EventExpr, Diagnostic> {
        let trigger = match raw.kind {
            RawTriggerKind::True => Trigger::BecomesTrue(self.resolve_cond(&raw.arg)?),
            RawTriggerKind::False => Trigger::BecomesFalse(self.resolve_cond(&raw.arg)?),
            RawTriggerKind::Change => {
                // A bare variable of any type is watched directly; anything
                // else must be a boolean formula whose truth value changes.
                if let RawExprKind::Atom(name) = &raw.arg.kind {
                    if let Some((id, _)) = self.lookup(name) {
                        Trigger::Changes(ChangeArg::Var(id))
                    } else {
                        return Err(Diagnostic::error(
                            DiagCode::Undeclared,
                            format!("undeclared variable `{name}`"),
                            raw.arg.span,
                        ));
                    }
                } else if matches!(raw.arg.kind, RawExprKind::Lit(_)) {
                    return Err(Diagnostic::error(
                        DiagCode::Type,
                        "@C over a literal can never change",
                        raw.arg.span,
                    ));
                } else {
                    Trigger::Changes(ChangeArg::Formula(self.resolve_cond(&raw.arg)?))
                }
            }
        };
        let when = raw
            .when
            .as_ref()
            .map(|w| self.resolve_cond(w))
            .transpose()?;
        Ok(EventExpr { trigger, when })
    }

    fn resolve_member_value(
        &self,
        ty: &TypeDef,
        value: &RawValue,
        span: SourceSpan,
    ) -> Result<Value, Diagnostic> {
        let operand = self.resolve_operand(ty, value, span)?;
        if !ty.contains(operand.value) {
            return Err(Diagnostic::error(
                DiagCode::Type,
                format!("value is outside type {}", ty.name),
                span,
            ));
        }
        Ok(operand.value)
    }
}

fn role_rank(role: VarRole) -> usize {
    match role {
        VarRole::Monitored => 0,
        VarRole::Term => 1,
        VarRole::Controlled => 2,
        VarRole::ModeClass => 3,
    }
}

fn resolve(raw: RawSpec) -> Result<SpecModel, Vec<Diagnostic>> {
    let mut diags: Vec<Diagnostic> = Vec::new();

    // Named types.
    let mut types: Vec<TypeDef> = Vec::new();
    for (name, ty, span) in &raw.types {
        if is_reserved(name) {
            diags.push(reserved_diag(name, *span));
            continue;
        }
        if types.iter().any(|t| &t.name == name) {
            diags.push(Diagnostic::error(
                DiagCode::Duplicate,
                format!("type `{name}` declared twice"),
                *span,
            ));
            continue;
        }
        match build_type(name, ty, &types, *span) {
            Ok(t) => types.push(t),
            Err(d) => diags.push(d),
        }
    }

    // Constants.
    let mut constants: BTreeMap<String, Constant> = BTreeMap::new();
    for (name, value, span) in &raw.constants {
        if is_reserved(name) {
            diags.push(reserved_diag(name, *span));
            continue;
        }
        if constants.contains_key(name) {
            diags.push(Diagnostic::error(
                DiagCode::Duplicate,
                format!("constant `{name}` declared twice"),
                *span,
            ));
            continue;
        }
        match value {
            RawValue::Int(n) => {
                constants.insert(name.clone(), Constant::Int(*n));
            }
            RawValue::Ident(lit) => {
                constants.insert(name.clone(), Constant::EnumLiteral(lit.clone()));
            }
            RawValue::Bool(_) => diags.push(Diagnostic::error(
                DiagCode::Type,
                format!("constant `{name}` must be an integer or an enum literal"),
                *span,
            )),
        }
    }

    // Variable declarations, canonical order: monitored, terms, controlled,
    // mode classes. Initial values are resolved after all names are known.
    struct PendingVar {
        decl: VariableDecl,
        initial: RawValue,
        initial_span: SourceSpan,
    }
    let mut pending: Vec<PendingVar> = Vec::new();

    let mut ordered: Vec<&RawVar> = raw.vars.iter().collect();
    ordered.sort_by_key(|v| role_rank(v.role));
    for v in ordered {
        let ty = match build_type(&v.name, &v.ty, &types, v.span) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        pending.push(PendingVar {
            decl: VariableDecl {
                name: v.name.clone(),
                role: v.role,
                ty,
                initial: Value::Bool(false), // placeholder until resolved
                span: v.span,
            },
            initial: v.initial.clone(),
            initial_span: v.initial_span,
        });
    }
    for mc in &raw.mode_classes {
        if mc.modes.is_empty() {
            diags.push(Diagnostic::error(
                DiagCode::Syntax,
                format!("mode class `{}` declares no modes", mc.name),
                mc.span,
            ));
            continue;
        }
        let ty = match build_type(
            &mc.name,
            &RawType::Enum(mc.modes.clone()),
            &types,
            mc.span,
        ) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        let Some((initial, initial_span)) = mc.initial.clone() else {
            diags.push(Diagnostic::error(
                DiagCode::Syntax,
                format!("mode class `{}` has no `initial` mode", mc.name),
                mc.span,
            ));
            continue;
        };
        pending.push(PendingVar {
            decl: VariableDecl {
                name: mc.name.clone(),
                role: VarRole::ModeClass,
                ty,
                initial: Value::Bool(false),
                span: mc.span,
            },
            initial: RawValue::Ident(initial),
            initial_span,
        });
    }

    // Duplicate names across variables and constants (one namespace).
    let mut seen: Vec<&str> = Vec::new();
    for p in &pending {
        if is_reserved(&p.decl.name) {
            diags.push(reserved_diag(&p.decl.name, p.decl.span));
        }
        if seen.contains(&p.decl.name.as_str()) || constants.contains_key(&p.decl.name) {
            diags.push(Diagnostic::error(
                DiagCode::Duplicate,
                format!("`{}` declared twice", p.decl.name),
                p.decl.span,
            ));
        }
        seen.push(&p.decl.name);
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut vars: Vec<VariableDecl> = pending.iter().map(|p| p.decl.clone()).collect();
    {
        let ctx = ResolveCtx {
            vars: &vars,
            constants: &constants,
        };
        let mut initials = Vec::new();
        for p in &pending {
            match ctx.resolve_member_value(&p.decl.ty, &p.initial, p.initial_span) {
                Ok(v) => initials.push(Some(v)),
                Err(d) => {
                    diags.push(d);
                    initials.push(None);
                }
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        for (var, initial) in vars.iter_mut().zip(initials) {
            var.initial = initial.unwrap();
        }
    }

    let ctx = ResolveCtx {
        vars: &vars,
        constants: &constants,
    };

    // Mode transition tables.
    let mut mode_tables = Vec::new();
    for mc in &raw.mode_classes {
        let Some((mc_id, decl)) = ctx.lookup(&mc.name) else {
            continue; // declaration failed above
        };
        let mut rows = Vec::new();
        for row in &mc.rows {
            let old_mode = resolve_mode(&decl.ty, &row.old, &mut diags);
            let new_mode = resolve_mode(&decl.ty, &row.new, &mut diags);
            let event = match ctx.resolve_event(&row.event) {
                Ok(e) => Some(e),
                Err(d) => {
                    diags.push(d);
                    None
                }
            };
            if let (Some(old_mode), Some(new_mode), Some(event)) = (old_mode, new_mode, event) {
                rows.push(ModeRow {
                    old_mode,
                    event,
                    new_mode,
                    span: row.span,
                });
            }
        }
        mode_tables.push(ModeTransitionTable {
            mode_class: mc_id,
            rows,
            span: mc.span,
        });
    }

    // Event and condition tables.
    let mut event_tables: Vec<EventTable> = Vec::new();
    let mut cond_tables: Vec<ConditionTable> = Vec::new();
    for t in &raw.dep_tables {
        let Some((dep_id, dep_decl)) = ctx.lookup(&t.dependent.0) else {
            diags.push(Diagnostic::error(
                DiagCode::Undeclared,
                format!("undeclared variable `{}`", t.dependent.0),
                t.dependent.1,
            ));
            continue;
        };
        if !matches!(dep_decl.role, VarRole::Term | VarRole::Controlled) {
            diags.push(Diagnostic::error(
                DiagCode::Type,
                format!(
                    "`{}` is {}; only terms and controlled variables have event or condition tables",
                    dep_decl.name, dep_decl.role
                ),
                t.dependent.1,
            ));
            continue;
        }
        let mode_class = match &t.mode_class {
            None => None,
            Some((name, span)) => match ctx.lookup(name) {
                Some((id, d)) if d.role == VarRole::ModeClass => Some(id),
                Some(_) => {
                    diags.push(Diagnostic::error(
                        DiagCode::Type,
                        format!("`{name}` is not a mode class"),
                        *span,
                    ));
                    continue;
                }
                None => {
                    diags.push(Diagnostic::error(
                        DiagCode::Undeclared,
                        format!("undeclared mode class `{name}`"),
                        *span,
                    ));
                    continue;
                }
            },
        };
        let mut ev_rows = Vec::new();
        let mut cd_rows = Vec::new();
        for row in &t.rows {
            let modes = match (&row.modes, mode_class) {
                (None, _) => Some(ModeSet::any()),
                (Some(names), Some(mc)) => {
                    let ty = &ctx.vars[mc.0].ty;
                    let resolved: Vec<_> = names
                        .iter()
                        .filter_map(|m| resolve_mode(ty, m, &mut diags))
                        .collect();
                    (resolved.len() == names.len()).then_some(ModeSet(Some(resolved)))
                }
                (Some(_), None) => {
                    diags.push(Diagnostic::error(
                        DiagCode::Syntax,
                        "a row names modes but the table has no `for <modeclass>`",
                        row.span,
                    ));
                    None
                }
            };
            let value = match ctx.resolve_member_value(&dep_decl.ty, &row.value, row.value_span) {
                Ok(v) => Some(v),
                Err(d) => {
                    diags.push(d);
                    None
                }
            };
            if t.is_event {
                let event = row.event.as_ref().and_then(|e| match ctx.resolve_event(e) {
                    Ok(e) => Some(e),
                    Err(d) => {
                        diags.push(d);
                        None
                    }
                });
                if let (Some(modes), Some(event), Some(value)) = (modes, event, value) {
                    ev_rows.push(EventRow {
                        modes,
                        event,
                        value,
                        span: row.span,
                    });
                }
            } else {
                let cond = row.cond.as_ref().and_then(|c| match ctx.resolve_cond(c) {
                    Ok(c) => Some(c),
                    Err(d) => {
                        diags.push(d);
                        None
                    }
                });
                if let (Some(modes), Some(cond), Some(value)) = (modes, cond, value) {
                    cd_rows.push(CondRow {
                        modes,
                        cond,
                        value,
                        span: row.span,
                    });
                }
            }
        }
        if t.is_event {
            event_tables.push(EventTable {
                dependent: dep_id,
                mode_class,
                rows: ev_rows,
                span: t.span,
            });
        } else {
            cond_tables.push(ConditionTable {
                dependent: dep_id,
                mode_class,
                rows: cd_rows,
                no_change_default: t.no_change_default,
                span: t.span,
            });
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    // Every term and controlled variable is defined by exactly one table.
    let mut defined: BTreeMap<VarId, usize> = BTreeMap::new();
    for t in &event_tables {
        *defined.entry(t.dependent).or_default() += 1;
    }
    for t in &cond_tables {
        *defined.entry(t.dependent).or_default() += 1;
    }
    for (i, v) in vars.iter().enumerate() {
        if matches!(v.role, VarRole::Term | VarRole::Controlled) {
            match defined.get(&VarId(i)).copied().unwrap_or(0) {
                0 => diags.push(Diagnostic::error(
                    DiagCode::Type,
                    format!("{} `{}` has no defining table", v.role, v.name),
                    v.span,
                )),
                1 => {}
                n => diags.push(Diagnostic::error(
                    DiagCode::Duplicate,
                    format!("`{}` is defined by {n} tables", v.name),
                    v.span,
                )),
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut spec = SpecModel {
        name: raw.name,
        constants,
        types,
        vars,
        mode_tables,
        event_tables,
        cond_tables,
        update_order: Vec::new(),
    };
    match compute_update_order(&spec) {
        Ok(order) => spec.update_order = order,
        Err(d) => return Err(vec![d]),
    }
    Ok(spec)
}

fn reserved_diag(name: &str, span: SourceSpan) -> Diagnostic {
    Diagnostic::error(
        DiagCode::Syntax,
        format!("`{name}` is a reserved word"),
        span,
    )
}

fn build_type(
    owner: &str,
    raw: &RawType,
    named: &[TypeDef],
    span: SourceSpan,
) -> Result<TypeDef, Diagnostic> {
    match raw {
        RawType::Bool => Ok(TypeDef {
            name: owner.to_string(),
            kind: TypeKind::Bool,
        }),
        RawType::Int(lo, hi) => {
            if lo > hi {
                return Err(Diagnostic::error(
                    DiagCode::Type,
                    format!("empty integer range {lo} .. {hi}"),
                    span,
                ));
            }
            Ok(TypeDef {
                name: owner.to_string(),
                kind: TypeKind::Int { lo: *lo, hi: *hi },
            })
        }
        RawType::Enum(values) => {
            let mut names = Vec::new();
            for (v, vspan) in values {
                if is_reserved(v) {
                    return Err(reserved_diag(v, *vspan));
                }
                if names.contains(v) {
                    return Err(Diagnostic::error(
                        DiagCode::Duplicate,
                        format!("enum literal `{v}` repeated"),
                        *vspan,
                    ));
                }
                names.push(v.clone());
            }
            Ok(TypeDef {
                name: owner.to_string(),
                kind: TypeKind::Enum { values: names },
            })
        }
        RawType::Named(name, nspan) => named
            .iter()
            .find(|t| &t.name == name)
            .map(|t| TypeDef {
                name: name.clone(),
                kind: t.kind.clone(),
            })
            .ok_or_else(|| {
                Diagnostic::error(
                    DiagCode::Undeclared,
                    format!("undeclared type `{name}`"),
                    *nspan,
                )
            }),
    }
}

fn resolve_mode(
    ty: &TypeDef,
    name: &(String, SourceSpan),
    diags: &mut Vec<Diagnostic>,
) -> Option<Value> {
    match ty.enum_index(&name.0) {
        Some(i) => Some(Value::Enum(i)),
        None => {
            diags.push(Diagnostic::error(
                DiagCode::Type,
                format!("`{}` is not a mode of {}", name.0, ty.name),
                name.1,
            ));
            None
        }
    }
}

/// Orders dependent variables so that each table only reads new values that
/// have already been computed. Rejects cyclic dependencies.
fn compute_update_order(spec: &SpecModel) -> Result<Vec<(VarId, TableRef)>, Diagnostic> {
    let mut nodes: Vec<(VarId, TableRef)> = Vec::new();
    for (i, t) in spec.mode_tables.iter().enumerate() {
        nodes.push((t.mode_class, TableRef::Mode(i)));
    }
    for (i, t) in spec.event_tables.iter().enumerate() {
        nodes.push((t.dependent, TableRef::Event(i)));
    }
    for (i, t) in spec.cond_tables.iter().enumerate() {
        nodes.push((t.dependent, TableRef::Cond(i)));
    }
    nodes.sort_by_key(|(v, _)| *v);

    let is_dependent = |v: VarId| nodes.iter().any(|(n, _)| *n == v);

    // reads[k] = dependent variables whose new value node k's table reads.
    let mut reads: Vec<Vec<VarId>> = Vec::new();
    for (_, table) in &nodes {
        let mut vars = Vec::new();
        match table {
            TableRef::Mode(i) => {
                for row in &spec.mode_tables[*i].rows {
                    row.event.new_state_reads(&mut vars);
                }
            }
            TableRef::Event(i) => {
                for row in &spec.event_tables[*i].rows {
                    row.event.new_state_reads(&mut vars);
                }
            }
            TableRef::Cond(i) => {
                let t = &spec.cond_tables[*i];
                for row in &t.rows {
                    row.cond.variables(&mut vars);
                }
                if let Some(mc) = t.mode_class {
                    vars.push(mc);
                }
            }
        }
        vars.retain(|v| is_dependent(*v));
        vars.sort();
        vars.dedup();
        reads.push(vars);
    }

    // Kahn's algorithm, lowest variable id first for a deterministic order.
    let mut order = Vec::new();
    let mut placed: Vec<bool> = vec![false; nodes.len()];
    while order.len() < nodes.len() {
        let next = nodes.iter().enumerate().position(|(k, _)| {
            !placed[k]
                && reads[k].iter().all(|r| {
                    nodes
                        .iter()
                        .enumerate()
                        .all(|(j, (v, _))| *v != *r || placed[j])
                })
        });
        match next {
            Some(k) => {
                placed[k] = true;
                order.push(nodes[k]);
            }
            None => {
                let stuck: Vec<(usize, &(VarId, TableRef))> = nodes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !placed[*k])
                    .collect();
                let names: Vec<String> = stuck
                    .iter()
                    .map(|(_, (v, _))| spec.var(*v).name.clone())
                    .collect();
                let span = match stuck[0].1 .1 {
                    TableRef::Mode(i) => spec.mode_tables[i].span,
                    TableRef::Event(i) => spec.event_tables[i].span,
                    TableRef::Cond(i) => spec.cond_tables[i].span,
                };
                return Err(Diagnostic::error(
                    DiagCode::Cycle,
                    format!(
                        "table dependencies form a cycle involving: {}",
                        names.join(", ")
                    ),
                    span,
                ));
            }
        }
    }
    Ok(order)
}
