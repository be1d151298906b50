//! Canonical pretty-printer for [`SpecModel`].
//!
//! `parse_spec(render_spec(s))` reconstructs a model equal to `s` up to
//! source spans. Sections are emitted in canonical order: constants, types,
//! monitored, terms, controlled, mode classes, event tables, condition
//! tables.

use crate::model::{
    ChangeArg, CondExpr, ConditionTable, Constant, EventExpr, EventTable, ModeSet,
    ModeTransitionTable, SpecModel, Trigger, TypeDef, TypeKind, Value, VarId, VarRole,
};
use std::fmt::Write;

pub fn render_spec(spec: &SpecModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "spec {}", spec.name);

    if !spec.constants.is_empty() {
        let _ = writeln!(out, "\nconstants {{");
        for (name, value) in &spec.constants {
            let v = match value {
                Constant::Int(n) => n.to_string(),
                Constant::EnumLiteral(l) => l.clone(),
            };
            let _ = writeln!(out, "  {name} = {v}");
        }
        let _ = writeln!(out, "}}");
    }

    if !spec.types.is_empty() {
        let _ = writeln!(out, "\ntypes {{");
        for ty in &spec.types {
            let _ = writeln!(out, "  {} : {}", ty.name, render_type_kind(ty));
        }
        let _ = writeln!(out, "}}");
    }

    for (role, keyword) in [
        (VarRole::Monitored, "monitored"),
        (VarRole::Term, "terms"),
        (VarRole::Controlled, "controlled"),
    ] {
        let group: Vec<_> = spec.vars.iter().filter(|v| v.role == role).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(out, "\n{keyword} {{");
        for v in group {
            let ty_text = if spec
                .types
                .iter()
                .any(|t| t.name == v.ty.name && t.kind == v.ty.kind)
            {
                v.ty.name.clone()
            } else {
                render_type_kind(&v.ty)
            };
            let _ = writeln!(
                out,
                "  {} : {} initial {}",
                v.name,
                ty_text,
                render_value(&v.ty, v.initial)
            );
        }
        let _ = writeln!(out, "}}");
    }

    for table in &spec.mode_tables {
        render_mode_table(&mut out, spec, table);
    }
    for table in &spec.event_tables {
        render_event_table(&mut out, spec, table);
    }
    for table in &spec.cond_tables {
        render_cond_table(&mut out, spec, table);
    }
    out
}

fn render_type_kind(ty: &TypeDef) -> String {
    match &ty.kind {
        TypeKind::Bool => "bool".to_string(),
        TypeKind::Int { lo, hi } => format!("int {lo} .. {hi}"),
        TypeKind::Enum { values } => format!("enum {{ {} }}", values.join(", ")),
    }
}

fn render_value(ty: &TypeDef, value: Value) -> String {
    match (value, &ty.kind) {
        (Value::Bool(b), _) => b.to_string(),
        (Value::Int(n), _) => n.to_string(),
        (Value::Enum(i), TypeKind::Enum { values }) => values[i as usize].clone(),
        (Value::Enum(i), _) => format!("#{i}"),
    }
}

fn render_mode_table(out: &mut String, spec: &SpecModel, table: &ModeTransitionTable) {
    let decl = spec.var(table.mode_class);
    let TypeKind::Enum { values } = &decl.ty.kind else {
        unreachable!("mode class type is an enumeration");
    };
    let _ = writeln!(out, "\nmodeclass {} {{", decl.name);
    let _ = writeln!(out, "  modes {{ {} }}", values.join(", "));
    let _ = writeln!(
        out,
        "  initial {}",
        render_value(&decl.ty, decl.initial)
    );
    for row in &table.rows {
        let _ = writeln!(
            out,
            "  {} -- {} --> {}",
            render_value(&decl.ty, row.old_mode),
            render_event(spec, &row.event),
            render_value(&decl.ty, row.new_mode)
        );
    }
    let _ = writeln!(out, "}}");
}

fn table_header(spec: &SpecModel, keyword: &str, dependent: VarId, mode_class: Option<VarId>) -> String {
    match mode_class {
        None => format!("{keyword} {}", spec.var(dependent).name),
        Some(mc) => format!(
            "{keyword} {} for {}",
            spec.var(dependent).name,
            spec.var(mc).name
        ),
    }
}

fn render_mode_set(spec: &SpecModel, mode_class: Option<VarId>, modes: &ModeSet) -> String {
    match (&modes.0, mode_class) {
        (None, _) => "*".to_string(),
        (Some(values), Some(mc)) => {
            let ty = &spec.var(mc).ty;
            values
                .iter()
                .map(|m| render_value(ty, *m))
                .collect::<Vec<_>>()
                .join(", ")
        }
        (Some(_), None) => unreachable!("named mode set without a governing mode class"),
    }
}

fn render_event_table(out: &mut String, spec: &SpecModel, table: &EventTable) {
    let _ = writeln!(
        out,
        "\n{} {{",
        table_header(spec, "eventtable", table.dependent, table.mode_class)
    );
    let dep_ty = &spec.var(table.dependent).ty;
    for row in &table.rows {
        let _ = writeln!(
            out,
            "  {} -- {} --> {}",
            render_mode_set(spec, table.mode_class, &row.modes),
            render_event(spec, &row.event),
            render_value(dep_ty, row.value)
        );
    }
    let _ = writeln!(out, "}}");
}

fn render_cond_table(out: &mut String, spec: &SpecModel, table: &ConditionTable) {
    let _ = writeln!(
        out,
        "\n{} {{",
        table_header(spec, "condtable", table.dependent, table.mode_class)
    );
    if table.no_change_default {
        let _ = writeln!(out, "  default nochange");
    }
    let dep_ty = &spec.var(table.dependent).ty;
    for row in &table.rows {
        let _ = writeln!(
            out,
            "  {} -- {} --> {}",
            render_mode_set(spec, table.mode_class, &row.modes),
            render_cond(spec, &row.cond),
            render_value(dep_ty, row.value)
        );
    }
    let _ = writeln!(out, "}}");
}

pub fn render_event(spec: &SpecModel, event: &EventExpr) -> String {
    let trigger = match &event.trigger {
        Trigger::BecomesTrue(c) => format!("@T({})", render_cond(spec, c)),
        Trigger::BecomesFalse(c) => format!("@F({})", render_cond(spec, c)),
        Trigger::Changes(ChangeArg::Var(v)) => format!("@C({})", spec.var(*v).name),
        Trigger::Changes(ChangeArg::Formula(c)) => format!("@C({})", render_cond(spec, c)),
    };
    match &event.when {
        None => trigger,
        Some(when) => format!("{trigger} when {}", render_cond(spec, when)),
    }
}

fn prec(expr: &CondExpr) -> u8 {
    match expr {
        CondExpr::Or(..) => 1,
        CondExpr::And(..) => 2,
        CondExpr::Not(..) => 3,
        _ => 4,
    }
}

pub fn render_cond(spec: &SpecModel, expr: &CondExpr) -> String {
    render_prec(spec, expr, 0)
}

fn render_prec(spec: &SpecModel, expr: &CondExpr, parent: u8) -> String {
    let mine = prec(expr);
    let text = match expr {
        CondExpr::Lit(b) => b.to_string(),
        CondExpr::Var(v) => spec.var(*v).name.clone(),
        CondExpr::Cmp { var, op, rhs } => {
            let rhs_text = match &rhs.symbol {
                Some(name) => name.clone(),
                None => render_value(&spec.var(*var).ty, rhs.value),
            };
            format!("{} {} {}", spec.var(*var).name, op.as_str(), rhs_text)
        }
        CondExpr::Not(inner) => format!("NOT {}", render_prec(spec, inner, mine)),
        // A same-precedence right operand keeps its parentheses so the
        // printed text reparses to the identical tree.
        CondExpr::And(a, b) => format!(
            "{} AND {}",
            render_prec(spec, a, mine),
            render_prec(spec, b, mine + 1)
        ),
        CondExpr::Or(a, b) => format!(
            "{} OR {}",
            render_prec(spec, a, mine),
            render_prec(spec, b, mine + 1)
        ),
    };
    if mine < parent {
        format!("({text})")
    } else {
        text
    }
}
