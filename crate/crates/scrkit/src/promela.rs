//! Promela emission.
//!
//! The emitted model is a single self-contained file: variable declarations
//! (enumerations as prefixed `mtype` constants), an atomic step that saves
//! old values, picks one monitored change nondeterministically and applies
//! the tables in dependency order, the scenario's sentences with a program
//! counter advanced per sentence, and a final assertion implicating the
//! check property at pc = n+1. Runs filtered out by a test or a guard jump
//! to a terminal label, so they end without reaching the accepting pc.
//!
//! Emission is a pure function: identical inputs give byte-identical text.
//! Spec identifiers that collide with Promela keywords or generated names
//! are suffixed with `_v`; the mapping is recorded in the header comment.

use crate::diag::Diagnostic;
use crate::model::{
    check_consistency, ChangeArg, CmpOp, CondExpr, Constant, EventExpr, ModeSet, SpecModel,
    TableRef, Trigger, TypeKind, Value, VarId,
};
use crate::scenario::{Guard, Program, Scenario, Sentence};
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone)]
pub struct EmittedModel {
    pub text: String,
    /// Number of pc values, `n + 1` for `n` sentences.
    pub pc_count: usize,
    /// 1-based line of the generated assertion.
    pub assertion_line: usize,
}

impl EmittedModel {
    /// Structural sanity of the emitted text, used where no external checker
    /// is installed: balanced delimiters, exactly one assertion, one
    /// proctype.
    pub fn structural_check(&self) -> Result<(), String> {
        let mut depth_brace = 0i64;
        let mut depth_paren = 0i64;
        for (i, line) in self.text.lines().enumerate() {
            for c in line.chars() {
                match c {
                    '{' => depth_brace += 1,
                    '}' => depth_brace -= 1,
                    '(' => depth_paren += 1,
                    ')' => depth_paren -= 1,
                    _ => {}
                }
                if depth_brace < 0 || depth_paren < 0 {
                    return Err(format!("unbalanced delimiter on line {}", i + 1));
                }
            }
        }
        if depth_brace != 0 || depth_paren != 0 {
            return Err("unbalanced delimiters at end of file".into());
        }
        let asserts = self.text.matches("assert(").count();
        if asserts != 1 {
            return Err(format!("expected exactly one assertion, found {asserts}"));
        }
        if self.text.matches("proctype").count() != 1 {
            return Err("expected exactly one proctype".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmitOptions {
    /// Emit iterations as `k` optional copies of the body instead of a
    /// nondeterministic loop.
    pub unroll: Option<usize>,
}

const PROMELA_KEYWORDS: &[&str] = &[
    "active", "assert", "atomic", "bit", "bool", "break", "byte", "chan", "d_step", "do", "else",
    "empty", "enabled", "eval", "false", "fi", "for", "full", "goto", "hidden", "if", "in",
    "init", "inline", "int", "len", "local", "mtype", "nempty", "never", "nfull", "np_", "od",
    "of", "pc_value", "pid", "printf", "printm", "priority", "proctype", "provided", "run",
    "select", "short", "skip", "timeout", "true", "typedef", "unless", "unsigned", "xr", "xs",
];

const GENERATED: &[&str] = &["pc", "done", "save_old", "pick_input", "apply_tables", "scr"];

struct Names {
    used: HashSet<String>,
    vars: Vec<String>,
    olds: Vec<String>,
    /// Per variable, per enum literal index.
    literals: Vec<Vec<String>>,
    consts: BTreeMap<String, String>,
    mapping: Vec<(String, String)>,
}

impl Names {
    fn build(spec: &SpecModel) -> Names {
        let mut names = Names {
            used: PROMELA_KEYWORDS
                .iter()
                .chain(GENERATED)
                .map(|s| s.to_string())
                .collect(),
            vars: Vec::new(),
            olds: Vec::new(),
            literals: Vec::new(),
            consts: BTreeMap::new(),
            mapping: Vec::new(),
        };
        for decl in &spec.vars {
            let n = names.claim(&decl.name);
            names.vars.push(n);
        }
        for i in 0..spec.vars.len() {
            let n = names.claim(&format!("old_{}", names.vars[i]));
            names.olds.push(n);
        }
        for decl in &spec.vars {
            let lits = match &decl.ty.kind {
                TypeKind::Enum { values } => values
                    .iter()
                    .map(|v| names.claim(&format!("{}_{}", decl.name, v)))
                    .collect(),
                _ => Vec::new(),
            };
            names.literals.push(lits);
        }
        for (name, value) in &spec.constants {
            if matches!(value, Constant::Int(_)) {
                let n = names.claim(name);
                names.consts.insert(name.clone(), n);
            }
        }
        names
    }

    fn claim(&mut self, wanted: &str) -> String {
        let mut name = wanted.to_string();
        while self.used.contains(&name) {
            name.push_str("_v");
        }
        self.used.insert(name.clone());
        if name != wanted {
            self.mapping.push((wanted.to_string(), name.clone()));
        }
        name
    }

    fn value(&self, var: VarId, value: Value) -> String {
        match value {
            Value::Bool(b) => b.to_string(),
            Value::Int(n) => n.to_string(),
            Value::Enum(i) => self.literals[var.0][i as usize].clone(),
        }
    }
}

struct Emitter {
    out: String,
    line: usize,
    indent: usize,
}

impl Emitter {
    fn new() -> Self {
        Self {
            out: String::new(),
            line: 1,
            indent: 0,
        }
    }

    fn push(&mut self, text: &str) {
        if text.is_empty() {
            self.out.push('\n');
        } else {
            for _ in 0..self.indent {
                self.out.push_str("  ");
            }
            self.out.push_str(text);
            self.out.push('\n');
        }
        self.line += 1;
    }
}

/// Emits a Promela model for `spec` instrumented with `scenario`. The
/// specification must be consistency-clean; error diagnostics are returned
/// instead of a model otherwise.
pub fn emit_promela(
    spec: &SpecModel,
    scenario: &Scenario,
    options: &EmitOptions,
) -> Result<EmittedModel, Vec<Diagnostic>> {
    let errors: Vec<Diagnostic> = check_consistency(spec)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    // An empty input alphabet would leave the nondeterministic choice with
    // no enabled branch, which Spin reads as deadlock rather than "no step".
    if spec.monitored().all(|(_, d)| d.ty.cardinality() < 2) {
        return Err(vec![Diagnostic::error(
            crate::diag::DiagCode::Type,
            "no monitored variable can change; the step relation is empty",
            Default::default(),
        )]);
    }

    let names = Names::build(spec);
    let mut e = Emitter::new();

    e.push(&format!("/* {} — generated SCR step model", spec.name));
    e.push(" * with scenario program-counter instrumentation.");
    if !names.mapping.is_empty() {
        e.push(" * Renamed identifiers:");
        for (from, to) in &names.mapping {
            e.push(&format!(" *   {from} -> {to}"));
        }
    }
    e.push(" */");
    e.push("");

    for (name, value) in &spec.constants {
        if let Constant::Int(n) = value {
            e.push(&format!("#define {} {n}", names.consts[name]));
        }
    }

    let all_literals: Vec<&String> = names.literals.iter().flatten().collect();
    if !all_literals.is_empty() {
        let joined = all_literals
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        e.push(&format!("mtype = {{ {joined} }};"));
    }
    e.push("");

    for (i, decl) in spec.vars.iter().enumerate() {
        let var = VarId(i);
        let ty = promela_type(&decl.ty.kind);
        let init = names.value(var, decl.initial);
        e.push(&format!("{ty} {} = {init};", names.vars[i]));
    }
    for (i, decl) in spec.vars.iter().enumerate() {
        e.push(&format!("{} {};", promela_type(&decl.ty.kind), names.olds[i]));
    }
    e.push("byte pc = 1;");
    e.push("");

    e.push("inline save_old() {");
    e.indent += 1;
    for i in 0..spec.vars.len() {
        e.push(&format!("{} = {};", names.olds[i], names.vars[i]));
    }
    e.indent -= 1;
    e.push("}");
    e.push("");

    e.push("inline pick_input() {");
    e.indent += 1;
    e.push("if");
    for (var, decl) in spec.monitored() {
        for value in decl.ty.values() {
            let v = names.value(var, value);
            let name = &names.vars[var.0];
            e.push(&format!(":: {name} != {v} -> {name} = {v}"));
        }
    }
    e.push("fi");
    e.indent -= 1;
    e.push("}");
    e.push("");

    emit_tables(&mut e, spec, &names);

    e.push("active proctype scr() {");
    e.indent += 1;
    let needs_done = scenario.sentences.iter().any(|s| {
        matches!(s, Sentence::Test(_) | Sentence::GuardedChange(_))
    });
    emit_program(&mut e, scenario, &names, &scenario.program, options);
    let n = scenario.sentences.len();
    let assertion_line = e.line;
    e.push(&format!(
        "assert((pc == {} -> ({}) : 1));",
        n + 1,
        cond_text(&names, &scenario.check, false)
    ));
    if needs_done {
        e.indent -= 1;
        e.push("done:");
        e.indent += 1;
        e.push("skip");
    }
    e.indent -= 1;
    e.push("}");

    let model = EmittedModel {
        text: e.out,
        pc_count: n + 1,
        assertion_line,
    };
    debug_assert!(model.structural_check().is_ok());
    Ok(model)
}

fn promela_type(kind: &TypeKind) -> &'static str {
    match kind {
        TypeKind::Bool => "bool",
        TypeKind::Enum { .. } => "mtype",
        TypeKind::Int { lo, hi } => {
            if *lo >= 0 && *hi <= 255 {
                "byte"
            } else if *lo >= i16::MIN as i64 && *hi <= i16::MAX as i64 {
                "short"
            } else {
                "int"
            }
        }
    }
}

fn emit_tables(e: &mut Emitter, spec: &SpecModel, names: &Names) {
    e.push("inline apply_tables() {");
    e.indent += 1;
    let total = spec.update_order.len();
    for (idx, (var, table)) in spec.update_order.iter().enumerate() {
        let terminator = if idx + 1 == total { "fi" } else { "fi;" };
        match table {
            TableRef::Mode(i) => {
                let t = &spec.mode_tables[*i];
                e.push(&format!("/* mode transition table: {} */", spec.var(*var).name));
                e.push("if");
                for row in &t.rows {
                    let old_mode = format!(
                        "{} == {}",
                        names.olds[t.mode_class.0],
                        names.value(t.mode_class, row.old_mode)
                    );
                    let event = event_text(names, &row.event);
                    e.push(&format!(
                        ":: ({old_mode}) && {event} -> {} = {}",
                        names.vars[t.mode_class.0],
                        names.value(t.mode_class, row.new_mode)
                    ));
                }
                e.push(":: else -> skip");
                e.push(terminator);
            }
            TableRef::Event(i) => {
                let t = &spec.event_tables[*i];
                e.push(&format!("/* event table: {} */", spec.var(*var).name));
                e.push("if");
                for row in &t.rows {
                    let mode = mode_guard(names, t.mode_class, &row.modes, true);
                    let event = event_text(names, &row.event);
                    e.push(&format!(
                        ":: {mode}{event} -> {} = {}",
                        names.vars[t.dependent.0],
                        names.value(t.dependent, row.value)
                    ));
                }
                e.push(":: else -> skip");
                e.push(terminator);
            }
            TableRef::Cond(i) => {
                let t = &spec.cond_tables[*i];
                e.push(&format!("/* condition table: {} */", spec.var(*var).name));
                e.push("if");
                for row in &t.rows {
                    let mode = mode_guard(names, t.mode_class, &row.modes, false);
                    let cond = cond_text(names, &row.cond, false);
                    e.push(&format!(
                        ":: {mode}({cond}) -> {} = {}",
                        names.vars[t.dependent.0],
                        names.value(t.dependent, row.value)
                    ));
                }
                e.push(":: else -> skip");
                e.push(terminator);
            }
        }
    }
    e.indent -= 1;
    e.push("}");
    e.push("");
}

/// Mode-group membership test; old state for event tables, new state for
/// condition tables. Empty when the row applies in every mode.
fn mode_guard(
    names: &Names,
    mode_class: Option<VarId>,
    modes: &ModeSet,
    old: bool,
) -> String {
    let (Some(mc), Some(values)) = (mode_class, &modes.0) else {
        return String::new();
    };
    let name = if old {
        &names.olds[mc.0]
    } else {
        &names.vars[mc.0]
    };
    let tests: Vec<String> = values
        .iter()
        .map(|m| format!("{name} == {}", names.value(mc, *m)))
        .collect();
    format!("({}) && ", tests.join(" || "))
}

fn event_text(names: &Names, event: &EventExpr) -> String {
    let trigger = match &event.trigger {
        Trigger::BecomesTrue(c) => format!(
            "(!({}) && ({}))",
            cond_text(names, c, true),
            cond_text(names, c, false)
        ),
        Trigger::BecomesFalse(c) => format!(
            "(({}) && !({}))",
            cond_text(names, c, true),
            cond_text(names, c, false)
        ),
        Trigger::Changes(ChangeArg::Var(v)) => {
            format!("({} != {})", names.olds[v.0], names.vars[v.0])
        }
        Trigger::Changes(ChangeArg::Formula(c)) => format!(
            "(({}) != ({}))",
            cond_text(names, c, true),
            cond_text(names, c, false)
        ),
    };
    match &event.when {
        None => trigger,
        Some(w) => format!("({trigger} && ({}))", cond_text(names, w, true)),
    }
}

fn cond_text(names: &Names, cond: &CondExpr, old: bool) -> String {
    let var_name = |v: VarId| -> &String {
        if old {
            &names.olds[v.0]
        } else {
            &names.vars[v.0]
        }
    };
    match cond {
        CondExpr::Lit(b) => b.to_string(),
        CondExpr::Var(v) => var_name(*v).clone(),
        CondExpr::Cmp { var, op, rhs } => {
            let op_text = match op {
                CmpOp::Eq => "==",
                CmpOp::Ne => "!=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            let rhs_text = match (&rhs.symbol, rhs.value) {
                (Some(symbol), _) if names.consts.contains_key(symbol) => {
                    names.consts[symbol].clone()
                }
                (_, value) => names.value(*var, value),
            };
            format!("{} {op_text} {rhs_text}", var_name(*var))
        }
        CondExpr::Not(inner) => format!("!({})", cond_text(names, inner, old)),
        CondExpr::And(a, b) => format!(
            "({} && {})",
            cond_text(names, a, old),
            cond_text(names, b, old)
        ),
        CondExpr::Or(a, b) => format!(
            "({} || {})",
            cond_text(names, a, old),
            cond_text(names, b, old)
        ),
    }
}

fn first_sentence(p: &Program) -> usize {
    match p {
        Program::Sentence(i) => *i,
        Program::Seq(a, _) => first_sentence(a),
        Program::Star(body) => first_sentence(body),
    }
}

fn after_last_sentence(p: &Program) -> usize {
    match p {
        Program::Sentence(i) => i + 1,
        Program::Seq(_, b) => after_last_sentence(b),
        Program::Star(body) => after_last_sentence(body),
    }
}

fn emit_program(
    e: &mut Emitter,
    scenario: &Scenario,
    names: &Names,
    program: &Program,
    options: &EmitOptions,
) {
    match program {
        Program::Sentence(id) => {
            emit_sentence(e, names, &scenario.sentences[*id], *id);
            e.push(&format!("pc = {};", id + 2));
        }
        Program::Seq(a, b) => {
            emit_program(e, scenario, names, a, options);
            emit_program(e, scenario, names, b, options);
        }
        Program::Star(body) => {
            let entry = first_sentence(body) + 1;
            let exit = after_last_sentence(body) + 1;
            match options.unroll {
                None => {
                    e.push("/* iteration: zero or more repetitions */");
                    e.push("do");
                    e.push(":: break");
                    e.push("::");
                    e.indent += 1;
                    emit_program(e, scenario, names, body, options);
                    e.push(&format!("pc = {entry};"));
                    e.indent -= 1;
                    e.push("od;");
                }
                Some(k) => {
                    e.push(&format!("/* iteration: unrolled {k} times */"));
                    for _ in 0..k {
                        e.push("if");
                        e.push(":: skip");
                        e.push("::");
                        e.indent += 1;
                        emit_program(e, scenario, names, body, options);
                        e.push(&format!("pc = {entry};"));
                        e.indent -= 1;
                        e.push("fi;");
                    }
                }
            }
            e.push(&format!("pc = {exit};"));
        }
    }
}

fn emit_sentence(e: &mut Emitter, names: &Names, sentence: &Sentence, id: usize) {
    match sentence {
        Sentence::Test(f) => {
            e.push(&format!("/* sentence {}: test */", id + 1));
            e.push("if");
            e.push(&format!(":: ({}) -> skip", cond_text(names, f, false)));
            e.push(":: else -> goto done");
            e.push("fi;");
        }
        Sentence::StateChange => {
            e.push(&format!("/* sentence {}: stateChange */", id + 1));
            e.push("atomic { save_old(); pick_input(); apply_tables() };");
        }
        Sentence::GuardedChange(guard) => {
            e.push(&format!("/* sentence {}: guarded stateChange */", id + 1));
            e.push("atomic {");
            e.indent += 1;
            e.push("save_old(); pick_input(); apply_tables();");
            let guard_text = match guard {
                Guard::Event(ev) => event_text(names, ev),
                Guard::Cond(c) => format!("({})", cond_text(names, c, false)),
            };
            e.push("if /* guard */");
            e.push(&format!(":: {guard_text} -> skip"));
            e.push(":: else -> goto done");
            e.push("fi");
            e.indent -= 1;
            e.push("};");
        }
    }
}
