//! Random generation of specifications, formulas and scenario programs.
//!
//! Everything is generated as source text and fed through the parsers, so
//! generated cases exercise the same paths as user input. Failure messages
//! should include the generated text: it is the whole reproduction case.

use rand::Rng;

pub type TestRng = rand_chacha::ChaCha8Rng;
use scrkit::model::{SpecModel, TypeKind, VarRole};
use scrkit::scenario::{parse_scenario, Scenario};

/// Shape of a generated specification.
#[derive(Debug, Clone)]
pub struct SpecShape {
    /// Monitored boolean variables (criterion-style engine specs).
    pub monitored_bools: usize,
    pub modes: usize,
    pub mode_rows: usize,
    /// Adds integer and enumeration variables, constants, a term and a
    /// controlled variable for parser round-trip coverage.
    pub rich: bool,
}

impl SpecShape {
    pub fn engine(rng: &mut TestRng) -> Self {
        Self {
            monitored_bools: rng.gen_range(1..=2),
            modes: rng.gen_range(2..=3),
            mode_rows: rng.gen_range(1..=4),
            rich: false,
        }
    }

    pub fn rich(rng: &mut TestRng) -> Self {
        Self {
            monitored_bools: rng.gen_range(1..=2),
            modes: rng.gen_range(2..=3),
            mode_rows: rng.gen_range(0..=4),
            rich: true,
        }
    }
}

const MODES: [&str; 3] = ["M0", "M1", "M2"];
const ENUM_LITS: [&str; 3] = ["E0", "E1", "E2"];

pub fn gen_spec_text(rng: &mut TestRng, shape: &SpecShape) -> String {
    let mut out = String::from("spec Generated\n");
    let bools: Vec<String> = (0..shape.monitored_bools).map(|i| format!("x{i}")).collect();

    if shape.rich {
        out.push_str("constants { K = 2 }\n");
        out.push_str("types { TE : enum { E0, E1, E2 } }\n");
    }

    out.push_str("monitored {\n");
    for b in &bools {
        let init = if rng.gen_bool(0.5) { "true" } else { "false" };
        out.push_str(&format!("  {b} : bool initial {init}\n"));
    }
    if shape.rich {
        out.push_str(&format!("  n : int 0 .. 3 initial {}\n", rng.gen_range(0..=3)));
        out.push_str(&format!(
            "  e : TE initial {}\n",
            ENUM_LITS[rng.gen_range(0..ENUM_LITS.len())]
        ));
    }
    out.push_str("}\n");

    if shape.rich && rng.gen_bool(0.7) {
        out.push_str("terms { t : bool initial false }\n");
        out.push_str("eventtable t {\n");
        out.push_str(&format!(
            "  * -- @T({}) --> true\n",
            gen_atom_over(rng, &bools, shape, true)
        ));
        out.push_str(&format!(
            "  * -- @F({}) --> false\n",
            gen_atom_over(rng, &bools, shape, true)
        ));
        out.push_str("}\n");
    }

    let modes = &MODES[..shape.modes];
    out.push_str(&format!("modeclass mc {{\n  modes {{ {} }}\n", modes.join(", ")));
    out.push_str(&format!("  initial {}\n", modes[rng.gen_range(0..modes.len())]));
    for _ in 0..shape.mode_rows {
        let old = modes[rng.gen_range(0..modes.len())];
        let new = modes[rng.gen_range(0..modes.len())];
        out.push_str(&format!(
            "  {old} -- {} --> {new}\n",
            gen_event(rng, &bools, shape, false)
        ));
    }
    out.push_str("}\n");

    if shape.rich && rng.gen_bool(0.5) {
        out.push_str("controlled { c : enum { C0, C1 } initial C0 }\n");
        out.push_str("condtable c for mc {\n");
        if rng.gen_bool(0.5) {
            out.push_str("  default nochange\n");
        }
        for mode in modes {
            let value = if rng.gen_bool(0.5) { "C0" } else { "C1" };
            out.push_str(&format!("  {mode} -- {} --> {value}\n", gen_cond(rng, &bools, shape, 1)));
        }
        out.push_str("}\n");
    }
    out
}

/// `mc_ok` controls whether the atom may read the mode class: forbidden in
/// the mode table's own triggers (a self-dependency the parser rejects).
fn gen_atom_over(rng: &mut TestRng, bools: &[String], shape: &SpecShape, mc_ok: bool) -> String {
    let mut choices: Vec<String> = Vec::new();
    if !bools.is_empty() {
        let b = &bools[rng.gen_range(0..bools.len())];
        choices.push(b.clone());
        choices.push(format!("NOT {b}"));
    }
    if shape.rich {
        choices.push(format!("n >= {}", rng.gen_range(0..=3)));
        choices.push("n < K".to_string());
        choices.push(format!("e = {}", ENUM_LITS[rng.gen_range(0..ENUM_LITS.len())]));
    }
    if mc_ok {
        choices.push(format!("mc = {}", MODES[rng.gen_range(0..shape.modes)]));
    }
    if choices.is_empty() {
        choices.push("true".to_string());
    }
    choices[rng.gen_range(0..choices.len())].clone()
}

pub fn gen_cond(rng: &mut TestRng, bools: &[String], shape: &SpecShape, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.6) {
        return gen_atom_over(rng, bools, shape, true);
    }
    let a = gen_cond(rng, bools, shape, depth - 1);
    let b = gen_cond(rng, bools, shape, depth - 1);
    let op = if rng.gen_bool(0.5) { "AND" } else { "OR" };
    format!("({a} {op} {b})")
}

/// `trigger_mc_ok` is false for the mode table's own rows; the `when`
/// clause reads the old state and may always use the mode class.
fn gen_event(
    rng: &mut TestRng,
    bools: &[String],
    shape: &SpecShape,
    trigger_mc_ok: bool,
) -> String {
    let trigger = match rng.gen_range(0..3) {
        0 => format!("@T({})", gen_atom_over(rng, bools, shape, trigger_mc_ok)),
        1 => format!("@F({})", gen_atom_over(rng, bools, shape, trigger_mc_ok)),
        _ if !bools.is_empty() => format!("@C({})", bools[rng.gen_range(0..bools.len())]),
        _ => format!("@C({})", gen_atom_over(rng, bools, shape, trigger_mc_ok)),
    };
    if rng.gen_bool(0.4) {
        format!("{trigger} when {}", gen_atom_over(rng, bools, shape, true))
    } else {
        trigger
    }
}

/// Generates a specification that parses and is consistency-clean, retrying
/// as needed. Returns the text alongside the model for error reporting.
pub fn gen_clean_spec(rng: &mut TestRng) -> (String, SpecModel) {
    loop {
        let shape = SpecShape::engine(rng);
        let text = gen_spec_text(rng, &shape);
        let Ok(spec) = scrkit::parse_spec(&text) else {
            panic!("generated spec does not parse:\n{text}");
        };
        if scrkit::check_consistency(&spec)
            .iter()
            .all(|d| !d.is_error())
        {
            return (text, spec);
        }
    }
}

/// Generates any parse-valid rich specification (consistency not required).
pub fn gen_valid_spec(rng: &mut TestRng) -> (String, SpecModel) {
    let shape = SpecShape::rich(rng);
    let text = gen_spec_text(rng, &shape);
    match scrkit::parse_spec(&text) {
        Ok(spec) => (text, spec),
        Err(diags) => panic!("generated spec does not parse:\n{text}\n{diags:?}"),
    }
}

/// Random scenario of at most `max_sentences` sentences over `spec`,
/// returned as text plus the parsed form.
pub fn gen_scenario(
    rng: &mut TestRng,
    spec: &SpecModel,
    max_sentences: usize,
) -> (String, Scenario) {
    let bools: Vec<String> = spec
        .vars
        .iter()
        .filter(|v| v.role == VarRole::Monitored && v.ty.kind == TypeKind::Bool)
        .map(|v| v.name.clone())
        .collect();
    let shape = SpecShape {
        monitored_bools: bools.len(),
        modes: match &spec.vars.iter().find(|v| v.role == VarRole::ModeClass) {
            Some(mc) => mc.ty.cardinality(),
            None => 2,
        },
        mode_rows: 0,
        rich: false,
    };
    loop {
        let n = rng.gen_range(1..=max_sentences);
        let parts: Vec<(String, bool)> = (0..n).map(|_| gen_sentence(rng, &bools, &shape)).collect();
        let mut texts: Vec<String> = parts
            .iter()
            .map(|(text, changes)| {
                if *changes && rng.gen_bool(0.3) {
                    format!("{text}*")
                } else {
                    text.clone()
                }
            })
            .collect();
        // Occasionally star a whole group when it contains a change.
        if n >= 2 && rng.gen_bool(0.25) && parts.iter().any(|(_, c)| *c) {
            let grouped = texts.join("; ");
            texts = vec![format!("({grouped})*")];
        }
        let program = texts.join("; ");
        let check = gen_cond(rng, &bools, &shape, 1);
        let text = format!("program : {{ {program} }} check : {{ {check} }}");
        match parse_scenario(&text, spec) {
            Ok(s) => return (text, s),
            // Star bodies of tests alone are rejected; try another shape.
            Err(_) => continue,
        }
    }
}

fn gen_sentence(rng: &mut TestRng, bools: &[String], shape: &SpecShape) -> (String, bool) {
    match rng.gen_range(0..10) {
        0..=3 => ("stateChange".to_string(), true),
        4..=6 => (format!("[ {} ]", gen_cond(rng, bools, shape, 1)), false),
        _ => {
            let guard = if rng.gen_bool(0.5) {
                gen_event(rng, bools, shape, true)
            } else {
                gen_cond(rng, bools, shape, 1)
            };
            (format!("stateChange[{guard}]"), true)
        }
    }
}
