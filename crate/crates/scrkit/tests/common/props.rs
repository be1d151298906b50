//! Property suites over generated specifications. Each function runs the
//! given number of cases and panics with the generated artifacts on failure.

use super::gen::{gen_clean_spec, gen_cond, gen_scenario, gen_valid_spec, SpecShape, TestRng};
use rand::Rng;
use rand::SeedableRng;
use scrkit::model::{
    eval_cond, eval_event, fire_mode_table, step, successors, CondExpr, EventExpr, InputEvent,
    SpecModel, SystemState, Value, VarId, VarRole,
};
use scrkit::scenario::{parse_scenario, Guard, Sentence};

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn random_state(rng: &mut TestRng, spec: &SpecModel) -> SystemState {
    SystemState::new(
        spec.vars
            .iter()
            .map(|v| v.ty.value_at(rng.gen_range(0..v.ty.cardinality())))
            .collect(),
    )
}

pub fn random_input(rng: &mut TestRng, spec: &SpecModel, state: &SystemState) -> InputEvent {
    let monitored: Vec<VarId> = spec.monitored().map(|(id, _)| id).collect();
    loop {
        let var = monitored[rng.gen_range(0..monitored.len())];
        let ty = &spec.var(var).ty;
        let value = ty.value_at(rng.gen_range(0..ty.cardinality()));
        if value != state.get(var) {
            return InputEvent {
                var,
                new_value: value,
            };
        }
    }
}

/// Parses a condition by wrapping it in a one-test scenario.
pub fn parse_cond(spec: &SpecModel, text: &str) -> CondExpr {
    let scenario = parse_scenario(
        &format!("program : {{ [ {text} ] }} check : {{ true }}"),
        spec,
    )
    .unwrap_or_else(|d| panic!("condition `{text}` does not parse: {d:?}"));
    match scenario.sentences.into_iter().next().unwrap() {
        Sentence::Test(c) => c,
        other => panic!("expected a test, got {other:?}"),
    }
}

/// Parses an event by wrapping it in a guarded-change scenario.
pub fn parse_event(spec: &SpecModel, text: &str) -> EventExpr {
    let scenario = parse_scenario(
        &format!("program : {{ stateChange[{text}] }} check : {{ true }}"),
        spec,
    )
    .unwrap_or_else(|d| panic!("event `{text}` does not parse: {d:?}"));
    match scenario.sentences.into_iter().next().unwrap() {
        Sentence::GuardedChange(Guard::Event(e)) => e,
        other => panic!("expected an event guard, got {other:?}"),
    }
}

fn cond_shape(spec: &SpecModel) -> (Vec<String>, SpecShape) {
    let bools: Vec<String> = spec
        .vars
        .iter()
        .filter(|v| v.role == VarRole::Monitored && v.ty.kind == scrkit::TypeKind::Bool)
        .map(|v| v.name.clone())
        .collect();
    let modes = spec
        .vars
        .iter()
        .find(|v| v.role == VarRole::ModeClass)
        .map(|v| v.ty.cardinality())
        .unwrap_or(2);
    (
        bools,
        SpecShape {
            monitored_bools: 0,
            modes,
            mode_rows: 0,
            rich: false,
        },
    )
}

/// `@T(c)` fires exactly when `@F(NOT c)` fires, for any states.
pub fn prop_event_duality(cases: usize) {
    let mut r = rng(0x5c21);
    for case in 0..cases {
        let (text, spec) = gen_clean_spec(&mut r);
        let (bools, shape) = cond_shape(&spec);
        let cond_text = gen_cond(&mut r, &bools, &shape, 2);
        let c = parse_cond(&spec, &cond_text);
        let becomes_true = EventExpr::becomes_true(c.clone());
        let becomes_false_not = EventExpr::becomes_false(c.negate());
        for _ in 0..8 {
            let old = random_state(&mut r, &spec);
            let new = random_state(&mut r, &spec);
            assert_eq!(
                eval_event(&becomes_true, &old, &new),
                eval_event(&becomes_false_not, &old, &new),
                "case {case}: duality fails for `{cond_text}` on\n{text}"
            );
        }
    }
}

/// No event fires on a stuttering step.
pub fn prop_no_change_nullity(cases: usize) {
    let mut r = rng(0x5c22);
    for case in 0..cases {
        let (text, spec) = gen_clean_spec(&mut r);
        let (bools, shape) = cond_shape(&spec);
        let trigger = match r.gen_range(0..3) {
            0 => format!("@T({})", gen_cond(&mut r, &bools, &shape, 1)),
            1 => format!("@F({})", gen_cond(&mut r, &bools, &shape, 1)),
            _ => format!("@C({})", bools[r.gen_range(0..bools.len())]),
        };
        let event_text = if r.gen_bool(0.5) {
            format!("{trigger} when {}", gen_cond(&mut r, &bools, &shape, 1))
        } else {
            trigger
        };
        let ev = parse_event(&spec, &event_text);
        for _ in 0..8 {
            let s = random_state(&mut r, &spec);
            assert!(
                !eval_event(&ev, &s, &s),
                "case {case}: `{event_text}` fired without a change on\n{text}"
            );
        }
    }
}

/// A step changes no monitored variable besides the input.
pub fn prop_step_frame(cases: usize) {
    let mut r = rng(0x5c23);
    for case in 0..cases {
        let (text, spec) = gen_valid_spec(&mut r);
        for _ in 0..8 {
            let state = random_state(&mut r, &spec);
            let input = random_input(&mut r, &spec, &state);
            let Ok(next) = step(&spec, &state, input) else {
                continue; // nondeterministic tables are allowed here
            };
            assert_eq!(next.get(input.var), input.new_value);
            for var in state.diff(&next) {
                assert!(
                    var == input.var || spec.var(var).role != VarRole::Monitored,
                    "case {case}: step changed monitored `{}` besides the input on\n{text}",
                    spec.var(var).name
                );
            }
        }
    }
}

/// Exactly Σ (|type(v)| − 1) successors over monitored variables v.
pub fn prop_successor_cardinality(cases: usize) {
    let mut r = rng(0x5c24);
    for case in 0..cases {
        let (text, spec) = gen_valid_spec(&mut r);
        let state = random_state(&mut r, &spec);
        let expected: usize = spec
            .monitored()
            .map(|(_, decl)| decl.ty.cardinality() - 1)
            .sum();
        assert_eq!(
            successors(&spec, &state).len(),
            expected,
            "case {case}: successor count off on\n{text}"
        );
    }
}

/// parse ∘ render is the identity up to source spans.
pub fn prop_round_trip(cases: usize) {
    let mut r = rng(0x5c25);
    for case in 0..cases {
        let (text, mut spec) = gen_valid_spec(&mut r);
        let rendered = scrkit::render_spec(&spec);
        let mut reparsed = scrkit::parse_spec(&rendered).unwrap_or_else(|d| {
            panic!("case {case}: render does not reparse: {d:?}\noriginal:\n{text}\nrendered:\n{rendered}")
        });
        spec.strip_spans();
        reparsed.strip_spans();
        assert_eq!(
            spec, reparsed,
            "case {case}: round trip diverged\noriginal:\n{text}\nrendered:\n{rendered}"
        );
    }
}

/// Mode tables always yield a member of the mode enumeration.
pub fn prop_mode_result_in_enum(cases: usize) {
    let mut r = rng(0x5c26);
    for case in 0..cases {
        let (text, spec) = gen_clean_spec(&mut r);
        let table = &spec.mode_tables[0];
        let card = spec.var(table.mode_class).ty.cardinality();
        for _ in 0..8 {
            let old = random_state(&mut r, &spec);
            let input = random_input(&mut r, &spec, &old);
            let Ok(new) = step(&spec, &old, input) else {
                continue;
            };
            let mode = fire_mode_table(&spec, table, &old, &new)
                .unwrap_or_else(|e| panic!("case {case}: {e} on\n{text}"));
            match mode {
                Value::Enum(i) => assert!((i as usize) < card),
                other => panic!("case {case}: mode {other:?} is not an enum value"),
            }
        }
    }
}

/// Engine verdicts agree with the run-enumeration oracle on small specs.
/// Returns the number of violations seen, for reporting.
pub fn prop_engine_matches_oracle(cases: usize) -> usize {
    use scrkit::engine::{analyze, AnalyzeOptions, Verdict};
    use scrkit::scenario::compile_to_automaton;

    let mut r = rng(0x5c27);
    let mut violations = 0;
    for case in 0..cases {
        let (spec_text, spec) = gen_clean_spec(&mut r);
        let (scn_text, scenario) = gen_scenario(&mut r, &spec, 3);
        let aut = compile_to_automaton(&scenario);
        let verdict = analyze(&spec, &scenario, &aut, &AnalyzeOptions::default()).unwrap();
        let expected = super::oracle::oracle_violates(&spec, &scenario);
        match verdict {
            Verdict::Violation(trace) => {
                assert!(
                    expected,
                    "case {case}: engine found a violation the oracle rejects\n{spec_text}\n{scn_text}"
                );
                violations += 1;
                // Soundness: the trace replays to its own final state and
                // really falsifies the check.
                let replay = scrkit::engine::simulate(&spec, &trace.inputs()).unwrap();
                assert_eq!(replay.final_state(), trace.final_state());
                assert!(!eval_cond(&scenario.check, trace.final_state()));
            }
            Verdict::NoViolationWithinBound { exhausted, .. } => {
                assert!(exhausted, "case {case}: bound too small for the comparison");
                assert!(
                    !expected,
                    "case {case}: oracle found a violation the engine missed\n{spec_text}\n{scn_text}"
                );
            }
            Verdict::ConsistencyError(d) => {
                panic!("case {case}: consistency error on a clean spec: {d:?}\n{spec_text}")
            }
        }
    }
    violations
}
