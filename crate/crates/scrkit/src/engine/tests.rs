use super::*;
use crate::corpus::corpus_dir;
use crate::model::{Value, VarId, VarRole};
use crate::parse::parse_spec;
use crate::scenario::{compile_to_automaton, parse_scenario};

fn load_spec(name: &str) -> SpecModel {
    let text = std::fs::read_to_string(corpus_dir().join(name)).unwrap();
    parse_spec(&text).unwrap()
}

fn load_scenario(spec: &SpecModel, name: &str) -> Scenario {
    let text = std::fs::read_to_string(corpus_dir().join(name)).unwrap();
    parse_scenario(&text, spec).unwrap()
}

fn run(spec: &SpecModel, scenario: &Scenario) -> Verdict {
    let aut = compile_to_automaton(scenario);
    analyze(spec, scenario, &aut, &AnalyzeOptions::default()).unwrap()
}

fn mode_of(spec: &SpecModel, state: &SystemState) -> String {
    let mc = spec.var_id("mcPulseCondition").unwrap();
    spec.display_value(mc, state.get(mc))
}

#[test]
fn test_edge_with_true_condition_yields_one_epsilon_successor() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = parse_scenario(
        "program : { [ true ]; stateChange } check : { true }",
        &spec,
    )
    .unwrap();
    let aut = compile_to_automaton(&scenario);
    let ps = ProductState {
        sys: spec.initial_state(),
        pc: 1,
    };
    let succs = product_successors(&spec, &scenario, &aut, &ps).unwrap();
    assert_eq!(succs.len(), 1);
    assert_eq!(succs[0].0, StepKind::Test { sentence: 0 });
    assert_eq!(succs[0].1.sys, ps.sys);
    assert_eq!(succs[0].1.pc, 2);
}

#[test]
fn falling_edge_guard_has_no_successors_when_already_false() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = parse_scenario(
        "program : { stateChange[@F(tMagnetON)] } check : { true }",
        &spec,
    )
    .unwrap();
    let aut = compile_to_automaton(&scenario);
    // tMagnetON is false initially; @F needs it true in the old state.
    let ps = ProductState {
        sys: spec.initial_state(),
        pc: 1,
    };
    let succs = product_successors(&spec, &scenario, &aut, &ps).unwrap();
    assert!(succs.is_empty());
}

#[test]
fn magnet_release_from_magnormal_lands_in_normal() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = parse_scenario(
        "program : { stateChange[@F(tMagnetON)] } check : { true }",
        &spec,
    )
    .unwrap();
    let aut = compile_to_automaton(&scenario);

    // A reachable magnet-session state with the bradycardia program set.
    let magnet_on = InputEvent {
        var: spec.var_id("mMagnet").unwrap(),
        new_value: Value::Enum(0),
    };
    let sys = step(&spec, &spec.initial_state(), magnet_on).unwrap();
    assert_eq!(mode_of(&spec, &sys), "MAGnormal");

    let succs = product_successors(&spec, &scenario, &aut, &ProductState { sys, pc: 1 }).unwrap();
    assert!(!succs.is_empty());
    for (_, ps) in succs {
        assert_eq!(mode_of(&spec, &ps.sys), "Normal");
    }
}

#[test]
fn s1_on_the_buggy_tables_reports_the_low_battery_command_exit() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = load_scenario(&spec, "s1.scn");
    let Verdict::Violation(trace) = run(&spec, &scenario) else {
        panic!("expected a violation");
    };
    let battery = spec.var_id("mBATTERYvoltage").unwrap();
    let command = spec.var_id("mCommand").unwrap();
    let normal_cmd = Value::Enum(1);
    let found = trace.steps.windows(2).any(|w| {
        let (before, after) = (&w[0], &w[1]);
        matches!(
            after.kind,
            StepKind::Change { input, .. }
                if input.var == command && input.new_value == normal_cmd
        ) && mode_of(&spec, &before.state) == "POR"
            && mode_of(&spec, &after.state) == "Normal"
            && matches!(before.state.get(battery), Value::Int(v) if v < 3)
    });
    assert!(
        found,
        "trace lacks the POR -> Normal step on a NORMAL command at low battery"
    );
}

#[test]
fn s2_on_the_buggy_tables_clears_the_program_before_release() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = load_scenario(&spec, "s2.scn");
    let Verdict::Violation(trace) = run(&spec, &scenario) else {
        panic!("expected a violation");
    };
    let brad = spec.var_id("mMODEbrad").unwrap();
    let off = Value::Enum(0);
    let release_at = trace
        .steps
        .iter()
        .position(|s| matches!(s.kind, StepKind::Change { sentence: Some(2), .. }))
        .expect("the guarded release step");
    let off_at = trace
        .steps
        .iter()
        .position(
            |s| matches!(s.kind, StepKind::Change { input, .. } if input.var == brad && input.new_value == off),
        )
        .expect("an mMODEbrad := OFF step");
    assert!(off_at < release_at, "program cleared after the release");
    assert_ne!(mode_of(&spec, trace.final_state()), "Normal");
}

#[test]
fn s1_verifies_on_the_fixed_tables() {
    let spec = load_spec("pacemaker_fixed.scr");
    let scenario = load_scenario(&spec, "s1.scn");
    match run(&spec, &scenario) {
        Verdict::NoViolationWithinBound { exhausted, .. } => assert!(exhausted),
        other => panic!("expected no violation, got {other:?}"),
    }
}

#[test]
fn refined_s2_verifies_on_both_variants() {
    for name in ["pacemaker_buggy.scr", "pacemaker_fixed.scr"] {
        let spec = load_spec(name);
        let scenario = load_scenario(&spec, "s2_refined.scn");
        assert!(
            !run(&spec, &scenario).is_violation(),
            "unexpected violation on {name}"
        );
    }
}

#[test]
fn violation_traces_replay_through_simulate() {
    let spec = load_spec("pacemaker_buggy.scr");
    for scn in ["s1.scn", "s2.scn"] {
        let scenario = load_scenario(&spec, scn);
        let Verdict::Violation(trace) = run(&spec, &scenario) else {
            panic!("expected a violation for {scn}");
        };
        let replay = simulate(&spec, &trace.inputs()).unwrap();
        assert_eq!(replay.final_state(), trace.final_state());
        assert!(!eval_cond(&scenario.check, trace.final_state()));
        let aut = compile_to_automaton(&scenario);
        let last_pc = trace.steps.last().unwrap().pc.unwrap();
        assert!(aut.accepting[last_pc]);
    }
}

#[test]
fn simulate_rejects_an_unchanged_input_naming_its_position() {
    let spec = load_spec("pacemaker_buggy.scr");
    let battery = spec.var_id("mBATTERYvoltage").unwrap();
    let inputs = [
        InputEvent {
            var: battery,
            new_value: Value::Int(2),
        },
        InputEvent {
            var: battery,
            new_value: Value::Int(2),
        },
    ];
    match simulate(&spec, &inputs) {
        Err(EngineError::IllegalInput { position: 2, .. }) => {}
        other => panic!("expected an illegal input at position 2, got {other:?}"),
    }
}

#[test]
fn empty_input_list_simulates_to_the_initial_state() {
    let spec = load_spec("pacemaker_buggy.scr");
    let trace = simulate(&spec, &[]).unwrap();
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.final_state(), &spec.initial_state());
}

#[test]
fn battery_drop_simulates_into_por() {
    let spec = load_spec("pacemaker_buggy.scr");
    let battery = spec.var_id("mBATTERYvoltage").unwrap();
    let trace = simulate(
        &spec,
        &[InputEvent {
            var: battery,
            new_value: Value::Int(1),
        }],
    )
    .unwrap();
    assert_eq!(mode_of(&spec, trace.final_state()), "POR");
}

#[test]
fn zero_bound_is_rejected() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = load_scenario(&spec, "s1.scn");
    let aut = compile_to_automaton(&scenario);
    let options = AnalyzeOptions {
        bound: 0,
        ..Default::default()
    };
    assert_eq!(
        analyze(&spec, &scenario, &aut, &options),
        Err(EngineError::InvalidBound)
    );
}

#[test]
fn verdict_is_stable_under_shuffles_and_workers() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = load_scenario(&spec, "s2.scn");
    let aut = compile_to_automaton(&scenario);
    let baseline = analyze(&spec, &scenario, &aut, &AnalyzeOptions::default()).unwrap();
    let Verdict::Violation(base_trace) = &baseline else {
        panic!("expected a violation");
    };
    for seed in [1u64, 7, 42] {
        let options = AnalyzeOptions {
            shuffle_seed: Some(seed),
            ..Default::default()
        };
        let Verdict::Violation(trace) = analyze(&spec, &scenario, &aut, &options).unwrap() else {
            panic!("shuffle changed the verdict");
        };
        assert_eq!(trace.steps.len(), base_trace.steps.len());
    }
    let parallel = analyze(
        &spec,
        &scenario,
        &aut,
        &AnalyzeOptions {
            workers: 4,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(parallel, baseline);
}

#[test]
fn violation_found_at_a_bound_persists_at_larger_bounds() {
    let spec = load_spec("pacemaker_buggy.scr");
    let scenario = load_scenario(&spec, "s1.scn");
    let aut = compile_to_automaton(&scenario);
    let at = |bound| {
        analyze(
            &spec,
            &scenario,
            &aut,
            &AnalyzeOptions {
                bound,
                ..Default::default()
            },
        )
        .unwrap()
    };
    let Verdict::Violation(first) = at(2) else {
        panic!("expected the violation within two transitions");
    };
    for bound in [3, 10, 10_000] {
        let Verdict::Violation(again) = at(bound) else {
            panic!("violation vanished at bound {bound}");
        };
        assert_eq!(again.steps.len(), first.steps.len());
    }
}

#[test]
fn nondeterministic_tables_surface_as_a_consistency_error() {
    let spec = parse_spec(
        "
spec Clash
monitored { x : bool initial false }
modeclass mc {
  modes { A, B, C }
  initial A
  A -- @T(x) --> B
  A -- @T(x) --> C
}
",
    )
    .unwrap();
    let scenario = parse_scenario("program : { stateChange } check : { true }", &spec).unwrap();
    let aut = compile_to_automaton(&scenario);
    match analyze(&spec, &scenario, &aut, &AnalyzeOptions::default()).unwrap() {
        Verdict::ConsistencyError(diags) => {
            assert!(diags[0].message.contains("mc"));
        }
        other => panic!("expected a consistency error, got {other:?}"),
    }
}

#[test]
fn frame_property_holds_on_corpus_steps() {
    let spec = load_spec("pacemaker_fixed.scr");
    let state = spec.initial_state();
    for (input, result) in successors(&spec, &state) {
        let next = result.unwrap();
        for var in state.diff(&next) {
            let role = spec.var(var).role;
            assert!(
                var == input.var || role != VarRole::Monitored,
                "step changed monitored {} besides the input",
                spec.var(var).name
            );
        }
    }
}

#[test]
fn successor_count_matches_type_cardinalities() {
    let spec = load_spec("pacemaker_buggy.scr");
    let state = spec.initial_state();
    let expected: usize = spec
        .monitored()
        .map(|(_, decl)| decl.ty.cardinality() - 1)
        .sum();
    assert_eq!(successors(&spec, &state).len(), expected);
    assert_eq!(expected, 7 + 4 + 2 + 1);
}

#[test]
fn update_order_puts_the_term_before_the_mode_class() {
    let spec = load_spec("pacemaker_buggy.scr");
    let names: Vec<&str> = spec
        .update_order
        .iter()
        .map(|(v, _)| spec.var(*v).name.as_str())
        .collect();
    assert_eq!(names, ["tMagnetON", "mcPulseCondition", "cCHAMBERSpaced"]);
}

#[test]
fn corpus_tables_are_consistency_clean() {
    for name in ["pacemaker_buggy.scr", "pacemaker_fixed.scr"] {
        let spec = load_spec(name);
        let errors: Vec<_> = crate::model::check_consistency(&spec)
            .into_iter()
            .filter(|d| d.is_error())
            .collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn por_entry_is_reachable_and_paced_for_the_ventricle() {
    // Battery drop forces POR from every mode; the condition table then
    // pulses the ventricle only.
    let spec = load_spec("pacemaker_fixed.scr");
    let battery = spec.var_id("mBATTERYvoltage").unwrap();
    let chambers = spec.var_id("cCHAMBERSpaced").unwrap();
    let trace = simulate(
        &spec,
        &[InputEvent {
            var: battery,
            new_value: Value::Int(0),
        }],
    )
    .unwrap();
    assert_eq!(mode_of(&spec, trace.final_state()), "POR");
    assert_eq!(
        spec.display_value(chambers, trace.final_state().get(chambers)),
        "V"
    );
}

#[test]
fn product_state_ids_do_not_leak_between_specs() {
    // VarId is an index; make sure the corpus loaders agree on it.
    let spec = load_spec("pacemaker_buggy.scr");
    assert_eq!(spec.var_id("mBATTERYvoltage"), Some(VarId(0)));
    assert_eq!(spec.var(VarId(0)).name, "mBATTERYvoltage");
}

#[test]
fn bound_limited_search_reports_not_exhausted() {
    let spec = load_spec("pacemaker_fixed.scr");
    let scenario = load_scenario(&spec, "s1.scn");
    let aut = compile_to_automaton(&scenario);
    let options = AnalyzeOptions {
        bound: 1,
        ..Default::default()
    };
    match analyze(&spec, &scenario, &aut, &options).unwrap() {
        Verdict::NoViolationWithinBound {
            depth, exhausted, ..
        } => {
            assert_eq!(depth, 1);
            assert!(!exhausted, "one transition cannot cover the state space");
        }
        other => panic!("expected no violation at bound 1, got {other:?}"),
    }
}
