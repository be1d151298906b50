//! Command-line front end: type checking, consistency checking, scenario
//! analysis, deterministic simulation and Promela emission.
//!
//! Exit codes: 0 — clean result (no violation / no findings), 1 — analysis
//! found something (violation, defective tables), 2 — usage or input errors
//! (unreadable files, parse failures, bad flags). Analysis results go to
//! stdout, input diagnostics to stderr.

use clap::{Parser, Subcommand, ValueEnum};
use scrkit::engine::{analyze, simulate, AnalyzeOptions, Verdict};
use scrkit::model::{InputEvent, SpecModel, Value, TypeKind};
use scrkit::output::{
    render_trace_text, trace_report, verdict_label, DiagnosticReport, RunReport,
};
use scrkit::promela::{emit_promela, EmitOptions};
use scrkit::scenario::{compile_to_automaton, parse_scenario, Scenario};
use scrkit::{parse_spec, Diagnostic};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum OutputFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Parser)]
#[command(name = "scrkit", version, about = "Analysis toolkit for SCR tabular specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and type-check a specification.
    Typecheck {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
    },
    /// Report completeness and disjointness findings for the tables.
    Consistency {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
    },
    /// Analyze a scenario by bounded explicit-state search.
    Check {
        spec: PathBuf,
        scenario: PathBuf,
        /// Maximum transitions from the initial state.
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
        /// Worker threads for frontier expansion.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Shuffle successor exploration deterministically (testing aid).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
    },
    /// Replay a fixed input sequence.
    Simulate {
        spec: PathBuf,
        /// File with one `variable = value` input per line.
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
    },
    /// Emit a self-contained Promela model for an external checker.
    EmitPromela {
        spec: PathBuf,
        scenario: PathBuf,
        /// Output file.
        #[arg(short, long)]
        out: PathBuf,
        /// Unroll iterations this many times instead of emitting a loop.
        #[arg(long)]
        unroll: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Typecheck { spec, output } => {
            let (model, path) = load_spec(&spec)?;
            match output {
                OutputFormat::Text => println!(
                    "ok: {} ({} variables, {} tables)",
                    model.name,
                    model.vars.len(),
                    model.mode_tables.len() + model.event_tables.len() + model.cond_tables.len()
                ),
                OutputFormat::Structured => print_report(RunReport {
                    tool: "scrkit".into(),
                    command: "typecheck".into(),
                    spec: path,
                    scenario: None,
                    result: "clean".into(),
                    depth_bound: None,
                    depth_reached: None,
                    states_explored: None,
                    exhausted: None,
                    trace: None,
                    diagnostics: Vec::new(),
                }),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Consistency { spec, output } => {
            let (model, path) = load_spec(&spec)?;
            let diags = scrkit::check_consistency(&model);
            let errors = diags.iter().filter(|d| d.is_error()).count();
            match output {
                OutputFormat::Text => {
                    for d in &diags {
                        println!("{d}");
                    }
                    let warnings = diags.len() - errors;
                    println!("{errors} error(s), {warnings} warning(s)");
                }
                OutputFormat::Structured => print_report(RunReport {
                    tool: "scrkit".into(),
                    command: "consistency".into(),
                    spec: path,
                    scenario: None,
                    result: if errors == 0 { "clean" } else { "defective" }.into(),
                    depth_bound: None,
                    depth_reached: None,
                    states_explored: None,
                    exhausted: None,
                    trace: None,
                    diagnostics: diags.iter().map(DiagnosticReport::from_diagnostic).collect(),
                }),
            }
            Ok(if errors == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Check {
            spec,
            scenario,
            depth,
            workers,
            seed,
            output,
        } => {
            let (model, spec_path) = load_spec(&spec)?;
            let (scn, scn_path) = load_scenario(&model, &scenario)?;
            let aut = compile_to_automaton(&scn);
            let options = AnalyzeOptions {
                bound: depth,
                workers,
                shuffle_seed: seed,
            };
            let verdict = analyze(&model, &scn, &aut, &options).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(2)
            })?;

            match output {
                OutputFormat::Text => match &verdict {
                    Verdict::Violation(trace) => {
                        println!("violation: check fails at the end of the program");
                        print!("{}", render_trace_text(&model, Some(&scn), trace));
                    }
                    Verdict::NoViolationWithinBound {
                        depth,
                        states_explored,
                        exhausted,
                    } => {
                        let scope = if *exhausted {
                            "state space exhausted"
                        } else {
                            "bound reached"
                        };
                        println!(
                            "no violation within depth {depth} ({states_explored} states, {scope})"
                        );
                    }
                    Verdict::ConsistencyError(diags) => {
                        println!("consistency error:");
                        for d in diags {
                            println!("{d}");
                        }
                    }
                },
                OutputFormat::Structured => {
                    let (depth_reached, states, exhausted) = match &verdict {
                        Verdict::NoViolationWithinBound {
                            depth,
                            states_explored,
                            exhausted,
                        } => (Some(*depth), Some(*states_explored), Some(*exhausted)),
                        _ => (None, None, None),
                    };
                    print_report(RunReport {
                        tool: "scrkit".into(),
                        command: "check".into(),
                        spec: spec_path,
                        scenario: Some(scn_path),
                        result: verdict_label(&verdict).into(),
                        depth_bound: Some(depth),
                        depth_reached,
                        states_explored: states,
                        exhausted,
                        trace: match &verdict {
                            Verdict::Violation(t) => Some(trace_report(&model, t)),
                            _ => None,
                        },
                        diagnostics: match &verdict {
                            Verdict::ConsistencyError(diags) => diags
                                .iter()
                                .map(DiagnosticReport::from_diagnostic)
                                .collect(),
                            _ => Vec::new(),
                        },
                    });
                }
            }
            Ok(match verdict {
                Verdict::NoViolationWithinBound { .. } => ExitCode::SUCCESS,
                Verdict::Violation(_) | Verdict::ConsistencyError(_) => ExitCode::from(1),
            })
        }
        Command::Simulate {
            spec,
            inputs,
            output,
        } => {
            let (model, spec_path) = load_spec(&spec)?;
            let text = read_file(&inputs)?;
            let events = parse_inputs(&model, &text).map_err(|msg| {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            })?;
            let trace = simulate(&model, &events).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(2)
            })?;
            match output {
                OutputFormat::Text => print!("{}", render_trace_text(&model, None, &trace)),
                OutputFormat::Structured => print_report(RunReport {
                    tool: "scrkit".into(),
                    command: "simulate".into(),
                    spec: spec_path,
                    scenario: None,
                    result: "trace".into(),
                    depth_bound: None,
                    depth_reached: None,
                    states_explored: None,
                    exhausted: None,
                    trace: Some(trace_report(&model, &trace)),
                    diagnostics: Vec::new(),
                }),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::EmitPromela {
            spec,
            scenario,
            out,
            unroll,
        } => {
            let (model, _) = load_spec(&spec)?;
            let (scn, _) = load_scenario(&model, &scenario)?;
            let emitted = emit_promela(&model, &scn, &EmitOptions { unroll })
                .map_err(|diags| report_diagnostics(&diags))?;
            std::fs::write(&out, &emitted.text).map_err(|e| {
                eprintln!("error: cannot write {}: {e}", out.display());
                ExitCode::from(2)
            })?;
            println!(
                "wrote {} (pc values 1..{}, assertion on line {})",
                out.display(),
                emitted.pc_count,
                emitted.assertion_line
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_file(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn load_spec(path: &Path) -> Result<(SpecModel, String), ExitCode> {
    let text = read_file(path)?;
    let model = parse_spec(&text).map_err(|diags| report_diagnostics(&diags))?;
    Ok((model, path.display().to_string()))
}

fn load_scenario(spec: &SpecModel, path: &Path) -> Result<(Scenario, String), ExitCode> {
    let text = read_file(path)?;
    let scn = parse_scenario(&text, spec).map_err(|diags| report_diagnostics(&diags))?;
    Ok((scn, path.display().to_string()))
}

fn report_diagnostics(diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{d}");
    }
    ExitCode::from(2)
}

fn print_report(report: RunReport) {
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialization")
    );
}

/// Input files hold one `variable = value` assignment per line; `#` starts
/// a comment.
fn parse_inputs(spec: &SpecModel, text: &str) -> Result<Vec<InputEvent>, String> {
    let mut events = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (name, value_text) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `variable = value`", lineno + 1))?;
        let name = name.trim();
        let value_text = value_text.trim();
        let var = spec
            .var_id(name)
            .ok_or_else(|| format!("line {}: unknown variable `{name}`", lineno + 1))?;
        let ty = &spec.var(var).ty;
        let value = match (&ty.kind, value_text) {
            (TypeKind::Bool, "true") => Value::Bool(true),
            (TypeKind::Bool, "false") => Value::Bool(false),
            (TypeKind::Int { .. }, t) => Value::Int(
                t.parse()
                    .map_err(|_| format!("line {}: `{t}` is not an integer", lineno + 1))?,
            ),
            (TypeKind::Enum { .. }, t) => ty
                .enum_index(t)
                .map(Value::Enum)
                .ok_or_else(|| format!("line {}: `{t}` is not a value of {}", lineno + 1, ty.name))?,
            (_, t) => return Err(format!("line {}: `{t}` does not fit {}", lineno + 1, ty.name)),
        };
        events.push(InputEvent {
            var,
            new_value: value,
        });
    }
    Ok(events)
}
