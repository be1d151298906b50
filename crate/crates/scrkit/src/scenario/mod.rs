//! The scenario notation: programs over table transitions.
//!
//! ```text
//! SCENARIO ::= program : { PROGRAM } check : { PROP }
//! PROGRAM  ::= UNIT | UNIT ; PROGRAM
//! UNIT     ::= ( PROGRAM ) STAR* | SENTENCE STAR*
//! SENTENCE ::= [ FORM ] | stateChange | stateChange[ FORM ]
//! ```
//!
//! A test `[ f ]` does not change the state and is only executable when `f`
//! holds. `stateChange` is an arbitrary one-input transition of the
//! specification. `stateChange[ g ]` keeps only the transitions satisfying
//! `g`: an event guard is evaluated over the step's (old, new) pair, a
//! condition guard must hold in the new state. `*` iterates the preceding
//! sentence or parenthesized group zero or more times. The check formula
//! must hold whenever the program runs to completion.

mod automaton;

pub use automaton::{compile_to_automaton, Pc, PcAutomaton};

use crate::diag::{DiagCode, Diagnostic};
use crate::model::{CondExpr, EventExpr, SpecModel};
use crate::parse::{self, ResolveCtx, TokKind};

/// Guard of a restricted change.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// Evaluated over the (old, new) pair of the guarded step.
    Event(EventExpr),
    /// Must hold in the new state of the guarded step.
    Cond(CondExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sentence {
    /// `[ f ]` — state-preserving, executable only when `f` holds.
    Test(CondExpr),
    /// `stateChange` — any one-input transition.
    StateChange,
    /// `stateChange[ g ]` — transitions satisfying the guard.
    GuardedChange(Guard),
}

impl Sentence {
    pub fn changes_state(&self) -> bool {
        !matches!(self, Sentence::Test(_))
    }
}

/// Program structure over sentence indices into [`Scenario::sentences`].
/// Indices follow textual order, which is also the program-counter order.
#[derive(Debug, Clone, PartialEq)]
pub enum Program {
    Sentence(usize),
    Seq(Box<Program>, Box<Program>),
    Star(Box<Program>),
}

impl Program {
    fn contains_change(&self, sentences: &[Sentence]) -> bool {
        match self {
            Program::Sentence(i) => sentences[*i].changes_state(),
            Program::Seq(a, b) => {
                a.contains_change(sentences) || b.contains_change(sentences)
            }
            Program::Star(body) => body.contains_change(sentences),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sentences: Vec<Sentence>,
    pub program: Program,
    pub check: CondExpr,
}

/// Parses a scenario against `spec` for name and type resolution.
pub fn parse_scenario(text: &str, spec: &SpecModel) -> Result<Scenario, Vec<Diagnostic>> {
    let tokens = parse::lex(text).map_err(|d| vec![d])?;
    let mut cur = parse::Cursor::new(tokens);
    let ctx = ResolveCtx::for_spec(spec);
    parse_scenario_inner(&mut cur, &ctx).map_err(|d| vec![d])
}

fn parse_scenario_inner(
    cur: &mut parse::Cursor,
    ctx: &ResolveCtx,
) -> Result<Scenario, Diagnostic> {
    if !cur.eat_ident("program") {
        return Err(cur.error_here("expected `program`"));
    }
    cur.expect(TokKind::Colon, "`:`")?;
    cur.expect(TokKind::LBrace, "`{`")?;
    if cur.at(TokKind::RBrace) {
        return Err(cur.error_here("empty program"));
    }
    let mut sentences = Vec::new();
    let program = parse_program(cur, ctx, &mut sentences)?;
    cur.expect(TokKind::RBrace, "`}`")?;
    if !cur.eat_ident("check") {
        return Err(cur.error_here("expected `check`"));
    }
    cur.expect(TokKind::Colon, "`:`")?;
    cur.expect(TokKind::LBrace, "`{`")?;
    let raw_check = parse::parse_raw_cond(cur)?;
    let check = ctx.resolve_cond(&raw_check)?;
    cur.expect(TokKind::RBrace, "`}`")?;
    cur.expect(TokKind::Eof, "end of input")?;

    reject_test_only_stars(&program, &sentences, cur)?;
    Ok(Scenario {
        sentences,
        program,
        check,
    })
}

/// Iteration over tests alone would permit unbounded stuttering without any
/// state change; rejected at compile time.
fn reject_test_only_stars(
    program: &Program,
    sentences: &[Sentence],
    cur: &parse::Cursor,
) -> Result<(), Diagnostic> {
    match program {
        Program::Sentence(_) => Ok(()),
        Program::Seq(a, b) => {
            reject_test_only_stars(a, sentences, cur)?;
            reject_test_only_stars(b, sentences, cur)
        }
        Program::Star(body) => {
            if !body.contains_change(sentences) {
                return Err(Diagnostic::error(
                    DiagCode::Type,
                    "iteration body contains only tests; it must contain a state change",
                    cur.peek().span,
                ));
            }
            reject_test_only_stars(body, sentences, cur)
        }
    }
}

fn parse_program(
    cur: &mut parse::Cursor,
    ctx: &ResolveCtx,
    sentences: &mut Vec<Sentence>,
) -> Result<Program, Diagnostic> {
    let mut units = vec![parse_unit(cur, ctx, sentences)?];
    while cur.at(TokKind::Semi) {
        cur.bump();
        // Permit a trailing `;` before the closing brace or parenthesis.
        if cur.at(TokKind::RBrace) || cur.at(TokKind::RParen) {
            break;
        }
        units.push(parse_unit(cur, ctx, sentences)?);
    }
    let mut program = units.remove(0);
    for unit in units {
        program = Program::Seq(Box::new(program), Box::new(unit));
    }
    Ok(program)
}

fn parse_unit(
    cur: &mut parse::Cursor,
    ctx: &ResolveCtx,
    sentences: &mut Vec<Sentence>,
) -> Result<Program, Diagnostic> {
    let mut unit = if cur.at(TokKind::LParen) {
        cur.bump();
        let inner = parse_program(cur, ctx, sentences)?;
        cur.expect(TokKind::RParen, "`)`")?;
        inner
    } else {
        let sentence = parse_sentence(cur, ctx)?;
        sentences.push(sentence);
        Program::Sentence(sentences.len() - 1)
    };
    while cur.at(TokKind::Star) {
        cur.bump();
        unit = Program::Star(Box::new(unit));
    }
    Ok(unit)
}

fn parse_sentence(cur: &mut parse::Cursor, ctx: &ResolveCtx) -> Result<Sentence, Diagnostic> {
    if cur.at(TokKind::LBracket) {
        cur.bump();
        let raw = parse::parse_raw_cond(cur)?;
        let cond = ctx.resolve_cond(&raw)?;
        cur.expect(TokKind::RBracket, "`]`")?;
        return Ok(Sentence::Test(cond));
    }
    if cur.eat_ident("stateChange") {
        if !cur.at(TokKind::LBracket) {
            return Ok(Sentence::StateChange);
        }
        cur.bump();
        let guard = if matches!(
            cur.peek().kind,
            TokKind::AtT | TokKind::AtF | TokKind::AtC
        ) {
            let raw = parse::parse_raw_event(cur)?;
            Guard::Event(ctx.resolve_event(&raw)?)
        } else {
            let raw = parse::parse_raw_cond(cur)?;
            Guard::Cond(ctx.resolve_cond(&raw)?)
        };
        cur.expect(TokKind::RBracket, "`]`")?;
        return Ok(Sentence::GuardedChange(guard));
    }
    Err(cur.error_here("expected a sentence: `[ formula ]`, `stateChange` or `stateChange[ guard ]`"))
}

/// Renders a sentence in source syntax.
pub fn render_sentence(spec: &SpecModel, sentence: &Sentence) -> String {
    match sentence {
        Sentence::Test(f) => format!("[ {} ]", parse::render_cond(spec, f)),
        Sentence::StateChange => "stateChange".to_string(),
        Sentence::GuardedChange(Guard::Event(e)) => {
            format!("stateChange[{}]", parse::render_event(spec, e))
        }
        Sentence::GuardedChange(Guard::Cond(c)) => {
            format!("stateChange[{}]", parse::render_cond(spec, c))
        }
    }
}
