//! Tokenizer shared by the specification and scenario parsers.
//!
//! Line-oriented only in spirit: tokens carry spans, whitespace and `#`
//! comments are skipped, so layout is free outside tokens.

use crate::diag::{DiagCode, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Int,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    /// Row separator `--`.
    DashDash,
    /// Row arrow `-->`.
    Arrow,
    /// Integer range `..`.
    DotDot,
    AtT,
    AtF,
    AtC,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    pub span: SourceSpan,
}

pub fn lex(input: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = input.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        // Skip whitespace and comments.
        loop {
            match chars.peek() {
                Some(c) if c.is_whitespace() => {
                    bump!();
                }
                Some('#') => {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                }
                _ => break,
            }
        }
        let (start_line, start_col) = (line, col);
        let Some(&c) = chars.peek() else {
            tokens.push(Token {
                kind: TokKind::Eof,
                text: String::new(),
                span: SourceSpan::point(line, col),
            });
            return Ok(tokens);
        };

        let mut push = |kind: TokKind, text: String, line: u32, col: u32| {
            tokens.push(Token {
                kind,
                text,
                span: SourceSpan::new(start_line, start_col, line, col.saturating_sub(1).max(1)),
            });
        };

        match c {
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | ':' | '*' | '=' => {
                bump!();
                let kind = match c {
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    '[' => TokKind::LBracket,
                    ']' => TokKind::RBracket,
                    ',' => TokKind::Comma,
                    ';' => TokKind::Semi,
                    ':' => TokKind::Colon,
                    '*' => TokKind::Star,
                    _ => TokKind::Eq,
                };
                push(kind, c.to_string(), line, col);
            }
            '!' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    push(TokKind::Ne, "!=".into(), line, col);
                } else {
                    return Err(Diagnostic::error(
                        DiagCode::Lex,
                        "expected `!=`",
                        SourceSpan::point(start_line, start_col),
                    ));
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    push(TokKind::Le, "<=".into(), line, col);
                } else {
                    push(TokKind::Lt, "<".into(), line, col);
                }
            }
            '>' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    push(TokKind::Ge, ">=".into(), line, col);
                } else {
                    push(TokKind::Gt, ">".into(), line, col);
                }
            }
            '.' => {
                bump!();
                if chars.peek() == Some(&'.') {
                    bump!();
                    push(TokKind::DotDot, "..".into(), line, col);
                } else {
                    return Err(Diagnostic::error(
                        DiagCode::Lex,
                        "expected `..`",
                        SourceSpan::point(start_line, start_col),
                    ));
                }
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('-') => {
                        bump!();
                        if chars.peek() == Some(&'>') {
                            bump!();
                            push(TokKind::Arrow, "-->".into(), line, col);
                        } else {
                            push(TokKind::DashDash, "--".into(), line, col);
                        }
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let mut text = String::from("-");
                        while let Some(&d) = chars.peek() {
                            if !d.is_ascii_digit() {
                                break;
                            }
                            text.push(d);
                            bump!();
                        }
                        push(TokKind::Int, text, line, col);
                    }
                    _ => {
                        return Err(Diagnostic::error(
                            DiagCode::Lex,
                            "expected `--`, `-->` or a negative integer",
                            SourceSpan::point(start_line, start_col),
                        ))
                    }
                }
            }
            '@' => {
                bump!();
                let kind = match chars.peek() {
                    Some('T') => TokKind::AtT,
                    Some('F') => TokKind::AtF,
                    Some('C') => TokKind::AtC,
                    _ => {
                        return Err(Diagnostic::error(
                            DiagCode::Lex,
                            "expected `@T`, `@F` or `@C`",
                            SourceSpan::point(start_line, start_col),
                        ))
                    }
                };
                let letter = bump!().unwrap();
                push(kind, format!("@{letter}"), line, col);
            }
            d if d.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    text.push(d);
                    bump!();
                }
                push(TokKind::Int, text, line, col);
            }
            a if a.is_alphabetic() || a == '_' => {
                let mut text = String::new();
                while let Some(&a) = chars.peek() {
                    if !a.is_alphanumeric() && a != '_' {
                        break;
                    }
                    text.push(a);
                    bump!();
                }
                push(TokKind::Ident, text, line, col);
            }
            other => {
                return Err(Diagnostic::error(
                    DiagCode::Lex,
                    format!("unexpected character `{other}`"),
                    SourceSpan::point(start_line, start_col),
                ))
            }
        }
    }
}
