//! Reader for the pure-Prolog subset: facts, rules, optional `id:` labels,
//! `%` comments and a single `:- goal.` directive.

use std::collections::HashSet;

use crate::error::ParseError;
use crate::term::{Clause, Program, Term, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Neck,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let bump = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => bump(&mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | ',' | '.' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    col: c0,
                });
                bump(&mut i, &mut col);
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    out.push(Spanned {
                        tok: Tok::Neck,
                        line: l0,
                        col: c0,
                    });
                    i += 2;
                    col += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Colon,
                        line: l0,
                        col: c0,
                    });
                    bump(&mut i, &mut col);
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(word)
                } else if c.is_lowercase() {
                    Tok::Atom(word)
                } else {
                    return Err(ParseError::new(
                        l0,
                        c0,
                        format!("unexpected identifier `{word}`"),
                    ));
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    col: c0,
                });
            }
            other => {
                return Err(ParseError::new(
                    l0,
                    c0,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let toks = lex(src)?;
        let lines = src.split('\n').count();
        let last = src.rsplit('\n').next().map_or(0, |l| l.chars().count());
        Ok(Parser {
            toks,
            pos: 0,
            end: (lines, last + 1),
            anon: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |s| (s.line, s.col))
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Var(name)) => {
                self.pos += 1;
                if name == "_" {
                    self.anon += 1;
                    Ok(Term::Var(Var::new(format!("_G{}", self.anon), 0)))
                } else {
                    Ok(Term::Var(Var::new(name, 0)))
                }
            }
            Some(Tok::Atom(name)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    args.push(self.term()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                }
                Ok(Term::compound(name, args))
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if matches!(self.peek(), Some(Tok::Var(_))) {
            return Err(self.error("expected an atom, found a variable"));
        }
        self.term()
    }

    fn body(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut body = vec![self.atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            body.push(self.atom()?);
        }
        Ok(body)
    }
}

/// Parses a whole program. Unlabelled clauses get the id `c<k>` where `k`
/// is the clause's 1-based position.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    let mut clauses = Vec::new();
    let mut goal = None;
    let mut ids = HashSet::new();
    while p.peek().is_some() {
        if p.peek() == Some(&Tok::Neck) {
            let at = p.here();
            p.pos += 1;
            let g = p.atom()?;
            p.expect(Tok::Dot, "`.` after directive")?;
            if goal.replace(g).is_some() {
                return Err(ParseError::new(at.0, at.1, "duplicate goal directive"));
            }
            continue;
        }
        let at = p.here();
        let mut label = None;
        if let (Some(Tok::Atom(name)), Some(Tok::Colon)) = (
            p.peek().cloned(),
            p.toks.get(p.pos + 1).map(|s| s.tok.clone()),
        ) {
            label = Some(name);
            p.pos += 2;
        }
        let head = p.atom()?;
        let body = if p.peek() == Some(&Tok::Neck) {
            p.pos += 1;
            p.body()?
        } else {
            Vec::new()
        };
        p.expect(Tok::Dot, "`.` at end of clause")?;
        let id = label.unwrap_or_else(|| format!("c{}", clauses.len() + 1));
        if !ids.insert(id.clone()) {
            return Err(ParseError::new(
                at.0,
                at.1,
                format!("duplicate clause id `{id}`"),
            ));
        }
        clauses.push(Clause { id, head, body });
    }
    let goal =
        goal.ok_or_else(|| ParseError::new(p.end.0, p.end.1, "missing goal directive `:- goal.`"))?;
    Ok(Program { clauses, goal })
}

/// Parses a single term; trailing input is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.error("unexpected input after term"));
    }
    Ok(t)
}
