//! Parser and printer for the Datalog dialect.
//!
//! ```text
//! e(1,2).                          % base fact
//! a | b.                           % indefinite base fact
//! p(X,Y) :- e(X,Z), p(Z,Y).        % rule
//! o(X,Y) :- not p(Y,X), p(X,Y).    % negation
//! a(X) | b(X) :- c(X).             % disjunctive head
//! constraint ic(2).                % integrity constraint
//! ?- o(1,2).                       % query
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::names;
use crate::store::DisjunctiveFact;
use crate::syntax::{Atom, Database, GroundAtom, Literal, Rule, Sign, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub database: Database,
    pub queries: Vec<Atom>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequestKind {
    BaseUpdate,
    ViewUpdate,
}

/// `+e(2,3)`, `-s(2)` or `vu +p(2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub kind: RequestKind,
    pub sign: Sign,
    pub atom: GroundAtom,
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == RequestKind::ViewUpdate {
            write!(f, "vu ")?;
        }
        let s = if self.sign == Sign::Pos { '+' } else { '-' };
        write!(f, "{s}{}", self.atom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Pipe,
    Implies,
    Query,
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, n: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::Implies, 2, &mut i, &mut col),
            '?' if chars.get(i + 1) == Some(&'-') => push(Tok::Query, 2, &mut i, &mut col),
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_ascii_digit() {
                    if !word.chars().all(|d| d.is_ascii_digit()) {
                        return Err(Error::Syntax {
                            line: l0,
                            column: c0,
                            message: format!("malformed number `{word}`"),
                        });
                    }
                    Tok::Int(word)
                } else if c.is_ascii_uppercase() || c == '_' {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    column: c0,
                });
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    allow_internal: bool,
    eof: (usize, usize),
}

impl Parser {
    fn new(text: &str, allow_internal: bool) -> Result<Self> {
        let lines = text.lines().count().max(1);
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            allow_internal,
            eof: (lines, text.lines().last().map_or(1, |l| l.len() + 1)),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map_or(self.eof, |s| (s.line, s.column));
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match self.peek() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return self.error("expected predicate name"),
        };
        if !self.allow_internal && names::is_reserved(&name) {
            return Err(Error::ReservedName(name));
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let t = match self.peek() {
                    Some(Tok::Var(v)) => Term::var(v),
                    Some(Tok::Ident(c)) | Some(Tok::Int(c)) => Term::constant(c),
                    _ => return self.error("expected term"),
                };
                self.pos += 1;
                args.push(t);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(Atom::new(name.as_str(), args))
    }

    fn literal(&mut self) -> Result<Literal> {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == "not")
            && matches!(self.toks.get(self.pos + 1).map(|s| &s.tok), Some(Tok::Ident(_)))
        {
            self.pos += 1;
            return Ok(Literal::neg(self.atom()?));
        }
        Ok(Literal::pos(self.atom()?))
    }

    fn program(&mut self) -> Result<Program> {
        let mut facts = BTreeSet::new();
        let mut disjunctions = BTreeSet::new();
        let mut rules = Vec::new();
        let mut constraints = BTreeSet::new();
        let mut queries = Vec::new();
        while self.peek().is_some() {
            if self.eat(&Tok::Query) {
                queries.push(self.atom()?);
                self.expect(Tok::Dot, "`.` after query")?;
                continue;
            }
            if matches!(self.peek(), Some(Tok::Ident(w)) if w == "constraint")
                && matches!(self.toks.get(self.pos + 1).map(|s| &s.tok), Some(Tok::Ident(_)))
            {
                self.pos += 1;
                let a = self.atom()?;
                let g = a.to_ground().ok_or_else(|| Error::NonGround(a.to_string()))?;
                constraints.insert(g);
                self.expect(Tok::Dot, "`.` after constraint")?;
                continue;
            }
            let start = self.pos;
            let mut head = vec![self.atom()?];
            while self.eat(&Tok::Pipe) {
                head.push(self.atom()?);
            }
            if self.eat(&Tok::Implies) {
                let mut body = vec![self.literal()?];
                while self.eat(&Tok::Comma) {
                    body.push(self.literal()?);
                }
                self.expect(Tok::Dot, "`.` at end of rule")?;
                let rule = Rule::new(head, body);
                rule.check_safe()?;
                rules.push(rule);
            } else {
                self.expect(Tok::Dot, "`.` or `:-`")?;
                let ground: Option<Vec<GroundAtom>> = head.iter().map(Atom::to_ground).collect();
                let Some(ground) = ground else {
                    self.pos = start;
                    return self.error("facts must be ground");
                };
                if ground.len() == 1 {
                    facts.extend(ground);
                } else {
                    disjunctions.extend(DisjunctiveFact::new(ground));
                }
            }
        }
        let mut database = Database {
            facts,
            rules,
            constraints,
            disjunctions,
        };
        database.validate()?;
        // One-atom disjunctions collapse into facts above, so nothing to merge.
        database.disjunctions.retain(|d| !d.is_definite());
        Ok(Program { database, queries })
    }
}

/// Parses a program written by a user; internal relation names are rejected.
pub fn parse_program(text: &str) -> Result<Program> {
    Parser::new(text, false)?.program()
}

/// Parses rewritten programs printed by this crate, which use internal names.
pub fn parse_program_internal(text: &str) -> Result<Program> {
    Parser::new(text, true)?.program()
}

/// Parses a fact file: one ground atom per statement.
pub fn parse_facts(text: &str) -> Result<BTreeSet<GroundAtom>> {
    let program = parse_program(text)?;
    if !program.database.rules.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "fact files may not contain rules".into(),
        });
    }
    Ok(program.database.facts)
}

/// Parses a single atom, e.g. a query given on the command line.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut p = Parser::new(text, false)?;
    let a = p.atom()?;
    p.eat(&Tok::Dot);
    if p.peek().is_some() {
        return p.error("trailing input after atom");
    }
    Ok(a)
}

pub fn parse_request(text: &str) -> Result<Request> {
    let mut p = Parser::new(text, false)?;
    let kind = if matches!(p.peek(), Some(Tok::Ident(w)) if w == "vu") {
        p.pos += 1;
        RequestKind::ViewUpdate
    } else {
        RequestKind::BaseUpdate
    };
    let sign = if p.eat(&Tok::Plus) {
        Sign::Pos
    } else if p.eat(&Tok::Minus) {
        Sign::Neg
    } else {
        return p.error("expected `+` or `-`");
    };
    let atom = p.atom()?;
    p.eat(&Tok::Dot);
    if p.peek().is_some() {
        return p.error("trailing input after request");
    }
    let atom = atom
        .to_ground()
        .ok_or_else(|| Error::NonGround(atom.to_string()))?;
    Ok(Request { kind, sign, atom })
}

/// Like [`parse_request`], additionally rejecting predicates `db` does not know.
pub fn parse_request_for(text: &str, db: &Database) -> Result<Request> {
    let req = parse_request(text)?;
    let arities = db.arities()?;
    match arities.get(&req.atom.pred) {
        None => Err(Error::UnknownPredicate(req.atom.pred.to_string())),
        Some(&n) if n != req.atom.args.len() => Err(Error::ArityClash {
            pred: req.atom.pred.to_string(),
            expected: n,
            found: req.atom.args.len(),
        }),
        Some(_) => Ok(req),
    }
}

impl fmt::Display for Program {
    /// Canonical form: facts, indefinite facts, constraints, rules, queries.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let db = &self.database;
        for a in &db.facts {
            writeln!(f, "{a}.")?;
        }
        for d in &db.disjunctions {
            writeln!(f, "{d}.")?;
        }
        for c in &db.constraints {
            writeln!(f, "constraint {c}.")?;
        }
        for r in &db.rules {
            writeln!(f, "{r}")?;
        }
        for q in &self.queries {
            writeln!(f, "?- {q}.")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definite_rule() {
        let p = parse_program("p(X,Y) :- e(X,Y).").unwrap();
        assert_eq!(p.database.rules.len(), 1);
        assert!(p.database.rules[0].is_definite());
        assert!(p.database.derived_preds().contains(&"p".into()));
    }

    #[test]
    fn negation_bound_later_is_safe() {
        let p = parse_program("o(X,Y) :- not p(Y,X), p(X,Y).").unwrap();
        let r = &p.database.rules[0];
        assert_eq!(r.body[0].sign, Sign::Neg);
        assert_eq!(r.body[1].sign, Sign::Pos);
    }

    #[test]
    fn unsafe_negation_rejected() {
        let err = parse_program("q(X) :- not r(X).").unwrap_err();
        assert!(matches!(err, Error::UnsafeRule { ref var, .. } if var == "X"), "{err}");
    }

    #[test]
    fn full_dialect() {
        let text = "% comment\n e(1,2). a | b.\n constraint ic(2).\n x(X) | y(X) :- c(X).\n c(1).\n ic(2) :- not au(2).\n au(X) :- c(X).\n ?- o(1,2).\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.database.facts.len(), 2);
        assert_eq!(p.database.disjunctions.len(), 1);
        assert_eq!(p.database.constraints.len(), 1);
        assert_eq!(p.database.rules.len(), 3);
        assert_eq!(p.queries.len(), 1);
    }

    #[test]
    fn syntax_error_location() {
        let err = parse_program("e(1,2).\np(X :- e(X).").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 5, .. }), "{err}");
    }

    #[test]
    fn base_and_derived_rejected() {
        let err = parse_program("p(1). p(X) :- e(X).").unwrap_err();
        assert!(matches!(err, Error::BaseAndDerived(_)));
    }

    #[test]
    fn arity_clash_rejected() {
        assert!(matches!(
            parse_program("e(1). e(1,2).").unwrap_err(),
            Error::ArityClash { .. }
        ));
    }

    #[test]
    fn reserved_names() {
        assert!(matches!(
            parse_program("new__p(1).").unwrap_err(),
            Error::ReservedName(_)
        ));
        assert!(parse_program_internal("new__p(1).").is_ok());
    }

    #[test]
    fn requests() {
        let r = parse_request("+e(2,3)").unwrap();
        assert_eq!(
            r,
            Request {
                kind: RequestKind::BaseUpdate,
                sign: Sign::Pos,
                atom: GroundAtom::of("e", &["2", "3"])
            }
        );
        let r = parse_request("-s(2)").unwrap();
        assert_eq!(r.sign, Sign::Neg);
        let r = parse_request("vu +p(2)").unwrap();
        assert_eq!(r.kind, RequestKind::ViewUpdate);
        assert_eq!(r.atom, GroundAtom::of("p", &["2"]));
        assert!(matches!(parse_request("+e(X,3)"), Err(Error::NonGround(_))));
    }

    #[test]
    fn request_unknown_predicate() {
        let db = parse_program("e(1,2).").unwrap().database;
        assert!(matches!(
            parse_request_for("+f(1)", &db),
            Err(Error::UnknownPredicate(_))
        ));
        assert!(parse_request_for("+e(2,3)", &db).is_ok());
    }

    #[test]
    fn printer_round_trip() {
        let text = "e(1,2). a | b. constraint e(1,2). p(X,Y) :- e(X,Y), not q(X). q(X) | r(X) :- e(X,Y). ?- p(1,Y).";
        let p = parse_program(text).unwrap();
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }
}
