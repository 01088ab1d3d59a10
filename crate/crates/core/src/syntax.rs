//! The rule language: symbols, terms, atoms, literals, rules and databases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::store::{DisjunctiveFact, FactStore};

/// An interned-by-refcount name. Cheap to clone, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(s) | Term::Const(s) => write!(f, "{s}"),
        }
    }
}

/// `p(t1, ..., tn)`, possibly non-ground.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    /// Converts to a ground atom, or `None` if a variable occurs.
    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            pred: self.pred.clone(),
            args,
        })
    }

    pub fn with_pred(&self, pred: impl Into<Symbol>) -> Atom {
        Atom {
            pred: pred.into(),
            args: self.args.clone(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A ground atom: every argument is a constant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroundAtom {
    pub pred: Symbol,
    pub args: Vec<Symbol>,
}

impl GroundAtom {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Symbol>) -> Self {
        GroundAtom {
            pred: pred.into(),
            args,
        }
    }

    /// `GroundAtom::of("e", &["1", "2"])` is `e(1,2)`.
    pub fn of(pred: &str, args: &[&str]) -> Self {
        GroundAtom::new(pred, args.iter().map(|a| Symbol::new(a)).collect())
    }

    pub fn to_atom(&self) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub sign: Sign,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            sign: Sign::Pos,
            atom,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            sign: Sign::Neg,
            atom,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Pos
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "{}", self.atom),
            Sign::Neg => write!(f, "not {}", self.atom),
        }
    }
}

/// `A1 | ... | Am :- L1, ..., Ln.` with `m >= 1` and `n >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Vec<Atom>, body: Vec<Literal>) -> Self {
        Rule { head, body }
    }

    pub fn definite(head: Atom, body: Vec<Literal>) -> Self {
        Rule {
            head: vec![head],
            body,
        }
    }

    pub fn is_definite(&self) -> bool {
        self.head.len() == 1
    }

    pub fn head_preds(&self) -> impl Iterator<Item = &Symbol> {
        self.head.iter().map(|a| &a.pred)
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.is_positive()).map(|l| &l.atom)
    }

    /// Returns the first variable violating safety, if any.
    pub fn unsafe_variable(&self) -> Option<Symbol> {
        let bound: BTreeSet<&Symbol> = self.positive_body().flat_map(|a| a.vars()).collect();
        let needs = self
            .head
            .iter()
            .flat_map(|a| a.vars())
            .chain(
                self.body
                    .iter()
                    .filter(|l| !l.is_positive())
                    .flat_map(|l| l.atom.vars()),
            );
        for v in needs {
            if !bound.contains(v) {
                return Some(v.clone());
            }
        }
        None
    }

    pub fn check_safe(&self) -> Result<()> {
        if self.head.is_empty() || self.body.is_empty() {
            return Err(Error::MalformedRule(self.to_string()));
        }
        match self.unsafe_variable() {
            Some(var) => Err(Error::UnsafeRule {
                rule: self.to_string(),
                var: var.to_string(),
            }),
            None => Ok(()),
        }
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        self.head
            .iter()
            .flat_map(|a| a.vars())
            .chain(self.body.iter().flat_map(|l| l.atom.vars()))
            .cloned()
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{h}")?;
        }
        write!(f, " :- ")?;
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ".")
    }
}

/// A deductive database `<F, R, I>`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    pub facts: BTreeSet<GroundAtom>,
    pub rules: Vec<Rule>,
    pub constraints: BTreeSet<GroundAtom>,
    /// Indefinite base facts, only meaningful to the state operators.
    pub disjunctions: BTreeSet<DisjunctiveFact>,
}

impl Database {
    pub fn new(
        facts: impl IntoIterator<Item = GroundAtom>,
        rules: Vec<Rule>,
        constraints: impl IntoIterator<Item = GroundAtom>,
    ) -> Result<Self> {
        let db = Database {
            facts: facts.into_iter().collect(),
            rules,
            constraints: constraints.into_iter().collect(),
            disjunctions: BTreeSet::new(),
        };
        db.validate()?;
        Ok(db)
    }

    /// Definite facts followed by every atom of every indefinite fact.
    pub fn all_fact_atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.facts
            .iter()
            .chain(self.disjunctions.iter().flat_map(|d| d.atoms().iter()))
    }

    pub fn is_definite(&self) -> bool {
        self.disjunctions.is_empty() && self.rules.iter().all(Rule::is_definite)
    }

    /// `F` as a fact store (definite and indefinite facts together).
    pub fn fact_store(&self) -> FactStore {
        FactStore::from_facts(
            self.facts
                .iter()
                .cloned()
                .map(DisjunctiveFact::definite)
                .chain(self.disjunctions.iter().cloned()),
        )
    }

    pub fn derived_preds(&self) -> BTreeSet<Symbol> {
        self.rules
            .iter()
            .flat_map(|r| r.head_preds().cloned())
            .collect()
    }

    pub fn base_preds(&self) -> BTreeSet<Symbol> {
        let derived = self.derived_preds();
        let mut out: BTreeSet<Symbol> = self.all_fact_atoms().map(|f| f.pred.clone()).collect();
        for r in &self.rules {
            for l in &r.body {
                if !derived.contains(&l.atom.pred) {
                    out.insert(l.atom.pred.clone());
                }
            }
        }
        out
    }

    /// Collects `pred -> arity`, failing on the first clash.
    pub fn arities(&self) -> Result<BTreeMap<Symbol, usize>> {
        let mut arity = BTreeMap::new();
        let mut note = |pred: &Symbol, n: usize| -> Result<()> {
            match arity.insert(pred.clone(), n) {
                Some(old) if old != n => Err(Error::ArityClash {
                    pred: pred.to_string(),
                    expected: old,
                    found: n,
                }),
                _ => Ok(()),
            }
        };
        for f in self.all_fact_atoms().chain(&self.constraints) {
            note(&f.pred, f.args.len())?;
        }
        for r in &self.rules {
            for a in r.head.iter().chain(r.body.iter().map(|l| &l.atom)) {
                note(&a.pred, a.arity())?;
            }
        }
        Ok(arity)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rules {
            r.check_safe()?;
        }
        self.arities()?;
        let derived = self.derived_preds();
        if let Some(f) = self.all_fact_atoms().find(|f| derived.contains(&f.pred)) {
            return Err(Error::BaseAndDerived(f.pred.to_string()));
        }
        let known: BTreeSet<&Symbol> = self
            .all_fact_atoms()
            .map(|f| &f.pred)
            .chain(derived.iter())
            .chain(self.rules.iter().flat_map(|r| r.body.iter().map(|l| &l.atom.pred)))
            .collect();
        if let Some(c) = self.constraints.iter().find(|c| !known.contains(&c.pred)) {
            return Err(Error::UnknownPredicate(c.pred.to_string()));
        }
        Ok(())
    }

    /// Every constant mentioned by facts, rules or constraints.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for f in self.all_fact_atoms().chain(&self.constraints) {
            out.extend(f.args.iter().cloned());
        }
        for r in &self.rules {
            for a in r.head.iter().chain(r.body.iter().map(|l| &l.atom)) {
                for t in &a.args {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
        }
        out
    }

    pub fn with_facts(&self, facts: BTreeSet<GroundAtom>) -> Database {
        Database {
            facts,
            rules: self.rules.clone(),
            constraints: self.constraints.clone(),
            disjunctions: self.disjunctions.clone(),
        }
    }
}
