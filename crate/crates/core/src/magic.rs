//! Magic Sets: adornment under a full left-to-right sip, magic rules, seeds,
//! and query answering over the rewritten program.
//!
//! The rewriter is generic over "root" rules. A root rule keeps its head, gets
//! no magic guard, and its literals over non-adornable predicates pass
//! through unchanged; the derived literals in its body still become adorned
//! subqueries. Magic Updates uses this with propagation rules as roots.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::names;
use crate::operators::{evaluate_partitioned, Engine, EvalConfig, ModelResult};
use crate::store::{match_atom, Subst};
use crate::stratify::{soft_partition, stratification, Partition, Provenance, RuleKind, RuleOrigin};
use crate::syntax::{Atom, Database, GroundAtom, Literal, Rule, Symbol, Term};

/// Binding pattern: one `b` or `f` per argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Adornment(String);

impl Adornment {
    pub fn parse(s: &str) -> Result<Self> {
        if s.chars().all(|c| c == 'b' || c == 'f') {
            Ok(Adornment(s.to_string()))
        } else {
            Err(Error::Syntax {
                line: 1,
                column: 1,
                message: format!("adornment `{s}` must consist of b and f"),
            })
        }
    }

    /// Constants and variables in `bound` are `b`.
    pub fn of_atom(atom: &Atom, bound: &BTreeSet<Symbol>) -> Self {
        Adornment(
            atom.args
                .iter()
                .map(|t| match t {
                    Term::Const(_) => 'b',
                    Term::Var(v) if bound.contains(v) => 'b',
                    Term::Var(_) => 'f',
                })
                .collect(),
        )
    }

    pub fn all_bound(arity: usize) -> Self {
        Adornment("b".repeat(arity))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bound(&self, pos: usize) -> bool {
        self.0.as_bytes()[pos] == b'b'
    }

    /// The arguments of `atom` at bound positions.
    pub fn bound_args(&self, atom: &Atom) -> Vec<Term> {
        atom.args
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_bound(*i))
            .map(|(_, t)| t.clone())
            .collect()
    }
}

impl fmt::Display for Adornment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An adorned rule with its body in sip order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdornedRule {
    pub rule: Rule,
    /// `None` for root rules, which are not guarded.
    pub head_adornment: Option<Adornment>,
    /// Adornment of each body literal over an adorned predicate.
    pub literal_adornments: Vec<Option<Adornment>>,
    pub origin: RuleOrigin,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdornedRuleSet {
    pub rules: Vec<AdornedRule>,
    /// Adorned predicate to source predicate and its stratum.
    pub sources: BTreeMap<Symbol, (Symbol, usize)>,
}

/// A rewritten program ready for evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MagicProgram {
    pub rules: Vec<Rule>,
    pub seeds: BTreeSet<GroundAtom>,
    pub provenance: Provenance,
    /// The adorned predicate answering the query, if any.
    pub answer_pred: Option<Symbol>,
}

impl MagicProgram {
    pub fn partition(&self) -> Result<Partition> {
        soft_partition(&self.rules, &self.provenance)
    }
}

/// Everything the rewriter needs to know about the source program.
pub(crate) struct Source<'a> {
    pub program: &'a [Rule],
    /// Predicates whose definitions are specialized per adornment.
    pub adornable: BTreeSet<Symbol>,
    pub levels: BTreeMap<Symbol, usize>,
}

impl<'a> Source<'a> {
    pub fn stratified(program: &'a [Rule]) -> Result<Self> {
        let strata = stratification(program).map_err(|c| Error::Unstratifiable(c.to_string()))?;
        Ok(Source {
            program,
            adornable: program.iter().flat_map(|r| r.head_preds().cloned()).collect(),
            levels: strata.levels,
        })
    }

    fn level(&self, pred: &Symbol) -> usize {
        self.levels.get(pred).copied().unwrap_or(0)
    }
}

/// Orders a body left to right, delaying each negative literal until its
/// variables are bound, and adorns the literals over adornable predicates.
fn sip(
    body: &[Literal],
    bound_init: &BTreeSet<Symbol>,
    adornable: &BTreeSet<Symbol>,
) -> Result<(Vec<Literal>, Vec<Option<Adornment>>)> {
    let mut bound = bound_init.clone();
    let mut order: Vec<&Literal> = Vec::new();
    let mut pending: Vec<&Literal> = Vec::new();
    let ready = |l: &Literal, bound: &BTreeSet<Symbol>| l.atom.vars().all(|v| bound.contains(v));
    for lit in body {
        if lit.is_positive() {
            order.push(lit);
            bound.extend(lit.atom.vars().cloned());
            let (now, later): (Vec<&Literal>, Vec<&Literal>) =
                pending.drain(..).partition(|l| ready(l, &bound));
            order.extend(now);
            pending = later;
        } else if ready(lit, &bound) {
            order.push(lit);
        } else {
            pending.push(lit);
        }
    }
    if let Some(l) = pending.first() {
        return Err(Error::UnboundNegation(l.to_string()));
    }
    let mut bound = bound_init.clone();
    let mut out = Vec::new();
    let mut ads = Vec::new();
    for lit in order {
        if adornable.contains(&lit.atom.pred) {
            let ad = Adornment::of_atom(&lit.atom, &bound);
            out.push(Literal {
                sign: lit.sign,
                atom: lit.atom.with_pred(names::adorned(&lit.atom.pred, ad.as_str())),
            });
            ads.push(Some(ad));
        } else {
            out.push(lit.clone());
            ads.push(None);
        }
        if lit.is_positive() {
            bound.extend(lit.atom.vars().cloned());
        }
    }
    Ok((out, ads))
}

/// Adorns the rules reachable from `queries` and from the bodies of `roots`.
pub(crate) fn adorn_general(
    source: &Source<'_>,
    roots: &[Rule],
    queries: &[(Symbol, Adornment)],
) -> Result<AdornedRuleSet> {
    let mut out = AdornedRuleSet::default();
    let mut work = Worklist::default();
    for root in roots {
        let (body, ads) = sip(&root.body, &BTreeSet::new(), &source.adornable)?;
        let rule = Rule::new(root.head.clone(), body);
        work.note_body(&rule, &ads);
        let head = &root.head[0].pred;
        out.rules.push(AdornedRule {
            rule,
            head_adornment: None,
            literal_adornments: ads,
            origin: RuleOrigin {
                kind: RuleKind::Root,
                origin: head.clone(),
                stratum: source.level(head),
            },
        });
    }
    for (pred, ad) in queries {
        if source.adornable.contains(pred) {
            work.push(pred, ad);
        }
    }
    while let Some((pred, ad)) = work.queue.pop_front() {
        let adorned = names::adorned(&pred, ad.as_str());
        out.sources
            .insert(adorned.clone(), (pred.clone(), source.level(&pred)));
        for r in source.program.iter().filter(|r| r.head[0].pred == pred) {
            let head = &r.head[0];
            let bound: BTreeSet<Symbol> = head
                .args
                .iter()
                .enumerate()
                .filter(|(i, _)| ad.is_bound(*i))
                .filter_map(|(_, t)| match t {
                    Term::Var(v) => Some(v.clone()),
                    Term::Const(_) => None,
                })
                .collect();
            let (body, ads) = sip(&r.body, &bound, &source.adornable)?;
            let rule = Rule::definite(head.with_pred(adorned.clone()), body);
            work.note_body(&rule, &ads);
            out.rules.push(AdornedRule {
                rule,
                head_adornment: Some(ad.clone()),
                literal_adornments: ads,
                origin: RuleOrigin {
                    kind: RuleKind::Adorned,
                    origin: pred.clone(),
                    stratum: source.level(&pred),
                },
            });
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Worklist {
    queue: VecDeque<(Symbol, Adornment)>,
    seen: BTreeSet<(Symbol, Adornment)>,
}

impl Worklist {
    fn push(&mut self, pred: &Symbol, ad: &Adornment) {
        if self.seen.insert((pred.clone(), ad.clone())) {
            self.queue.push_back((pred.clone(), ad.clone()));
        }
    }

    fn note_body(&mut self, rule: &Rule, ads: &[Option<Adornment>]) {
        for (lit, ad) in rule.body.iter().zip(ads) {
            if let Some(ad) = ad {
                let Relation(src) = Relation::of(&lit.atom.pred);
                self.push(&src, ad);
            }
        }
    }
}

/// Source predicate of an adorned name (`p__bf` to `p`, `new__p__bf` to `new__p`).
struct Relation(Symbol);

impl Relation {
    fn of(adorned: &Symbol) -> Relation {
        let s = adorned.as_str();
        let cut = s.rfind(names::SEP).expect("adorned predicate");
        Relation(Symbol::new(&s[..cut]))
    }
}

/// Adorns `rules` for `query`; constants in the query are bound.
pub fn adorn(rules: &[Rule], query: &Atom) -> Result<AdornedRuleSet> {
    if rules.iter().any(|r| !r.is_definite()) {
        return Err(Error::NotDefinite(query.to_string()));
    }
    let source = Source::stratified(rules)?;
    let known = rules
        .iter()
        .any(|r| r.head_preds().chain(r.body.iter().map(|l| &l.atom.pred)).any(|p| *p == query.pred));
    if !known {
        return Err(Error::UnknownPredicate(query.pred.to_string()));
    }
    let ad = Adornment::of_atom(query, &BTreeSet::new());
    adorn_general(&source, &[], &[(query.pred.clone(), ad)])
}

fn magic_atom(adorned_atom: &Atom, ad: &Adornment) -> Atom {
    Atom::new(names::magic(&adorned_atom.pred), ad.bound_args(adorned_atom))
}

/// Guards the adorned rules, emits one magic rule per adorned body literal,
/// and the seed for `query` when given.
pub fn magic_rewrite(adorned: &AdornedRuleSet, query: Option<&Atom>) -> MagicProgram {
    let mut out = MagicProgram::default();
    let mut seen_rules: BTreeSet<Rule> = BTreeSet::new();
    let level_of = |pred: &Symbol| adorned.sources.get(pred).map_or(0, |(_, l)| *l);
    let mut push = |out: &mut MagicProgram, rule: Rule, origin: RuleOrigin| {
        if seen_rules.insert(rule.clone()) {
            out.rules.push(rule);
            out.provenance.origins.push(origin);
        }
    };
    for ar in &adorned.rules {
        let guard = ar
            .head_adornment
            .as_ref()
            .map(|ad| Literal::pos(magic_atom(&ar.rule.head[0], ad)));
        let mut body: Vec<Literal> = guard.iter().cloned().collect();
        body.extend(ar.rule.body.iter().cloned());
        push(&mut out, Rule::new(ar.rule.head.clone(), body), ar.origin.clone());

        let offset = usize::from(guard.is_some());
        let full: Vec<Literal> = guard.into_iter().chain(ar.rule.body.iter().cloned()).collect();
        for (i, (lit, ad)) in ar.rule.body.iter().zip(&ar.literal_adornments).enumerate() {
            let Some(ad) = ad else { continue };
            let head = magic_atom(&lit.atom, ad);
            let origin = RuleOrigin {
                kind: RuleKind::Magic,
                origin: adorned.sources.get(&lit.atom.pred).map_or_else(|| lit.atom.pred.clone(), |(s, _)| s.clone()),
                stratum: level_of(&lit.atom.pred),
            };
            let prefix = &full[..offset + i];
            if prefix.is_empty() {
                if let Some(fact) = head.to_ground() {
                    out.seeds.insert(fact);
                }
                continue;
            }
            push(&mut out, Rule::definite(head, prefix.to_vec()), origin);
        }
    }
    if let Some(q) = query {
        let ad = Adornment::of_atom(q, &BTreeSet::new());
        let ap = names::adorned(&q.pred, ad.as_str());
        if adorned.sources.contains_key(&ap) {
            let consts = ad.bound_args(q);
            let vars: Vec<Term> = (0..consts.len()).map(|i| Term::var(&format!("X{i}"))).collect();
            let seed = names::seed(&ap);
            let m = Atom::new(names::magic(&ap), vars.clone());
            push(
                &mut out,
                Rule::definite(m, vec![Literal::pos(Atom::new(seed.clone(), vars))]),
                RuleOrigin {
                    kind: RuleKind::Magic,
                    origin: q.pred.clone(),
                    stratum: level_of(&ap),
                },
            );
            let args = consts
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(_) => unreachable!("bound query argument is a constant"),
                })
                .collect();
            out.seeds.insert(GroundAtom::new(seed, args));
            out.answer_pred = Some(ap);
        }
    }
    out
}

/// Magic Sets rewriting of `db`'s rules for `query`.
pub fn rewrite(db: &Database, query: &Atom) -> Result<MagicProgram> {
    let adorned = adorn(&db.rules, query)?;
    Ok(magic_rewrite(&adorned, Some(query)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAnswer {
    /// Whether some instance of the query holds.
    pub holds: bool,
    /// The matching instances, over the original predicate.
    pub answers: BTreeSet<GroundAtom>,
    pub model: ModelResult,
}

fn matches(query: &Atom, fact: &GroundAtom) -> bool {
    let mut s = Subst::new();
    match_atom(&query.with_pred(fact.pred.clone()), fact, &mut s)
}

/// Answers `query` by evaluating the magic program with `engine`. The soft
/// and general engines run over [`soft_partition`].
pub fn answer_query(db: &Database, query: &Atom, engine: Engine, cfg: &EvalConfig) -> Result<QueryAnswer> {
    let arities = db.arities()?;
    match arities.get(&query.pred) {
        None => return Err(Error::UnknownPredicate(query.pred.to_string())),
        Some(&n) if n != query.arity() => {
            return Err(Error::ArityClash {
                pred: query.pred.to_string(),
                expected: n,
                found: query.arity(),
            })
        }
        _ => {}
    }
    let program = rewrite(db, query)?;
    let facts: BTreeSet<GroundAtom> = db.facts.iter().cloned().chain(program.seeds.iter().cloned()).collect();
    let partition = match engine {
        Engine::Soft | Engine::General => program.partition()?,
        _ => Partition::single(program.rules.clone()),
    };
    let model = evaluate_partitioned(&facts, &partition, engine, cfg)?;
    let answer_pred = program.answer_pred.clone().unwrap_or_else(|| query.pred.clone());
    let answers: BTreeSet<GroundAtom> = model
        .atoms()
        .into_iter()
        .filter(|a| a.pred == answer_pred && matches(query, a))
        .map(|a| GroundAtom::new(query.pred.clone(), a.args))
        .collect();
    Ok(QueryAnswer {
        holds: !answers.is_empty(),
        answers,
        model,
    })
}

/// Answers `query` on the original program by full materialization.
pub fn answer_directly(db: &Database, query: &Atom, engine: Engine, cfg: &EvalConfig) -> Result<QueryAnswer> {
    let model = crate::operators::evaluate(db, engine, cfg)?;
    let answers: BTreeSet<GroundAtom> = model
        .atoms()
        .into_iter()
        .filter(|a| a.pred == query.pred && matches(query, a))
        .collect();
    Ok(QueryAnswer {
        holds: !answers.is_empty(),
        answers,
        model,
    })
}
