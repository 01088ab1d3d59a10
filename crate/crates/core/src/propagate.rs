//! Update propagation: UP rules, transition rules, the Magic Updates
//! rewriting, and the computation of induced insertions and deletions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::magic::{adorn_general, magic_rewrite, MagicProgram, Source};
use crate::names::{self, Relation};
use crate::operators::{evaluate_partitioned, iterated_fixpoint, Engine, EvalConfig};
use crate::parser::{Request, RequestKind};
use crate::stratify::{stratification, Partition};
use crate::syntax::{Atom, Database, GroundAtom, Literal, Rule, Sign, Symbol, Term};

/// Insertions and deletions, keyed by the atom's own predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeltaSet {
    pub insertions: BTreeSet<GroundAtom>,
    pub deletions: BTreeSet<GroundAtom>,
}

impl DeltaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(atom: GroundAtom) -> Self {
        DeltaSet {
            insertions: BTreeSet::from([atom]),
            deletions: BTreeSet::new(),
        }
    }

    pub fn delete(atom: GroundAtom) -> Self {
        DeltaSet {
            insertions: BTreeSet::new(),
            deletions: BTreeSet::from([atom]),
        }
    }

    pub fn from_requests(requests: &[Request]) -> Result<Self> {
        let mut out = DeltaSet::new();
        for r in requests {
            if r.kind != RequestKind::BaseUpdate {
                return Err(Error::IneffectiveUpdate(format!("{r} is a view update request")));
            }
            out.add(r.sign, r.atom.clone());
        }
        Ok(out)
    }

    pub fn add(&mut self, sign: Sign, atom: GroundAtom) {
        match sign {
            Sign::Pos => self.insertions.insert(atom),
            Sign::Neg => self.deletions.insert(atom),
        };
    }

    pub fn of(&self, sign: Sign) -> &BTreeSet<GroundAtom> {
        match sign {
            Sign::Pos => &self.insertions,
            Sign::Neg => &self.deletions,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty() && self.deletions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.insertions.len() + self.deletions.len()
    }

    pub fn restrict(&self, keep: impl Fn(&Symbol) -> bool) -> DeltaSet {
        DeltaSet {
            insertions: self.insertions.iter().filter(|a| keep(&a.pred)).cloned().collect(),
            deletions: self.deletions.iter().filter(|a| keep(&a.pred)).cloned().collect(),
        }
    }

    /// `facts` with the deletions removed and the insertions added.
    pub fn apply_to(&self, facts: &BTreeSet<GroundAtom>) -> BTreeSet<GroundAtom> {
        facts
            .difference(&self.deletions)
            .cloned()
            .chain(self.insertions.iter().cloned())
            .collect()
    }

    /// Delta facts `dplus__p(..)` / `dminus__p(..)` encoding this set.
    pub fn delta_facts(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        let enc = |s: Sign| {
            move |a: &GroundAtom| GroundAtom::new(names::delta(s, &a.pred), a.args.clone())
        };
        self.insertions
            .iter()
            .map(enc(Sign::Pos))
            .chain(self.deletions.iter().map(enc(Sign::Neg)))
    }

    /// Reads delta facts back.
    pub fn from_delta_facts<'a>(facts: impl IntoIterator<Item = &'a GroundAtom>) -> Self {
        let mut out = DeltaSet::new();
        for f in facts {
            if let Relation::Delta(sign, inner) = Relation::decode(f.pred.as_str()) {
                if let Relation::User(p) = *inner {
                    out.add(sign, GroundAtom::new(p, f.args.clone()));
                }
            }
        }
        out
    }
}

impl fmt::Display for DeltaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.insertions {
            writeln!(f, "+{a}")?;
        }
        for a in &self.deletions {
            writeln!(f, "-{a}")?;
        }
        Ok(())
    }
}

fn rename(atom: &Atom, pred: Symbol) -> Atom {
    atom.with_pred(pred)
}

fn new_lit(l: &Literal) -> Literal {
    Literal {
        sign: l.sign,
        atom: rename(&l.atom, names::new_state(&l.atom.pred)),
    }
}

/// UP rules for every rule, body literal and update sign.
///
/// For an insertion the side literals refer to the new state and the head is
/// tested against the old state; for a deletion the side literals refer to the
/// old state and the head is tested against the new state. A change of a
/// negated body atom propagates with flipped polarity.
pub fn derive_propagation_rules(rules: &[Rule]) -> Vec<Rule> {
    let mut out = Vec::new();
    for rule in rules {
        let head = &rule.head[0];
        for (i, lit) in rule.body.iter().enumerate() {
            for head_sign in [Sign::Pos, Sign::Neg] {
                let lit_sign = if lit.is_positive() { head_sign } else { head_sign.flip() };
                let mut body = vec![Literal::pos(rename(&lit.atom, names::delta(lit_sign, &lit.atom.pred)))];
                for (j, other) in rule.body.iter().enumerate() {
                    if j != i {
                        body.push(match head_sign {
                            Sign::Pos => new_lit(other),
                            Sign::Neg => other.clone(),
                        });
                    }
                }
                body.push(Literal::neg(match head_sign {
                    Sign::Pos => head.clone(),
                    Sign::Neg => rename(head, names::new_state(&head.pred)),
                }));
                out.push(Rule::definite(rename(head, names::delta(head_sign, &head.pred)), body));
            }
        }
    }
    out
}

fn vars(n: usize) -> Vec<Term> {
    (0..n).map(|i| Term::var(&format!("X{i}"))).collect()
}

/// New-state rules: base relations from the old state and the deltas, derived
/// relations by their renamed definitions.
pub fn derive_transition_rules(rules: &[Rule], base_preds: &BTreeMap<Symbol, usize>) -> Vec<Rule> {
    let mut out = Vec::new();
    for (e, &n) in base_preds {
        let args = vars(n);
        let head = Atom::new(names::new_state(e), args.clone());
        out.push(Rule::definite(
            head.clone(),
            vec![
                Literal::pos(Atom::new(e.clone(), args.clone())),
                Literal::neg(Atom::new(names::delta(Sign::Neg, e), args.clone())),
            ],
        ));
        out.push(Rule::definite(
            head,
            vec![Literal::pos(Atom::new(names::delta(Sign::Pos, e), args))],
        ));
    }
    for r in rules {
        out.push(Rule::definite(
            rename(&r.head[0], names::new_state(&r.head[0].pred)),
            r.body.iter().map(new_lit).collect(),
        ));
    }
    out
}

/// The delta literal of a UP rule as `(pred, sign)` of the changed relation.
fn trigger(rule: &Rule) -> (Symbol, Sign) {
    delta_of(&rule.body[0].atom.pred).expect("UP rule starts with a delta literal")
}

fn delta_of(pred: &Symbol) -> Option<(Symbol, Sign)> {
    match Relation::decode(pred.as_str()) {
        Relation::Delta(s, inner) => match *inner {
            Relation::User(p) => Some((p, s)),
            _ => None,
        },
        _ => None,
    }
}

/// UP rules reachable from the changed `(pred, sign)` pairs.
fn reachable_up_rules(up: &[Rule], seeds: &BTreeSet<(Symbol, Sign)>) -> Vec<Rule> {
    let mut live = seeds.clone();
    loop {
        let before = live.len();
        for r in up {
            if live.contains(&trigger(r)) {
                live.extend(delta_of(&r.head[0].pred));
            }
        }
        if live.len() == before {
            break;
        }
    }
    up.iter().filter(|r| live.contains(&trigger(r))).cloned().collect()
}

/// Transition rules whose heads are needed by `rules`, transitively.
fn needed_transition_rules(rules: &[Rule], transition: &[Rule]) -> Vec<Rule> {
    let mut needed: BTreeSet<Symbol> = BTreeSet::new();
    let mut frontier: Vec<Symbol> = rules
        .iter()
        .flat_map(|r| r.body.iter().map(|l| l.atom.pred.clone()))
        .collect();
    while let Some(p) = frontier.pop() {
        if !matches!(Relation::decode(p.as_str()), Relation::New(_)) || !needed.insert(p.clone()) {
            continue;
        }
        for r in transition.iter().filter(|r| r.head[0].pred == p) {
            frontier.extend(r.body.iter().map(|l| l.atom.pred.clone()));
        }
    }
    transition
        .iter()
        .filter(|r| needed.contains(&r.head[0].pred))
        .cloned()
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    Naive,
    #[default]
    Magic,
}

/// The rule system evaluated for one propagation run.
#[derive(Clone, Debug)]
pub struct PropagationProgram {
    pub up_rules: Vec<Rule>,
    pub transition_rules: Vec<Rule>,
    /// Evaluated rules with their layering.
    pub partition: Partition,
    /// Extra input facts beyond `F` and the delta seeds.
    pub seeds: BTreeSet<GroundAtom>,
}

impl PropagationProgram {
    pub fn rules(&self) -> Vec<Rule> {
        self.partition.rules().cloned().collect()
    }
}

fn base_arities(db: &Database, update: &DeltaSet) -> Result<BTreeMap<Symbol, usize>> {
    let arities = db.arities()?;
    let derived = db.derived_preds();
    let mut out: BTreeMap<Symbol, usize> = arities
        .into_iter()
        .filter(|(p, _)| !derived.contains(p))
        .collect();
    for a in update.insertions.iter().chain(&update.deletions) {
        out.entry(a.pred.clone()).or_insert(a.args.len());
    }
    Ok(out)
}

/// Rejects updates that touch derived relations or do not change `F`.
pub fn check_true_update(db: &Database, update: &DeltaSet) -> Result<()> {
    let derived = db.derived_preds();
    let arities = db.arities()?;
    for (sign, atoms) in [(Sign::Pos, &update.insertions), (Sign::Neg, &update.deletions)] {
        for a in atoms {
            if derived.contains(&a.pred) {
                return Err(Error::IneffectiveUpdate(format!("{a} is over a derived relation")));
            }
            if let Some(&n) = arities.get(&a.pred) {
                if n != a.args.len() {
                    return Err(Error::ArityClash {
                        pred: a.pred.to_string(),
                        expected: n,
                        found: a.args.len(),
                    });
                }
            }
            let present = db.facts.contains(a);
            match sign {
                Sign::Pos if present => {
                    return Err(Error::IneffectiveUpdate(format!("{a} is already present")))
                }
                Sign::Neg if !present => {
                    return Err(Error::IneffectiveUpdate(format!("{a} is not present")))
                }
                _ => {}
            }
        }
    }
    if let Some(a) = update.insertions.intersection(&update.deletions).next() {
        return Err(Error::IneffectiveUpdate(format!("{a} is both inserted and deleted")));
    }
    Ok(())
}

/// Builds the rule system for propagating `update` in the given mode.
pub fn propagation_program(db: &Database, update: &DeltaSet, mode: Mode) -> Result<PropagationProgram> {
    let seeds: BTreeSet<(Symbol, Sign)> = update
        .insertions
        .iter()
        .map(|a| (a.pred.clone(), Sign::Pos))
        .chain(update.deletions.iter().map(|a| (a.pred.clone(), Sign::Neg)))
        .collect();
    let up = reachable_up_rules(&derive_propagation_rules(&db.rules), &seeds);
    let all_transition = derive_transition_rules(&db.rules, &base_arities(db, update)?);
    let transition = needed_transition_rules(&up, &all_transition);
    let full: Vec<Rule> = db
        .rules
        .iter()
        .chain(&up)
        .chain(&transition)
        .cloned()
        .collect();
    let strata = stratification(&full).map_err(|c| Error::Unstratifiable(c.to_string()))?;
    match mode {
        Mode::Naive => Ok(PropagationProgram {
            up_rules: up,
            transition_rules: transition,
            partition: strata.partition,
            seeds: BTreeSet::new(),
        }),
        Mode::Magic => {
            let program = magic_updates_rewrite(db, &up, &transition, strata.levels)?;
            Ok(PropagationProgram {
                up_rules: up,
                transition_rules: transition,
                partition: program.partition()?,
                seeds: program.seeds,
            })
        }
    }
}

/// Treats the delta literal of each UP rule as a query on the rest of its
/// body: state relations (old and new) are evaluated only for the bindings
/// the propagated changes supply.
pub fn magic_updates_rewrite(
    db: &Database,
    up_rules: &[Rule],
    transition_rules: &[Rule],
    levels: BTreeMap<Symbol, usize>,
) -> Result<MagicProgram> {
    let program: Vec<Rule> = db.rules.iter().chain(transition_rules).cloned().collect();
    let source = Source {
        program: &program,
        adornable: program.iter().flat_map(|r| r.head_preds().cloned()).collect(),
        levels,
    };
    let adorned = adorn_general(&source, up_rules, &[])?;
    Ok(magic_rewrite(&adorned, None))
}

/// Outcome of a propagation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propagation {
    /// The base update together with every induced change.
    pub deltas: DeltaSet,
    /// Atoms materialized per internal relation, excluding the input facts.
    pub generated: BTreeMap<Symbol, usize>,
}

impl Propagation {
    /// Generated-fact counts grouped by relation with adornments dropped.
    /// Derived relations read from the unchanged database show as `p^old`.
    pub fn stats(&self, db: &Database) -> BTreeMap<String, usize> {
        let derived = db.derived_preds();
        let mut out = BTreeMap::new();
        for (pred, n) in &self.generated {
            let rel = Relation::decode(pred.as_str()).unadorned();
            let name = match &rel {
                Relation::User(p) if derived.contains(p) => format!("{p}^old"),
                other => other.to_string(),
            };
            *out.entry(name).or_insert(0) += n;
        }
        out
    }

    pub fn total(&self) -> usize {
        self.generated.values().sum()
    }
}

/// Computes all changes induced by `update`.
pub fn propagate_update(db: &Database, update: &DeltaSet, mode: Mode, cfg: &EvalConfig) -> Result<Propagation> {
    propagate_with(db, update, mode, Engine::Soft, cfg)
}

pub fn propagate_with(
    db: &Database,
    update: &DeltaSet,
    mode: Mode,
    engine: Engine,
    cfg: &EvalConfig,
) -> Result<Propagation> {
    check_true_update(db, update)?;
    let program = propagation_program(db, update, mode)?;
    let facts: BTreeSet<GroundAtom> = db
        .facts
        .iter()
        .cloned()
        .chain(update.delta_facts())
        .chain(program.seeds.iter().cloned())
        .collect();
    let model = match mode {
        Mode::Naive => iterated_fixpoint(&facts, &program.rules(), cfg)?,
        Mode::Magic => evaluate_partitioned(&facts, &program.partition, engine, cfg)?,
    };
    let induced = DeltaSet::from_delta_facts(&model.atoms());
    let derived = db.derived_preds();
    let induced = induced.restrict(|p| derived.contains(p));
    let deltas = DeltaSet {
        insertions: update.insertions.union(&induced.insertions).cloned().collect(),
        deletions: update.deletions.union(&induced.deletions).cloned().collect(),
    };
    Ok(Propagation {
        deltas,
        generated: model.generated,
    })
}

/// The oracle: materialize before and after, and take the differences.
pub fn recompute_deltas(db: &Database, update: &DeltaSet, cfg: &EvalConfig) -> Result<DeltaSet> {
    let before = iterated_fixpoint(&db.facts, &db.rules, cfg)?.atoms();
    let after = iterated_fixpoint(&update.apply_to(&db.facts), &db.rules, cfg)?.atoms();
    Ok(DeltaSet {
        insertions: after.difference(&before).cloned().collect(),
        deletions: before.difference(&after).cloned().collect(),
    })
}
