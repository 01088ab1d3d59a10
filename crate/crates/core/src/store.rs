//! Disjunctive facts, subsumption-free fact stores and minimal models.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::syntax::{Atom, GroundAtom, Literal, Rule, Symbol, Term};

/// Default bound on distinct atoms handed to [`min_models`].
pub const DEFAULT_MODEL_CAP: usize = 20;

/// A nonempty disjunction of ground atoms, kept as a sorted set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DisjunctiveFact(BTreeSet<GroundAtom>);

impl DisjunctiveFact {
    /// Returns `None` for the empty disjunction, which stands for `false`.
    pub fn new(atoms: impl IntoIterator<Item = GroundAtom>) -> Option<Self> {
        let set: BTreeSet<_> = atoms.into_iter().collect();
        (!set.is_empty()).then_some(DisjunctiveFact(set))
    }

    pub fn definite(atom: GroundAtom) -> Self {
        DisjunctiveFact(BTreeSet::from([atom]))
    }

    pub fn is_definite(&self) -> bool {
        self.0.len() == 1
    }

    pub fn as_definite(&self) -> Option<&GroundAtom> {
        if self.is_definite() {
            self.0.iter().next()
        } else {
            None
        }
    }

    pub fn atoms(&self) -> &BTreeSet<GroundAtom> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; the empty disjunction is not representable.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.0.contains(atom)
    }

    pub fn subsumes(&self, other: &DisjunctiveFact) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Debug for DisjunctiveFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DisjunctiveFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A subsumption-free set of disjunctive facts plus the `false` marker.
///
/// Stores are values: every operator returns a fresh store.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FactStore {
    facts: BTreeSet<DisjunctiveFact>,
    inconsistent: bool,
}

impl FactStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store from definite atoms (no reduction needed).
    pub fn from_atoms(atoms: impl IntoIterator<Item = GroundAtom>) -> Self {
        FactStore {
            facts: atoms.into_iter().map(DisjunctiveFact::definite).collect(),
            inconsistent: false,
        }
    }

    pub fn from_facts(facts: impl IntoIterator<Item = DisjunctiveFact>) -> Self {
        red(facts)
    }

    pub fn inconsistent() -> Self {
        FactStore {
            facts: BTreeSet::new(),
            inconsistent: true,
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn facts(&self) -> &BTreeSet<DisjunctiveFact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.facts.iter().all(DisjunctiveFact::is_definite)
    }

    pub fn contains(&self, fact: &DisjunctiveFact) -> bool {
        self.facts.contains(fact)
    }

    pub fn contains_atom(&self, atom: &GroundAtom) -> bool {
        self.facts.contains(&DisjunctiveFact::definite(atom.clone()))
    }

    /// The definite facts as atoms.
    pub fn definite_atoms(&self) -> BTreeSet<GroundAtom> {
        self.facts
            .iter()
            .filter_map(|f| f.as_definite().cloned())
            .collect()
    }

    /// Every atom occurring in some stored fact.
    pub fn atom_universe(&self) -> BTreeSet<GroundAtom> {
        self.facts
            .iter()
            .flat_map(|f| f.atoms().iter().cloned())
            .collect()
    }

    /// `red(self ∪ extra)`.
    pub fn extend(&self, extra: impl IntoIterator<Item = DisjunctiveFact>) -> FactStore {
        let mut out = red(self.facts.iter().cloned().chain(extra));
        out.inconsistent |= self.inconsistent;
        out
    }

    pub fn mark_inconsistent(&self) -> FactStore {
        FactStore {
            facts: self.facts.clone(),
            inconsistent: true,
        }
    }

    /// True if every fact of `other` is subsumed by some fact of `self`.
    pub fn entails_all(&self, other: &FactStore) -> bool {
        other
            .facts
            .iter()
            .all(|g| self.facts.iter().any(|f| f.subsumes(g)))
    }

    /// Facts restricted to predicates accepted by `keep`; a fact survives only
    /// if all of its atoms are kept.
    pub fn restrict(&self, keep: impl Fn(&Symbol) -> bool) -> FactStore {
        FactStore {
            facts: self
                .facts
                .iter()
                .filter(|f| f.atoms().iter().all(|a| keep(&a.pred)))
                .cloned()
                .collect(),
            inconsistent: self.inconsistent,
        }
    }
}

impl fmt::Debug for FactStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inconsistent {
            write!(f, "false ")?;
        }
        f.debug_set().entries(self.facts.iter()).finish()
    }
}

/// Removes duplicates and every fact that is a proper superset of another.
pub fn red(facts: impl IntoIterator<Item = DisjunctiveFact>) -> FactStore {
    let mut all: Vec<DisjunctiveFact> = facts.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    all.sort_by_key(|f| f.len());
    let mut definite: HashSet<GroundAtom> = HashSet::new();
    let mut kept_wide: Vec<DisjunctiveFact> = Vec::new();
    let mut out = BTreeSet::new();
    for f in all {
        if let Some(a) = f.as_definite() {
            definite.insert(a.clone());
            out.insert(f);
            continue;
        }
        if f.atoms().iter().any(|a| definite.contains(a)) {
            continue;
        }
        if kept_wide.iter().any(|k| k.subsumes(&f)) {
            continue;
        }
        kept_wide.push(f.clone());
        out.insert(f);
    }
    FactStore {
        facts: out,
        inconsistent: false,
    }
}

/// All subset-minimal atom sets hitting every fact of `store`.
pub fn min_models(store: &FactStore) -> Result<Vec<BTreeSet<GroundAtom>>> {
    min_models_capped(store, DEFAULT_MODEL_CAP)
}

pub fn min_models_capped(store: &FactStore, cap: usize) -> Result<Vec<BTreeSet<GroundAtom>>> {
    if store.is_inconsistent() {
        return Err(Error::Inconsistent);
    }
    let definite = store.definite_atoms();
    // After red no wide clause mentions a definite atom, but stay robust to
    // stores assembled elsewhere.
    let clauses: Vec<Vec<GroundAtom>> = store
        .facts()
        .iter()
        .filter(|f| !f.is_definite() && !f.atoms().iter().any(|a| definite.contains(a)))
        .map(|f| f.atoms().iter().cloned().collect())
        .collect();
    let atoms: BTreeSet<&GroundAtom> = clauses.iter().flatten().collect();
    if atoms.len() > cap {
        return Err(Error::ModelCap {
            atoms: atoms.len(),
            cap,
        });
    }
    Ok(minimal_hitting_sets(&clauses)
        .into_iter()
        .map(|h| h.union(&definite).cloned().collect())
        .collect())
}

/// Minimal models taken level by level: atoms of lower level are minimized
/// first, and each choice fixes which clauses the next level must satisfy.
/// With the predicate strata as levels these are the perfect models a model
/// state describes; plain [`min_models`] may also return models that are
/// minimal overall but not at a lower stratum.
pub fn prioritized_models(
    store: &FactStore,
    level: impl Fn(&Symbol) -> usize,
    cap: usize,
) -> Result<Vec<BTreeSet<GroundAtom>>> {
    if store.is_inconsistent() {
        return Err(Error::Inconsistent);
    }
    let definite = store.definite_atoms();
    let clauses: Vec<&DisjunctiveFact> = store
        .facts()
        .iter()
        .filter(|f| !f.is_definite() && !f.atoms().iter().any(|a| definite.contains(a)))
        .collect();
    let atoms: BTreeSet<&GroundAtom> = clauses.iter().flat_map(|f| f.atoms()).collect();
    if atoms.len() > cap {
        return Err(Error::ModelCap {
            atoms: atoms.len(),
            cap,
        });
    }
    let top = |f: &DisjunctiveFact| f.atoms().iter().map(|a| level(&a.pred)).max().unwrap_or(0);
    let levels: BTreeSet<usize> = clauses.iter().map(|f| top(f)).collect();
    let mut partial = vec![definite];
    for k in levels {
        let mut next = BTreeSet::new();
        for m in &partial {
            let open: Vec<Vec<GroundAtom>> = clauses
                .iter()
                .filter(|f| top(f) == k && !f.atoms().iter().any(|a| m.contains(a)))
                .map(|f| f.atoms().iter().filter(|a| level(&a.pred) == k).cloned().collect())
                .collect();
            for h in minimal_hitting_sets(&open) {
                next.insert(m.union(&h).cloned().collect::<BTreeSet<_>>());
            }
        }
        partial = next.into_iter().collect();
    }
    Ok(partial)
}

/// Subset-minimal sets meeting every clause. Branching on the shortest open
/// clause, branch `j` excludes the atoms tried before it, so each candidate is
/// visited once; a branch is cut when some chosen atom is no longer the only
/// chosen one in any clause.
fn minimal_hitting_sets(clauses: &[Vec<GroundAtom>]) -> Vec<BTreeSet<GroundAtom>> {
    fn go(
        clauses: &[Vec<GroundAtom>],
        chosen: &mut BTreeSet<GroundAtom>,
        banned: &mut Vec<GroundAtom>,
        out: &mut BTreeSet<BTreeSet<GroundAtom>>,
    ) {
        let open = clauses
            .iter()
            .filter(|c| !c.iter().any(|a| chosen.contains(a)))
            .min_by_key(|c| c.iter().filter(|a| !banned.contains(a)).count());
        let Some(clause) = open else {
            out.insert(chosen.clone());
            return;
        };
        let options: Vec<GroundAtom> = clause.iter().filter(|a| !banned.contains(a)).cloned().collect();
        let mark = banned.len();
        for a in options {
            // Private clauses are only ever lost, so prune as soon as one
            // chosen atom has none.
            chosen.insert(a.clone());
            let viable = chosen.iter().all(|b| {
                clauses
                    .iter()
                    .any(|c| c.contains(b) && c.iter().filter(|x| chosen.contains(*x)).count() == 1)
            });
            if viable {
                go(clauses, chosen, banned, out);
            }
            chosen.remove(&a);
            banned.push(a);
        }
        banned.truncate(mark);
    }
    let mut out = BTreeSet::new();
    go(clauses, &mut BTreeSet::new(), &mut Vec::new(), &mut out);
    out.into_iter().collect()
}

pub(crate) type Subst = BTreeMap<Symbol, Symbol>;

/// Extends `subst` so that `pattern` matches `ground`.
pub(crate) fn match_atom(pattern: &Atom, ground: &GroundAtom, subst: &mut Subst) -> bool {
    if pattern.pred != ground.pred || pattern.args.len() != ground.args.len() {
        return false;
    }
    let mut added = Vec::new();
    for (t, c) in pattern.args.iter().zip(&ground.args) {
        match t {
            Term::Const(k) => {
                if k != c {
                    for v in added {
                        subst.remove(&v);
                    }
                    return false;
                }
            }
            Term::Var(v) => match subst.get(v) {
                Some(bound) if bound != c => {
                    for v in added {
                        subst.remove(&v);
                    }
                    return false;
                }
                Some(_) => {}
                None => {
                    subst.insert(v.clone(), c.clone());
                    added.push(v.clone());
                }
            },
        }
    }
    true
}

pub(crate) fn apply(atom: &Atom, subst: &Subst) -> Atom {
    Atom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => subst.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
                Term::Const(_) => t.clone(),
            })
            .collect(),
    }
}

/// All ground instances of `rules` whose positive body atoms occur somewhere in
/// the facts of `store`.
pub fn ground_instances(rules: &[Rule], store: &FactStore) -> Vec<Rule> {
    let mut by_pred: BTreeMap<&Symbol, Vec<GroundAtom>> = BTreeMap::new();
    let universe = store.atom_universe();
    for a in &universe {
        by_pred.entry(&a.pred).or_default().push(a.clone());
    }
    let mut out = BTreeSet::new();
    for rule in rules {
        let positives: Vec<&Atom> = rule.positive_body().collect();
        let mut subst = Subst::new();
        enumerate(&positives, &by_pred, &mut subst, &mut |s| {
            out.insert(Rule {
                head: rule.head.iter().map(|h| apply(h, s)).collect(),
                body: rule
                    .body
                    .iter()
                    .map(|l| Literal {
                        sign: l.sign,
                        atom: apply(&l.atom, s),
                    })
                    .collect(),
            });
        });
    }
    out.into_iter().collect()
}

fn enumerate(
    positives: &[&Atom],
    by_pred: &BTreeMap<&Symbol, Vec<GroundAtom>>,
    subst: &mut Subst,
    emit: &mut dyn FnMut(&Subst),
) {
    let Some((first, rest)) = positives.split_first() else {
        emit(subst);
        return;
    };
    let Some(candidates) = by_pred.get(&first.pred) else {
        return;
    };
    for c in candidates {
        let before = subst.clone();
        if match_atom(first, c, subst) {
            enumerate(rest, by_pred, subst, emit);
        }
        *subst = before;
    }
}
