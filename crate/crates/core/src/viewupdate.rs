//! View updating: VU rules, VU transition rules, and a breadth-first search
//! alternating a top-down (disjunctive) phase with a bottom-up (propagation)
//! phase until the request holds without side effects.
//!
//! A search node carries the base updates accumulated on its path, the view
//! update requests it has committed to, and the requests still pending. One
//! expansion is one round:
//!
//! 1. top-down: the VU rules are evaluated with the general soft operator over
//!    the current state plus the pending requests; each minimal model of the
//!    resulting state is one alternative,
//! 2. its base requests become tentative base updates,
//! 3. bottom-up: the accumulated updates are propagated against the original
//!    database, and the VU transition rules turn violated constraints and an
//!    unsatisfied root request into new pending requests.
//!
//! A node without pending requests is a solution. A node is `false` when it
//! commits to both `+x` and `-x`, or when an alternative yields no base update.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::names::{self, Relation};
use crate::operators::{evaluate_partitioned, general_soft_fixpoint, iterated_fixpoint, split_models, Engine, EvalConfig};
use crate::parser::{Request, RequestKind};
use crate::propagate::{propagation_program, DeltaSet, Mode};
use crate::store::{min_models_capped, DisjunctiveFact, FactStore};
use crate::stratify::{stratification, Partition};
use crate::syntax::{Atom, Database, GroundAtom, Literal, Rule, Sign, Symbol, Term};

const FRESH_PREFIX: &str = "c_new_";

/// A request to make `atom` derivable (`Pos`) or underivable (`Neg`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VURequest {
    pub sign: Sign,
    pub atom: GroundAtom,
}

impl VURequest {
    pub fn insert(atom: GroundAtom) -> Self {
        VURequest { sign: Sign::Pos, atom }
    }

    pub fn delete(atom: GroundAtom) -> Self {
        VURequest { sign: Sign::Neg, atom }
    }

    pub fn from_request(r: &Request) -> Self {
        VURequest {
            sign: r.sign,
            atom: r.atom.clone(),
        }
    }

    fn nabla_fact(&self) -> GroundAtom {
        GroundAtom::new(names::nabla(self.sign, &self.atom.pred), self.atom.args.clone())
    }

    fn goal_fact(&self) -> GroundAtom {
        GroundAtom::new(names::goal(self.sign, &self.atom.pred), self.atom.args.clone())
    }
}

impl fmt::Display for VURequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign == Sign::Pos { "nabla+" } else { "nabla-" };
        write!(f, "{s}{}", self.atom)
    }
}

impl From<&Request> for VURequest {
    fn from(r: &Request) -> Self {
        debug_assert_eq!(r.kind, RequestKind::ViewUpdate);
        VURequest::from_request(r)
    }
}

/// Base insertions and deletions realizing a view update.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Realization {
    pub insertions: BTreeSet<GroundAtom>,
    pub deletions: BTreeSet<GroundAtom>,
}

impl Realization {
    pub fn len(&self) -> usize {
        self.insertions.len() + self.deletions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_delta(&self) -> DeltaSet {
        DeltaSet {
            insertions: self.insertions.clone(),
            deletions: self.deletions.clone(),
        }
    }

    pub fn from_delta(d: &DeltaSet) -> Self {
        Realization {
            insertions: d.insertions.clone(),
            deletions: d.deletions.clone(),
        }
    }

    fn updates(&self) -> Vec<(Sign, GroundAtom)> {
        self.insertions
            .iter()
            .map(|a| (Sign::Pos, a.clone()))
            .chain(self.deletions.iter().map(|a| (Sign::Neg, a.clone())))
            .collect()
    }

    /// Renames fresh constants to `c_new_1, c_new_2, ...` in order of first
    /// occurrence, so realizations that differ only in fresh names compare
    /// equal.
    pub fn canonical(&self) -> Realization {
        let fresh: Vec<Symbol> = {
            let mut seen = Vec::new();
            for (_, a) in self.updates() {
                for c in &a.args {
                    if is_fresh(c) && !seen.contains(c) {
                        seen.push(c.clone());
                    }
                }
            }
            seen
        };
        if fresh.is_empty() {
            return self.clone();
        }
        // Try every assignment of the canonical names and keep the least
        // result; sets are tiny.
        let targets: Vec<Symbol> = (1..=fresh.len()).map(fresh_constant).collect();
        let mut best: Option<Realization> = None;
        permutations(targets.len(), &mut |perm| {
            let map: BTreeMap<&Symbol, &Symbol> = fresh.iter().zip(perm.iter().map(|&i| &targets[i])).collect();
            let rename = |a: &GroundAtom| {
                GroundAtom::new(
                    a.pred.clone(),
                    a.args.iter().map(|c| map.get(c).map_or_else(|| c.clone(), |t| (*t).clone())).collect(),
                )
            };
            let r = Realization {
                insertions: self.insertions.iter().map(rename).collect(),
                deletions: self.deletions.iter().map(rename).collect(),
            };
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        });
        best.expect("at least one permutation")
    }
}

fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == used.len() {
            f(cur);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    go(&mut Vec::new(), &mut vec![false; n], f);
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.insertions {
            writeln!(f, "insert {a}")?;
        }
        for a in &self.deletions {
            writeln!(f, "delete {a}")?;
        }
        Ok(())
    }
}

pub fn fresh_constant(i: usize) -> Symbol {
    Symbol::from(format!("{FRESH_PREFIX}{i}"))
}

pub fn is_fresh(c: &Symbol) -> bool {
    fresh_index(c).is_some()
}

fn fresh_index(c: &Symbol) -> Option<usize> {
    c.as_str().strip_prefix(FRESH_PREFIX)?.parse().ok()
}

fn rename(atom: &Atom, pred: Symbol) -> Atom {
    atom.with_pred(pred)
}

fn nabla_atom(sign: Sign, atom: &Atom) -> Atom {
    rename(atom, names::nabla(sign, &atom.pred))
}

/// The request a body literal receives when its rule must become true.
fn requested(lit: &Literal) -> Atom {
    match lit.sign {
        Sign::Pos => nabla_atom(Sign::Pos, &lit.atom),
        Sign::Neg => nabla_atom(Sign::Neg, &lit.atom),
    }
}

/// Test on the current state that makes the request effective.
fn still_open(lit: &Literal) -> Literal {
    match lit.sign {
        Sign::Pos => Literal::neg(lit.atom.clone()),
        Sign::Neg => Literal::pos(lit.atom.clone()),
    }
}

fn head_vars(head: &Atom) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::new();
    for v in head.vars() {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

fn existentials(rule: &Rule) -> Vec<Symbol> {
    let hv = head_vars(&rule.head[0]);
    let mut out: Vec<Symbol> = Vec::new();
    for l in &rule.body {
        for v in l.atom.vars() {
            if !hv.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
    }
    out
}

fn is_distinct_vars(head: &Atom) -> bool {
    let mut seen = BTreeSet::new();
    head.args.iter().all(|t| match t {
        Term::Var(v) => seen.insert(v.clone()),
        Term::Const(_) => false,
    })
}

fn product(domain: &[Symbol], k: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                domain.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// VU rules for the definite rules `rules`. Variables of a body that do not
/// occur in the head are chosen from `domain`, one disjunct per choice.
///
/// For a `+` request on `p` with several rules, the head is a disjunction of
/// one alternative per rule; an alternative is the request on the rule's only
/// body literal when that needs no further binding, and a selector atom
/// otherwise. Each selected rule requests every body literal that does not
/// hold yet. For a `-` request, every true instance of every rule of `p`
/// yields a disjunction of requests falsifying one of its body literals.
pub fn derive_vu_rules(rules: &[Rule], domain: &[Symbol]) -> Vec<Rule> {
    let mut by_pred: BTreeMap<&Symbol, Vec<&Rule>> = BTreeMap::new();
    for r in rules {
        by_pred.entry(&r.head[0].pred).or_default().push(r);
    }
    let mut out = Vec::new();
    for (pred, defs) in &by_pred {
        let arity = defs[0].head[0].arity();
        let xs: Vec<Term> = (0..arity).map(|i| Term::var(&format!("X{i}"))).collect();
        let request = Atom::new(names::nabla(Sign::Pos, pred), xs.clone());

        // Guard atom per rule for the `+` direction, plus the disjunction.
        let mut alternatives: Vec<Atom> = Vec::new();
        let mut guards: Vec<Option<Atom>> = Vec::new();
        for (i, r) in defs.iter().enumerate() {
            let head = &r.head[0];
            let ex = existentials(r);
            let direct = defs.len() > 1 && r.body.len() == 1 && ex.is_empty() && is_distinct_vars(head);
            if direct {
                let to_x: BTreeMap<&Symbol, Term> = head
                    .args
                    .iter()
                    .zip(&xs)
                    .filter_map(|(t, x)| match t {
                        Term::Var(v) => Some((v, x.clone())),
                        Term::Const(_) => None,
                    })
                    .collect();
                let a = requested(&r.body[0]);
                alternatives.push(Atom::new(
                    a.pred.clone(),
                    a.args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => to_x[v].clone(),
                            c => c.clone(),
                        })
                        .collect(),
                ));
                guards.push(None);
            } else if defs.len() == 1 && ex.is_empty() {
                guards.push(Some(rename(head, names::nabla(Sign::Pos, pred))));
            } else {
                let sel = names::selector(Sign::Pos, pred, i);
                for choice in product(domain, ex.len()) {
                    let mut args = xs.clone();
                    args.extend(choice.into_iter().map(Term::Const));
                    alternatives.push(Atom::new(sel.clone(), args));
                }
                let mut args = head.args.clone();
                args.extend(ex.iter().map(|v| Term::Var(v.clone())));
                guards.push(Some(Atom::new(sel, args)));
            }
        }
        if !alternatives.is_empty() {
            out.push(Rule::new(alternatives, vec![Literal::pos(request)]));
        }
        for (r, guard) in defs.iter().zip(guards) {
            let Some(guard) = guard else { continue };
            for lit in &r.body {
                out.push(Rule::definite(
                    requested(lit),
                    vec![Literal::pos(guard.clone()), still_open(lit)],
                ));
            }
        }

        // `-` direction.
        for r in defs {
            let head = &r.head[0];
            let mut body = vec![Literal::pos(rename(head, names::nabla(Sign::Neg, pred)))];
            body.extend(r.body.iter().cloned());
            let heads: Vec<Atom> = r
                .body
                .iter()
                .map(|l| match l.sign {
                    Sign::Pos => nabla_atom(Sign::Neg, &l.atom),
                    Sign::Neg => nabla_atom(Sign::Pos, &l.atom),
                })
                .collect();
            out.push(Rule::new(dedup(heads), body));
        }
    }
    out
}

fn dedup(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::new();
    for a in atoms {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

/// Keeps the VU rules reachable from the given request predicates.
pub fn relevant_vu_rules(vu_rules: &[Rule], seeds: &BTreeSet<Symbol>) -> Vec<Rule> {
    let mut live = seeds.clone();
    loop {
        let before = live.len();
        for r in vu_rules {
            if live.contains(&r.body[0].atom.pred) {
                live.extend(r.head_preds().cloned());
            }
        }
        if live.len() == before {
            break;
        }
    }
    vu_rules
        .iter()
        .filter(|r| live.contains(&r.body[0].atom.pred))
        .cloned()
        .collect()
}

/// Rules turning the outcome of propagation into new requests: a deleted
/// constraint atom is requested again, and so is the root request while it
/// does not hold.
pub fn derive_vu_transition_rules(constraints: &BTreeSet<GroundAtom>, roots: &[(Sign, Symbol, usize)]) -> Vec<Rule> {
    let mut out = Vec::new();
    for ic in constraints {
        let a = ic.to_atom();
        out.push(Rule::definite(
            nabla_atom(Sign::Pos, &a),
            vec![Literal::pos(rename(&a, names::delta(Sign::Neg, &a.pred)))],
        ));
    }
    for (sign, pred, arity) in roots {
        let xs: Vec<Term> = (0..*arity).map(|i| Term::var(&format!("X{i}"))).collect();
        out.push(Rule::definite(
            Atom::new(names::nabla(*sign, pred), xs.clone()),
            vec![
                Literal::pos(Atom::new(names::goal(*sign, pred), xs.clone())),
                Literal::neg(Atom::new(names::delta(*sign, pred), xs)),
            ],
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Policy {
    /// Stop at the first depth that yields a minimal realization.
    #[default]
    FirstDepth,
    /// Explore every node up to the depth bound.
    Exhaustive,
}

/// How the top-down phase obtains its alternatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TopDown {
    /// Minimal models by case splitting on disjunctive heads.
    #[default]
    Split,
    /// Minimal models of the state computed by the general soft operator.
    /// Same alternatives; the state grows quickly with the domain.
    State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VuConfig {
    pub max_depth: usize,
    pub policy: Policy,
    pub top_down: TopDown,
    pub eval: EvalConfig,
}

/// Model cap for the top-down phase, whose disjunctions range over the
/// domain.
pub const VU_MODEL_CAP: usize = 64;

impl Default for VuConfig {
    fn default() -> Self {
        VuConfig {
            max_depth: 10,
            policy: Policy::FirstDepth,
            top_down: TopDown::default(),
            eval: EvalConfig {
                model_cap: VU_MODEL_CAP,
                ..EvalConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Solution,
    /// A solution below the depth at which the search stopped.
    Unreturned,
    False(String),
}

/// One node of the search tree, as recorded in the log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Requests this node committed to in its top-down phase.
    pub chosen: BTreeSet<VURequest>,
    /// Tentative base updates accumulated on the path.
    pub updates: DeltaSet,
    /// Requests raised by its bottom-up phase.
    pub pending: BTreeSet<VURequest>,
    pub status: NodeStatus,
}

impl fmt::Display for SearchNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} depth {}", self.id, self.depth)?;
        if let Some(p) = self.parent {
            write!(f, " from #{p}")?;
        }
        let list = |xs: &BTreeSet<VURequest>| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        if !self.chosen.is_empty() {
            write!(f, " chose [{}]", list(&self.chosen))?;
        }
        let ups: Vec<String> = self
            .updates
            .insertions
            .iter()
            .map(|a| format!("+{a}"))
            .chain(self.updates.deletions.iter().map(|a| format!("-{a}")))
            .collect();
        write!(f, " updates {{{}}}", ups.join(", "))?;
        if !self.pending.is_empty() {
            write!(f, " pending [{}]", list(&self.pending))?;
        }
        match &self.status {
            NodeStatus::Open => write!(f, " open"),
            NodeStatus::Solution => write!(f, " solution"),
            NodeStatus::Unreturned => write!(f, " solution (deeper, not returned)"),
            NodeStatus::False(why) => write!(f, " false: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Realizations(Vec<Realization>),
    /// Every branch was refuted before the depth bound.
    NoRealization,
    /// Open branches remained at the depth bound.
    DepthExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewUpdateResult {
    pub outcome: Outcome,
    pub log: Vec<SearchNode>,
}

impl ViewUpdateResult {
    pub fn realizations(&self) -> &[Realization] {
        match &self.outcome {
            Outcome::Realizations(r) => r,
            _ => &[],
        }
    }
}

struct Work {
    id: usize,
    depth: usize,
    updates: DeltaSet,
    committed: BTreeSet<VURequest>,
    pending: BTreeSet<VURequest>,
}

struct Solver<'a> {
    db: &'a Database,
    request: &'a VURequest,
    cfg: &'a VuConfig,
    derived: BTreeSet<Symbol>,
    rule_constants: BTreeSet<Symbol>,
    max_existentials: usize,
    log: Vec<SearchNode>,
}

impl<'a> Solver<'a> {
    fn new(db: &'a Database, request: &'a VURequest, cfg: &'a VuConfig) -> Self {
        let mut rule_constants = db.constants();
        rule_constants.extend(request.atom.args.iter().cloned());
        Solver {
            db,
            request,
            cfg,
            derived: db.derived_preds(),
            rule_constants,
            max_existentials: db.rules.iter().map(|r| existentials(r).len()).max().unwrap_or(0),
            log: Vec::new(),
        }
    }

    fn record(&mut self, parent: Option<usize>, depth: usize, chosen: BTreeSet<VURequest>, updates: DeltaSet, pending: BTreeSet<VURequest>, status: NodeStatus) -> usize {
        let id = self.log.len();
        self.log.push(SearchNode {
            id,
            parent,
            depth,
            chosen,
            updates,
            pending,
            status,
        });
        id
    }

    /// Alternative request sets from the top-down phase.
    fn top_down(&self, facts: &BTreeSet<GroundAtom>, pending: &BTreeSet<VURequest>) -> Result<Vec<BTreeSet<VURequest>>> {
        let model = iterated_fixpoint(facts, &self.db.rules, &self.cfg.eval)?.atoms();
        let mut domain: BTreeSet<Symbol> = self.rule_constants.clone();
        for a in facts {
            domain.extend(a.args.iter().cloned());
        }
        let next_fresh = domain.iter().filter_map(fresh_index).max().unwrap_or(0) + 1;
        for i in 0..self.max_existentials {
            domain.insert(fresh_constant(next_fresh + i));
        }
        let domain: Vec<Symbol> = domain.into_iter().collect();
        let seeds: BTreeSet<Symbol> = pending.iter().map(|r| names::nabla(r.sign, &r.atom.pred)).collect();
        let rules = relevant_vu_rules(&derive_vu_rules(&self.db.rules, &domain), &seeds);
        let facts: BTreeSet<GroundAtom> = model.into_iter().chain(pending.iter().map(VURequest::nabla_fact)).collect();
        let models = match self.cfg.top_down {
            TopDown::Split => split_models(&facts, &rules, &self.cfg.eval)?,
            TopDown::State => {
                let partition = stratification(&rules)
                    .map_err(|c| Error::Unstratifiable(c.to_string()))?
                    .partition;
                let state = general_soft_fixpoint(&partition, &FactStore::from_atoms(facts), &self.cfg.eval)?;
                if state.is_definite() {
                    vec![state.definite_atoms()]
                } else {
                    min_models_capped(&state, self.cfg.eval.model_cap)?
                }
            }
        };
        let mut out: BTreeSet<BTreeSet<VURequest>> = BTreeSet::new();
        for m in models {
            out.insert(m.iter().filter_map(decode_nabla).collect());
        }
        Ok(out.into_iter().collect())
    }

    /// Requests raised by propagating `updates` against the original state.
    fn bottom_up(&self, updates: &DeltaSet) -> Result<BTreeSet<VURequest>> {
        let program = propagation_program(self.db, updates, Mode::Magic)?;
        let transition = derive_vu_transition_rules(
            &self.db.constraints,
            &[(self.request.sign, self.request.atom.pred.clone(), self.request.atom.args.len())],
        );
        let mut layers: Vec<Vec<Rule>> = program.partition.layers().to_vec();
        layers.push(transition);
        let facts: BTreeSet<GroundAtom> = self
            .db
            .facts
            .iter()
            .cloned()
            .chain(updates.delta_facts())
            .chain(program.seeds.iter().cloned())
            .chain([self.request.goal_fact()])
            .collect();
        let model = evaluate_partitioned(&facts, &Partition::new(layers), Engine::Soft, &self.cfg.eval)?;
        Ok(model.atoms().iter().filter_map(decode_nabla).collect())
    }

    fn expand(&mut self, node: &Work) -> Result<Vec<Work>> {
        let facts = node.updates.apply_to(&self.db.facts);
        let alternatives = self.top_down(&facts, &node.pending)?;
        let mut children = Vec::new();
        let mut seen = BTreeSet::new();
        for alt in alternatives {
            let chosen: BTreeSet<VURequest> = alt.difference(&node.committed).cloned().collect();
            let committed: BTreeSet<VURequest> = node.committed.union(&alt).cloned().collect();
            if let Some(c) = committed.iter().find(|r| {
                r.sign == Sign::Pos && committed.contains(&VURequest::delete(r.atom.clone()))
            }) {
                let why = format!("requests both nabla+{0} and nabla-{0}", c.atom);
                self.record(Some(node.id), node.depth + 1, chosen, node.updates.clone(), BTreeSet::new(), NodeStatus::False(why));
                continue;
            }
            let mut updates = node.updates.clone();
            let mut fresh_updates = false;
            for r in &alt {
                if self.derived.contains(&r.atom.pred) {
                    continue;
                }
                let present = facts.contains(&r.atom);
                match r.sign {
                    Sign::Pos if !present => {
                        updates.insertions.insert(r.atom.clone());
                        fresh_updates = true;
                    }
                    Sign::Neg if present => {
                        updates.deletions.insert(r.atom.clone());
                        fresh_updates = true;
                    }
                    _ => {}
                }
            }
            if !fresh_updates {
                self.record(Some(node.id), node.depth + 1, chosen, updates, BTreeSet::new(), NodeStatus::False("no new base update".into()));
                continue;
            }
            if !seen.insert((updates.clone(), committed.clone())) {
                continue;
            }
            let pending = self.bottom_up(&updates)?;
            let status = if pending.is_empty() {
                NodeStatus::Solution
            } else {
                NodeStatus::Open
            };
            let id = self.record(Some(node.id), node.depth + 1, chosen, updates.clone(), pending.clone(), status);
            children.push(Work {
                id,
                depth: node.depth + 1,
                updates,
                committed,
                pending,
            });
        }
        Ok(children)
    }

    fn run(mut self) -> Result<ViewUpdateResult> {
        let root_pending = BTreeSet::from([self.request.clone()]);
        let root = self.record(None, 0, BTreeSet::new(), DeltaSet::new(), root_pending.clone(), NodeStatus::Open);
        let mut frontier = vec![Work {
            id: root,
            depth: 0,
            updates: DeltaSet::new(),
            committed: root_pending.clone(),
            pending: root_pending,
        }];
        let mut found: Vec<Realization> = Vec::new();
        let mut depth = 0;
        while !frontier.is_empty() && depth < self.cfg.max_depth {
            depth += 1;
            let mut next = Vec::new();
            let mut solutions = Vec::new();
            for node in &frontier {
                for child in self.expand(node)? {
                    if child.pending.is_empty() {
                        solutions.push(Realization::from_delta(&child.updates));
                    } else {
                        next.push(child);
                    }
                }
            }
            found.extend(solutions);
            frontier = next;
            if self.cfg.policy == Policy::FirstDepth {
                let minimal = self.minimal(&found)?;
                if !minimal.is_empty() {
                    self.classify(&frontier)?;
                    self.close_log();
                    return Ok(ViewUpdateResult {
                        outcome: Outcome::Realizations(minimal),
                        log: self.log,
                    });
                }
            }
        }
        let minimal = self.minimal(&found)?;
        let outcome = if !minimal.is_empty() {
            Outcome::Realizations(minimal)
        } else if frontier.is_empty() {
            Outcome::NoRealization
        } else {
            Outcome::DepthExhausted
        };
        self.close_log();
        Ok(ViewUpdateResult { outcome, log: self.log })
    }

    /// Expands the leftover frontier once more so that refuted branches show
    /// up in the log; nothing found here is returned.
    fn classify(&mut self, frontier: &[Work]) -> Result<()> {
        for node in frontier {
            let first = self.log.len();
            self.expand(node)?;
            for n in &mut self.log[first..] {
                if n.status == NodeStatus::Solution {
                    n.status = NodeStatus::Unreturned;
                }
            }
        }
        Ok(())
    }

    /// A node all of whose children are false is false itself.
    fn close_log(&mut self) {
        for id in (0..self.log.len()).rev() {
            if self.log[id].status != NodeStatus::Open {
                continue;
            }
            let kids: Vec<&SearchNode> = self.log.iter().filter(|n| n.parent == Some(id)).collect();
            if !kids.is_empty() && kids.iter().all(|k| matches!(k.status, NodeStatus::False(_))) {
                self.log[id].status = NodeStatus::False("all branches false".into());
            }
        }
    }

    fn minimal(&self, found: &[Realization]) -> Result<Vec<Realization>> {
        let candidates: BTreeSet<Realization> = found.iter().map(Realization::canonical).collect();
        let mut out = Vec::new();
        for r in &candidates {
            if is_minimal_realization(self.db, self.request, r, &self.cfg.eval)? {
                out.push(r.clone());
            }
        }
        Ok(out)
    }
}

fn decode_nabla(a: &GroundAtom) -> Option<VURequest> {
    match Relation::decode(a.pred.as_str()) {
        Relation::Nabla(sign, inner) => match *inner {
            Relation::User(p) => Some(VURequest {
                sign,
                atom: GroundAtom::new(p, a.args.clone()),
            }),
            _ => None,
        },
        _ => None,
    }
}

/// Whether applying `updates` to `db` satisfies `request` and every
/// constraint.
pub fn is_realization(db: &Database, request: &VURequest, updates: &Realization, cfg: &EvalConfig) -> Result<bool> {
    let model = iterated_fixpoint(&updates.to_delta().apply_to(&db.facts), &db.rules, cfg)?.atoms();
    let holds = model.contains(&request.atom);
    Ok(holds == (request.sign == Sign::Pos) && db.constraints.iter().all(|c| model.contains(c)))
}

/// Realizations larger than this are not checked for minimality.
pub const MINIMALITY_CHECK_LIMIT: usize = 12;

/// A realization none of whose proper subsets is a realization.
pub fn is_minimal_realization(db: &Database, request: &VURequest, r: &Realization, cfg: &EvalConfig) -> Result<bool> {
    if !is_realization(db, request, r, cfg)? {
        return Ok(false);
    }
    let ups = r.updates();
    if ups.len() > MINIMALITY_CHECK_LIMIT {
        return Ok(true);
    }
    for mask in 0..(1u32 << ups.len()) - 1 {
        let mut sub = Realization::default();
        for (i, (s, a)) in ups.iter().enumerate() {
            if mask & (1 << i) != 0 {
                match s {
                    Sign::Pos => sub.insertions.insert(a.clone()),
                    Sign::Neg => sub.deletions.insert(a.clone()),
                };
            }
        }
        if is_realization(db, request, &sub, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that `request` is a true view update on a consistent database.
pub fn check_view_update(db: &Database, request: &VURequest, cfg: &EvalConfig) -> Result<()> {
    let model = iterated_fixpoint(&db.facts, &db.rules, cfg)?.atoms();
    if !db.constraints.iter().all(|c| model.contains(c)) {
        return Err(Error::ConstraintsUnsatisfiable);
    }
    let holds = model.contains(&request.atom);
    match (request.sign, holds) {
        (Sign::Pos, true) => Err(Error::NotTrueViewUpdate(format!("{} is already derivable", request.atom))),
        (Sign::Neg, false) => Err(Error::NotTrueViewUpdate(format!("{} is not derivable", request.atom))),
        _ => Ok(()),
    }
}

/// Searches breadth-first for minimal base updates realizing `request`.
pub fn solve_view_update(db: &Database, request: &VURequest, cfg: &VuConfig) -> Result<ViewUpdateResult> {
    if !db.disjunctions.is_empty() {
        return Err(Error::NotDefinite(DisjunctiveFact::to_string(db.disjunctions.first().unwrap())));
    }
    check_view_update(db, request, &cfg.eval)?;
    Solver::new(db, request, cfg).run()
}
