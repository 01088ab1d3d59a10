//! Indexed relational evaluation of definite rules.
//!
//! Relations are append-only row vectors, so "facts added since" is just a row
//! range. That gives semi-naive evaluation per layer for free: a layer that was
//! saturated at row counts `w` only needs instances touching rows past `w`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::syntax::{GroundAtom, Rule, Symbol, Term};

type Row = Vec<Symbol>;

#[derive(Default, Clone)]
struct Index {
    upto: usize,
    map: HashMap<Row, Vec<u32>>,
}

#[derive(Default, Clone)]
struct Relation {
    rows: Vec<Row>,
    set: HashSet<Row>,
    indexes: HashMap<Vec<usize>, Index>,
}

impl Relation {
    fn ensure_index(&mut self, key: &[usize]) {
        let idx = self.indexes.entry(key.to_vec()).or_default();
        for (i, row) in self.rows.iter().enumerate().skip(idx.upto) {
            let k: Row = key.iter().map(|&p| row[p].clone()).collect();
            idx.map.entry(k).or_default().push(i as u32);
        }
        idx.upto = self.rows.len();
    }
}

/// A definite interpretation: a set of ground atoms, grouped by predicate.
#[derive(Default, Clone)]
pub(crate) struct Interp {
    rels: HashMap<Symbol, Relation>,
}

impl Interp {
    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a GroundAtom>) -> Self {
        let mut i = Interp::default();
        for a in atoms {
            i.insert(a.clone());
        }
        i
    }

    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        let rel = self.rels.entry(atom.pred).or_default();
        if rel.set.insert(atom.args.clone()) {
            rel.rows.push(atom.args);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, pred: &Symbol, args: &[Symbol]) -> bool {
        self.rels.get(pred).is_some_and(|r| r.set.contains(args))
    }

    pub fn total(&self) -> usize {
        self.rels.values().map(|r| r.rows.len()).sum()
    }

    pub fn sizes(&self) -> BTreeMap<Symbol, usize> {
        self.rels
            .iter()
            .map(|(p, r)| (p.clone(), r.rows.len()))
            .collect()
    }

    pub fn atoms(&self) -> BTreeSet<GroundAtom> {
        self.rels
            .iter()
            .flat_map(|(p, r)| r.rows.iter().map(|row| GroundAtom::new(p.clone(), row.clone())))
            .collect()
    }


    fn ensure_index(&mut self, pred: &Symbol, key: &[usize]) {
        self.rels.entry(pred.clone()).or_default().ensure_index(key);
    }
}

#[derive(Clone, Debug)]
enum Slot {
    Var(usize),
    Const(Symbol),
}

#[derive(Clone, Debug)]
struct Step {
    pred: Symbol,
    positive: bool,
    /// Argument positions known before the step, with their values.
    key_positions: Vec<usize>,
    key: Vec<Slot>,
    /// First occurrences of free variables.
    binds: Vec<(usize, usize)>,
    /// Repeated free variables to compare after binding.
    checks: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct Plan {
    steps: Vec<Step>,
    /// Index into `steps` of the literal restricted to new rows.
    delta: Option<usize>,
}

#[derive(Clone, Debug)]
struct CompiledRule {
    head_pred: Symbol,
    head: Vec<Slot>,
    vars: usize,
    naive: Plan,
    deltas: Vec<Plan>,
}

fn slot(t: &Term, vars: &HashMap<Symbol, usize>) -> Slot {
    match t {
        Term::Var(v) => Slot::Var(vars[v]),
        Term::Const(c) => Slot::Const(c.clone()),
    }
}

fn compile_plan(rule: &Rule, order: &[usize], vars: &HashMap<Symbol, usize>, delta: Option<usize>) -> Plan {
    let mut bound = vec![false; vars.len()];
    let mut steps = Vec::new();
    let mut pending_neg: Vec<usize> = (0..rule.body.len())
        .filter(|&i| !rule.body[i].is_positive())
        .collect();
    let mut delta_step = None;
    let flush_neg = |bound: &[bool], pending: &mut Vec<usize>, steps: &mut Vec<Step>| {
        pending.retain(|&i| {
            let atom = &rule.body[i].atom;
            if atom.vars().all(|v| bound[vars[v]]) {
                steps.push(Step {
                    pred: atom.pred.clone(),
                    positive: false,
                    key_positions: (0..atom.arity()).collect(),
                    key: atom.args.iter().map(|t| slot(t, vars)).collect(),
                    binds: vec![],
                    checks: vec![],
                });
                false
            } else {
                true
            }
        });
    };
    flush_neg(&bound, &mut pending_neg, &mut steps);
    for &i in order {
        let atom = &rule.body[i].atom;
        let mut key_positions = Vec::new();
        let mut key = Vec::new();
        let mut binds = Vec::new();
        let mut checks = Vec::new();
        let mut local = HashMap::new();
        for (pos, t) in atom.args.iter().enumerate() {
            match t {
                Term::Const(c) => {
                    key_positions.push(pos);
                    key.push(Slot::Const(c.clone()));
                }
                Term::Var(v) => {
                    let s = vars[v];
                    if bound[s] {
                        key_positions.push(pos);
                        key.push(Slot::Var(s));
                    } else if let Some(&first) = local.get(&s) {
                        checks.push((pos, first));
                    } else {
                        local.insert(s, pos);
                        binds.push((pos, s));
                    }
                }
            }
        }
        for &(_, s) in &binds {
            bound[s] = true;
        }
        if Some(i) == delta {
            delta_step = Some(steps.len());
        }
        steps.push(Step {
            pred: atom.pred.clone(),
            positive: true,
            key_positions,
            key,
            binds,
            checks,
        });
        flush_neg(&bound, &mut pending_neg, &mut steps);
    }
    debug_assert!(pending_neg.is_empty(), "unsafe rule reached the evaluator");
    Plan {
        steps,
        delta: delta_step,
    }
}

fn compile(rule: &Rule) -> Result<CompiledRule> {
    if !rule.is_definite() {
        return Err(Error::NotDefinite(rule.to_string()));
    }
    rule.check_safe()?;
    let vars: HashMap<Symbol, usize> = rule
        .vars()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let positives: Vec<usize> = (0..rule.body.len())
        .filter(|&i| rule.body[i].is_positive())
        .collect();
    let naive = compile_plan(rule, &positives, &vars, None);
    let deltas = positives
        .iter()
        .map(|&d| {
            let order: Vec<usize> = std::iter::once(d)
                .chain(positives.iter().copied().filter(|&i| i != d))
                .collect();
            compile_plan(rule, &order, &vars, Some(d))
        })
        .collect();
    let head = &rule.head[0];
    Ok(CompiledRule {
        head_pred: head.pred.clone(),
        head: head.args.iter().map(|t| slot(t, &vars)).collect(),
        vars: vars.len(),
        naive,
        deltas,
    })
}

/// What negative literals are tested against.
#[derive(Clone, Copy)]
pub(crate) enum Negation<'a> {
    /// The interpretation being extended (immediate consequence).
    Current,
    /// A fixed interpretation (eventual consequence).
    Fixed(&'a Interp),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    SemiNaive,
    Naive,
}

pub(crate) struct Layer {
    rules: Vec<CompiledRule>,
}

impl Layer {
    pub fn compile(rules: &[Rule]) -> Result<Layer> {
        Ok(Layer {
            rules: rules.iter().map(compile).collect::<Result<_>>()?,
        })
    }

    fn prepare(&self, interp: &mut Interp) {
        for r in &self.rules {
            for plan in std::iter::once(&r.naive).chain(&r.deltas) {
                for s in plan.steps.iter().filter(|s| s.positive) {
                    interp.ensure_index(&s.pred, &s.key_positions);
                }
            }
        }
    }

    /// One application of the layer's immediate consequence operator: the
    /// atoms it derives that are not yet in `interp`. With `since`, only
    /// instances using a row added after the given counts are considered.
    pub fn apply(
        &self,
        interp: &mut Interp,
        since: Option<&BTreeMap<Symbol, usize>>,
        neg: Negation<'_>,
    ) -> Vec<GroundAtom> {
        self.prepare(interp);
        let interp = &*interp;
        let snapshot: HashMap<&Symbol, usize> = interp
            .rels
            .iter()
            .map(|(p, r)| (p, r.rows.len()))
            .collect();
        let mut out: Vec<GroundAtom> = Vec::new();
        let mut seen: HashSet<GroundAtom> = HashSet::new();
        for rule in &self.rules {
            let plans: Vec<&Plan> = match since {
                None => vec![&rule.naive],
                Some(_) => rule.deltas.iter().collect(),
            };
            for plan in plans {
                let ranges: Vec<(usize, usize)> = plan
                    .steps
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let hi = snapshot.get(&s.pred).copied().unwrap_or(0);
                        let lo = match (since, plan.delta) {
                            (Some(w), Some(d)) if d == k => {
                                w.get(&s.pred).copied().unwrap_or(0).min(hi)
                            }
                            _ => 0,
                        };
                        (lo, hi)
                    })
                    .collect();
                if ranges.iter().zip(&plan.steps).any(|((lo, hi), s)| s.positive && lo >= hi) {
                    continue;
                }
                let mut binding: Vec<Option<Symbol>> = vec![None; rule.vars];
                run(interp, neg, plan, &ranges, 0, &mut binding, &mut |b| {
                    let args: Row = rule
                        .head
                        .iter()
                        .map(|s| match s {
                            Slot::Var(v) => b[*v].clone().expect("head variable bound"),
                            Slot::Const(c) => c.clone(),
                        })
                        .collect();
                    if !interp.contains(&rule.head_pred, &args) {
                        let atom = GroundAtom::new(rule.head_pred.clone(), args);
                        if seen.insert(atom.clone()) {
                            out.push(atom);
                        }
                    }
                });
            }
        }
        out
    }
}

fn resolve(s: &Slot, b: &[Option<Symbol>]) -> Symbol {
    match s {
        Slot::Var(v) => b[*v].clone().expect("key variable bound"),
        Slot::Const(c) => c.clone(),
    }
}

fn run(
    interp: &Interp,
    neg: Negation<'_>,
    plan: &Plan,
    ranges: &[(usize, usize)],
    k: usize,
    b: &mut Vec<Option<Symbol>>,
    emit: &mut dyn FnMut(&[Option<Symbol>]),
) {
    let Some(step) = plan.steps.get(k) else {
        emit(b);
        return;
    };
    let key: Row = step.key.iter().map(|s| resolve(s, b)).collect();
    if !step.positive {
        let present = match neg {
            Negation::Current => interp.contains(&step.pred, &key),
            Negation::Fixed(fixed) => fixed.contains(&step.pred, &key),
        };
        if !present {
            run(interp, neg, plan, ranges, k + 1, b, emit);
        }
        return;
    }
    let Some(rel) = interp.rels.get(&step.pred) else {
        return;
    };
    let (lo, hi) = ranges[k];
    let mut visit = |row: &Row, b: &mut Vec<Option<Symbol>>| {
        if step.checks.iter().any(|&(pos, first)| row[pos] != row[first]) {
            return;
        }
        for &(pos, s) in &step.binds {
            b[s] = Some(row[pos].clone());
        }
        run(interp, neg, plan, ranges, k + 1, b, emit);
        for &(_, s) in &step.binds {
            b[s] = None;
        }
    };
    if step.key_positions.is_empty() {
        for row in &rel.rows[lo..hi] {
            visit(row, b);
        }
    } else {
        let idx = &rel.indexes[&step.key_positions];
        if let Some(ids) = idx.map.get(&key) {
            let start = ids.partition_point(|&i| (i as usize) < lo);
            for &i in &ids[start..] {
                if i as usize >= hi {
                    break;
                }
                visit(&rel.rows[i as usize], b);
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LfpStats {
    /// Operator applications that changed the interpretation.
    pub steps: usize,
}

/// Least fixpoint of the soft consequence operator over `layers`: repeatedly
/// apply the first layer whose immediate consequence grows the interpretation.
/// A single layer gives the plain least fixpoint of `T`.
pub(crate) fn soft_lfp(
    interp: &mut Interp,
    layers: &[Layer],
    mode: EvalMode,
    neg: Negation<'_>,
) -> LfpStats {
    let mut stats = LfpStats::default();
    let mut since: Vec<Option<BTreeMap<Symbol, usize>>> = vec![None; layers.len()];
    'outer: loop {
        for (j, layer) in layers.iter().enumerate() {
            let before = interp.sizes();
            let window = match mode {
                EvalMode::Naive => None,
                EvalMode::SemiNaive => since[j].as_ref(),
            };
            let new = layer.apply(interp, window, neg);
            since[j] = Some(before);
            if !new.is_empty() {
                for a in new {
                    interp.insert(a);
                }
                stats.steps += 1;
                continue 'outer;
            }
        }
        break;
    }
    stats
}
