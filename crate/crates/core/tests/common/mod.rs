//! Random program generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

pub mod criteria;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softfix::operators::{iterated_fixpoint, EvalConfig};
use softfix::stratify::{is_stratifiable, stratification};
use softfix::viewupdate::{fresh_constant, Realization, VURequest};
use softfix::{parse_program, Database, GroundAtom, Rule, Sign, Symbol, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub constants: usize,
    pub base: usize,
    pub derived: usize,
    pub max_arity: usize,
    pub rules_per_pred: usize,
    pub max_body: usize,
    pub negation: f64,
    pub fact_density: f64,
    pub constant_arg: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            constants: 4,
            base: 3,
            derived: 3,
            max_arity: 2,
            rules_per_pred: 2,
            max_body: 3,
            negation: 0.35,
            fact_density: 0.35,
            constant_arg: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sig {
    pub base: Vec<(String, usize)>,
    pub derived: Vec<(String, usize)>,
    pub constants: Vec<String>,
}

impl Sig {
    pub fn random(rng: &mut impl Rng, shape: &Shape) -> Self {
        let base = (0..shape.base).map(|i| (format!("b{i}"), rng.gen_range(1..=shape.max_arity))).collect();
        let derived = (0..shape.derived).map(|i| (format!("d{i}"), rng.gen_range(0..=shape.max_arity))).collect();
        let constants = (1..=shape.constants).map(|i| i.to_string()).collect();
        Sig { base, derived, constants }
    }

    pub fn atoms_of(&self, pred: &str, arity: usize) -> Vec<GroundAtom> {
        tuples(&self.constants, arity)
            .into_iter()
            .map(|t| GroundAtom::new(pred, t.into_iter().map(|c| Symbol::new(&c)).collect()))
            .collect()
    }

    pub fn base_atoms(&self) -> Vec<GroundAtom> {
        self.base.iter().flat_map(|(p, n)| self.atoms_of(p, *n)).collect()
    }

    pub fn derived_atoms(&self) -> Vec<GroundAtom> {
        self.derived.iter().flat_map(|(p, n)| self.atoms_of(p, *n)).collect()
    }
}

pub fn tuples<T: Clone>(domain: &[T], k: usize) -> Vec<Vec<T>> {
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

const VARS: [&str; 3] = ["X", "Y", "Z"];

fn args(rng: &mut impl Rng, n: usize, pool: &[&str], consts: &[String], p_const: f64) -> Vec<String> {
    (0..n)
        .map(|_| {
            if pool.is_empty() || rng.gen_bool(p_const) {
                consts.choose(rng).unwrap().clone()
            } else {
                pool.choose(rng).unwrap().to_string()
            }
        })
        .collect()
}

fn atom_text(p: &str, args: &[String]) -> String {
    if args.is_empty() {
        p.to_string()
    } else {
        format!("{p}({})", args.join(","))
    }
}

/// Rules for the derived predicates of `sig`. Derived predicate `i` may use
/// predicates `j <= i` positively and `j < i` negatively, so the result is
/// stratifiable; every rule is safe.
pub fn random_rules(rng: &mut impl Rng, sig: &Sig, shape: &Shape) -> Vec<String> {
    let mut rules = Vec::new();
    for (i, (head, arity)) in sig.derived.iter().enumerate() {
        let n_rules = rng.gen_range(1..=shape.rules_per_pred);
        for r in 0..n_rules {
            let mut pos_candidates: Vec<&(String, usize)> = sig.base.iter().collect();
            // The first rule of a predicate only uses lower predicates, so
            // each derived predicate can be non-empty.
            let upto = if r == 0 { i } else { i + 1 };
            pos_candidates.extend(sig.derived[..upto].iter());
            let n_pos = rng.gen_range(1..=shape.max_body);
            let mut body = Vec::new();
            let mut bound: BTreeSet<String> = BTreeSet::new();
            for k in 0..n_pos {
                let (p, n) = if k == 0 {
                    sig.base.choose(rng).unwrap()
                } else {
                    pos_candidates.choose(rng).unwrap()
                };
                let a = args(rng, *n, &VARS, &sig.constants, shape.constant_arg);
                bound.extend(a.iter().filter(|x| VARS.contains(&x.as_str())).cloned());
                body.push(atom_text(p, &a));
            }
            let pool: Vec<&str> = bound.iter().map(String::as_str).collect();
            if rng.gen_bool(shape.negation) {
                let mut neg_candidates: Vec<&(String, usize)> = sig.base.iter().collect();
                neg_candidates.extend(sig.derived[..i].iter());
                let (p, n) = neg_candidates.choose(rng).unwrap();
                let a = args(rng, *n, &pool, &sig.constants, shape.constant_arg);
                body.push(format!("not {}", atom_text(p, &a)));
            }
            let h = args(rng, *arity, &pool, &sig.constants, shape.constant_arg);
            rules.push(format!("{} :- {}.", atom_text(head, &h), body.join(", ")));
        }
    }
    rules
}

pub fn random_facts(rng: &mut impl Rng, sig: &Sig, density: f64) -> Vec<GroundAtom> {
    sig.base_atoms().into_iter().filter(|_| rng.gen_bool(density)).collect()
}

pub fn build(rules: &[String], facts: &[GroundAtom], extra: &str) -> Database {
    let mut text = rules.join("\n");
    for f in facts {
        text.push_str(&format!("\n{f}."));
    }
    text.push('\n');
    text.push_str(extra);
    parse_program(&text)
        .unwrap_or_else(|e| panic!("{e}\n{text}"))
        .database
}

/// A random stratifiable definite database.
pub fn random_database(rng: &mut impl Rng, shape: &Shape) -> (Sig, Database) {
    let sig = Sig::random(rng, shape);
    let rules = random_rules(rng, &sig, shape);
    let facts = random_facts(rng, &sig, shape.fact_density);
    let db = build(&rules, &facts, "");
    assert!(is_stratifiable(&db.rules));
    (sig, db)
}

pub fn model(db: &Database) -> BTreeSet<GroundAtom> {
    iterated_fixpoint(&db.facts, &db.rules, &EvalConfig::default())
        .unwrap()
        .atoms()
}

// ---- disjunctive databases and perfect models ----

/// A stratifiable database with disjunctive facts and occasionally
/// disjunctive rule heads, over at most `max_atoms` ground atoms.
pub fn random_disjunctive(rng: &mut impl Rng, max_atoms: usize) -> Database {
    loop {
        let shape = Shape {
            constants: 2,
            base: rng.gen_range(2..=3),
            derived: rng.gen_range(1..=3),
            max_arity: 1,
            rules_per_pred: 2,
            max_body: 2,
            negation: 0.5,
            fact_density: 0.0,
            constant_arg: 0.2,
        };
        let sig = Sig::random(rng, &shape);
        let atoms = sig.base_atoms().len() + sig.derived_atoms().len();
        if atoms > max_atoms {
            continue;
        }
        let mut rules = random_rules(rng, &sig, &shape);
        if sig.derived.len() >= 2 && rng.gen_bool(0.3) {
            // Turn one rule into a disjunctive one.
            let (p, n) = sig.derived.last().unwrap();
            let idx = rng.gen_range(0..rules.len());
            let (head, body) = rules[idx].split_once(" :- ").unwrap();
            let vars: Vec<String> = VARS.iter().filter(|v| body.contains(*v)).map(|v| v.to_string()).collect();
            let pool: Vec<&str> = vars.iter().map(String::as_str).collect();
            let extra = atom_text(p, &args(rng, *n, &pool, &sig.constants, 0.0));
            if !head.starts_with(p.as_str()) {
                rules[idx] = format!("{head} | {extra} :- {body}");
            }
        }
        let base = sig.base_atoms();
        let mut facts = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let k = rng.gen_range(1..=3);
            let mut f: Vec<String> = base.choose_multiple(rng, k).map(|a| a.to_string()).collect();
            f.sort();
            facts.push(format!("{}.", f.join(" | ")));
        }
        let text = format!("{}\n{}", rules.join("\n"), facts.join("\n"));
        let Ok(p) = parse_program(&text) else { continue };
        if is_stratifiable(&p.database.rules) && p.database.validate().is_ok() {
            return p.database;
        }
    }
}

/// Ground instances of `rules` over `constants`.
pub fn ground_rules(rules: &[Rule], constants: &[Symbol]) -> Vec<(Vec<GroundAtom>, Vec<GroundAtom>, Vec<GroundAtom>)> {
    let mut out = Vec::new();
    for r in rules {
        let vars: Vec<Symbol> = r.vars().into_iter().collect();
        for t in tuples(constants, vars.len()) {
            let s: BTreeMap<&Symbol, &Symbol> = vars.iter().zip(&t).collect();
            let g = |a: &softfix::Atom| {
                GroundAtom::new(
                    a.pred.clone(),
                    a.args
                        .iter()
                        .map(|x| match x {
                            Term::Var(v) => s[v].clone(),
                            Term::Const(c) => c.clone(),
                        })
                        .collect(),
                )
            };
            let head = r.head.iter().map(g).collect();
            let pos = r.body.iter().filter(|l| l.sign == Sign::Pos).map(|l| g(&l.atom)).collect();
            let neg = r.body.iter().filter(|l| l.sign == Sign::Neg).map(|l| g(&l.atom)).collect();
            out.push((head, pos, neg));
        }
    }
    out
}

/// Perfect models by enumeration: the minimal models of the program that no
/// other model is preferable to under the stratum priority.
pub fn perfect_models_brute_force(db: &Database) -> Vec<BTreeSet<GroundAtom>> {
    let levels = stratification(&db.rules).unwrap().levels;
    let level = |p: &Symbol| levels.get(p).copied().unwrap_or(0);
    let constants: Vec<Symbol> = db.constants().into_iter().collect();
    let mut universe: BTreeSet<GroundAtom> = BTreeSet::new();
    let arities = db.arities().unwrap();
    for (p, n) in &arities {
        for t in tuples(&constants, *n) {
            universe.insert(GroundAtom::new(p.clone(), t));
        }
    }
    let universe: Vec<GroundAtom> = universe.into_iter().collect();
    assert!(universe.len() <= 16, "universe of {} atoms", universe.len());
    let index: BTreeMap<&GroundAtom, usize> = universe.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mask = |xs: &[GroundAtom]| xs.iter().fold(0u32, |m, a| m | 1 << index[a]);
    let clauses: Vec<u32> = db
        .facts
        .iter()
        .map(|a| mask(std::slice::from_ref(a)))
        .chain(db.disjunctions.iter().map(|d| mask(&d.atoms().iter().cloned().collect::<Vec<_>>())))
        .collect();
    let rules: Vec<(u32, u32, u32)> = ground_rules(&db.rules, &constants)
        .into_iter()
        .map(|(h, p, n)| (mask(&h), mask(&p), mask(&n)))
        .collect();
    let is_model = |m: u32| {
        clauses.iter().all(|c| m & c != 0)
            && rules.iter().all(|&(h, p, n)| !(m & p == p && m & n == 0) || m & h != 0)
    };
    let mut models: Vec<u32> = (0..1u32 << universe.len()).filter(|&m| is_model(m)).collect();
    models.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u32> = Vec::new();
    for m in models {
        if !minimal.iter().any(|&k| k & !m == 0) {
            minimal.push(m);
        }
    }
    let lv: Vec<usize> = universe.iter().map(|a| level(&a.pred)).collect();
    let preferable = |n: u32, m: u32| {
        n != m
            && (0..universe.len()).filter(|&i| (n & !m) >> i & 1 == 1).all(|i| {
                (0..universe.len()).any(|j| (m & !n) >> j & 1 == 1 && lv[j] < lv[i])
            })
    };
    let mut out: Vec<BTreeSet<GroundAtom>> = minimal
        .iter()
        .filter(|&&m| !minimal.iter().any(|&n| preferable(n, m)))
        .map(|&m| (0..universe.len()).filter(|&i| m >> i & 1 == 1).map(|i| universe[i].clone()).collect())
        .collect();
    out.sort();
    out
}

// ---- view updates ----

/// A small database together with a true view update on it.
pub struct VuCase {
    pub db: Database,
    pub request: VURequest,
}

pub fn random_vu_case(rng: &mut impl Rng) -> VuCase {
    loop {
        let shape = Shape {
            constants: rng.gen_range(1..=2),
            base: rng.gen_range(2..=3),
            derived: rng.gen_range(1..=3),
            max_arity: 1,
            rules_per_pred: 2,
            max_body: 2,
            negation: 0.35,
            fact_density: 0.4,
            constant_arg: 0.15,
        };
        let sig = Sig::random(rng, &shape);
        let mut rules = random_rules(rng, &sig, &shape);
        let mut extra = String::new();
        if rng.gen_bool(0.4) {
            // A constraint forbidding some base or derived atom.
            let pool: Vec<GroundAtom> = sig.base_atoms().into_iter().chain(sig.derived_atoms()).collect();
            let bad = pool.choose(rng).unwrap();
            rules.push(format!("ic :- not {bad}."));
            extra.push_str("constraint ic.");
        }
        if rules.len() > 6 {
            continue;
        }
        let facts = random_facts(rng, &sig, shape.fact_density);
        let db = build(&rules, &facts, &extra);
        let m = model(&db);
        if !db.constraints.iter().all(|c| m.contains(c)) {
            continue;
        }
        let candidates: Vec<GroundAtom> = sig.derived_atoms();
        let Some(atom) = candidates.choose(rng).cloned() else { continue };
        let request = if m.contains(&atom) {
            VURequest::delete(atom)
        } else {
            VURequest::insert(atom)
        };
        return VuCase { db, request };
    }
}

/// Every base update set of at most `max` changes, over the active domain plus
/// `fresh` reserved constants, that realizes the request; minimal ones only,
/// in canonical form.
pub fn brute_force_realizations(db: &Database, request: &VURequest, max: usize, fresh: usize) -> BTreeSet<Realization> {
    let mut constants: Vec<Symbol> = db.constants().into_iter().collect();
    constants.extend(request.atom.args.iter().cloned());
    constants.extend((1..=fresh).map(fresh_constant));
    constants.sort();
    constants.dedup();
    let arities = db.arities().unwrap();
    let base = db.base_preds();
    let mut updates: Vec<(Sign, GroundAtom)> = Vec::new();
    for p in &base {
        for t in tuples(&constants, arities[p]) {
            let a = GroundAtom::new(p.clone(), t);
            let sign = if db.facts.contains(&a) { Sign::Neg } else { Sign::Pos };
            updates.push((sign, a));
        }
    }
    let holds = |r: &Realization| {
        let facts: BTreeSet<GroundAtom> = db
            .facts
            .difference(&r.deletions)
            .cloned()
            .chain(r.insertions.iter().cloned())
            .collect();
        let m = iterated_fixpoint(&facts, &db.rules, &EvalConfig::default()).unwrap().atoms();
        m.contains(&request.atom) == (request.sign == Sign::Pos) && db.constraints.iter().all(|c| m.contains(c))
    };
    let mut found: Vec<Realization> = Vec::new();
    for size in 1..=max {
        for combo in combinations(updates.len(), size) {
            let mut r = Realization::default();
            for i in combo {
                let (s, a) = &updates[i];
                match s {
                    Sign::Pos => r.insertions.insert(a.clone()),
                    Sign::Neg => r.deletions.insert(a.clone()),
                };
            }
            if found.iter().any(|f| f.insertions.is_subset(&r.insertions) && f.deletions.is_subset(&r.deletions)) {
                continue;
            }
            if holds(&r) {
                found.push(r);
            }
        }
    }
    found.iter().map(Realization::canonical).collect()
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
