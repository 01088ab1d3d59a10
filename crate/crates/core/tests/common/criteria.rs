//! Checks behind the acceptance report. Each returns a [`Report`]; the
//! regular test files run the randomized ones with fewer cases.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use softfix::magic::answer_query;
use softfix::operators::{
    alternating_fixpoint, general_soft_fixpoint, immediate_consequence, iterated_fixpoint,
    iterated_fixpoint_state, soft_fixpoint, state_consequence, EvalConfig, Engine,
};
use softfix::propagate::{propagate_update, recompute_deltas, DeltaSet, Mode};
use softfix::stratify::stratification;
use softfix::viewupdate::{
    is_minimal_realization, solve_view_update, Outcome, Policy, Realization, VURequest, VuConfig,
};
use softfix::{parse_program, prioritized_models, Database, FactStore, GroundAtom, Sign};

use super::*;

#[derive(Debug, Default)]
pub struct Report {
    pub checked: usize,
    pub failures: Vec<String>,
    pub note: String,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 5 {
            self.failures.push(msg);
        } else if self.failures.len() == 5 {
            self.failures.push("...".into());
        }
    }

    fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !cond {
            self.fail(msg());
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} checked", self.checked);
        if !self.note.is_empty() {
            s.push_str(&format!(", {}", self.note));
        }
        if !self.failures.is_empty() {
            s.push_str(&format!(", {} failing: {}", self.failures.len(), self.failures.join(" | ")));
        }
        s
    }
}

pub fn show(db: &Database) -> String {
    softfix::Program {
        database: db.clone(),
        queries: Vec::new(),
    }
    .to_string()
    .replace('\n', " ")
}

pub fn programs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

pub fn load(name: &str) -> Database {
    let text = std::fs::read_to_string(programs_dir().join(name)).unwrap();
    parse_program(&text).unwrap().database
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn ga(p: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::of(p, args)
}

// ---- fixed examples ----

pub fn closure_size() -> (Report, Duration) {
    let db = load("closure.dl");
    let start = Instant::now();
    let m = iterated_fixpoint(&db.facts, &db.rules, &cfg()).unwrap();
    let elapsed = start.elapsed();
    let p = m.atoms().iter().filter(|a| a.pred.as_str() == "p").count();
    let mut r = Report::default();
    r.check(p == 4098, || format!("|p| = {p}"));
    r.check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"));
    r.note = format!("|p| = {p} in {elapsed:?}");
    (r, elapsed)
}

fn e23() -> DeltaSet {
    DeltaSet::insert(ga("e", &["2", "3"]))
}

pub fn induced_update() -> Report {
    let db = load("closure.dl");
    let want: BTreeSet<GroundAtom> = [ga("p", &["1", "3"]), ga("p", &["2", "3"]), ga("p", &["2", "4"])].into();
    let mut r = Report::default();
    for mode in [Mode::Naive, Mode::Magic] {
        let got = propagate_update(&db, &e23(), mode, &cfg()).unwrap().deltas;
        let induced: BTreeSet<GroundAtom> = got.insertions.iter().filter(|a| a.pred.as_str() == "p").cloned().collect();
        r.check(induced == want && got.deletions.is_empty(), || format!("{mode:?}: {got}"));
    }
    r
}

pub fn naive_cost() -> Report {
    let db = load("closure.dl");
    let p = propagate_update(&db, &e23(), Mode::Naive, &cfg()).unwrap();
    let stats = p.stats(&db);
    let want = [("delta+p", 3), ("e^new", 94), ("p^new", 4101), ("p^old", 4098)];
    let mut r = Report::default();
    let got: Vec<(String, usize)> = stats.clone().into_iter().collect();
    let expect: Vec<(String, usize)> = want.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    r.check(got == expect, || format!("{got:?}"));
    r.check(p.total() == 8296, || format!("total {}", p.total()));
    r.note = format!("total {}", p.total());
    r
}

pub fn magic_cost() -> Report {
    let db = load("closure.dl");
    let p = propagate_update(&db, &e23(), Mode::Magic, &cfg()).unwrap();
    let stats = p.stats(&db);
    let get = |k: &str| stats.get(k).copied().unwrap_or(0);
    let mut r = Report::default();
    r.check(get("e^new") == 2, || format!("e^new {}", get("e^new")));
    r.check(get("p^old") == 1, || format!("p^old {}", get("p^old")));
    r.check(get("p^new") == 1, || format!("p^new {}", get("p^new")));
    r.check(p.total() <= 30, || format!("total {}", p.total()));
    r.note = format!("total {} (target 19)", p.total());
    r
}

pub fn view_update_first() -> Report {
    let db = load("viewupdate.dl");
    let out = solve_view_update(&db, &VURequest::insert(ga("p", &["2"])), &VuConfig::default()).unwrap();
    let want = Realization {
        insertions: [ga("r1", &["2"])].into(),
        deletions: BTreeSet::new(),
    };
    let mut r = Report::default();
    r.check(out.realizations() == [want], || format!("{:?}", out.outcome));
    let s_false = out.log.iter().any(|n| {
        n.chosen.contains(&VURequest::delete(ga("s", &["2"])))
            && matches!(n.status, softfix::viewupdate::NodeStatus::False(_))
    });
    r.check(s_false, || "nabla-s(2) branch not marked false".into());
    r
}

pub fn view_update_second() -> Report {
    let db = load("fresh.dl");
    let out = solve_view_update(&db, &VURequest::insert(ga("h", &["1"])), &VuConfig::default()).unwrap();
    let want = Realization {
        insertions: [ga("q", &["1"]), ga("p", &["c_new_1"])].into(),
        deletions: BTreeSet::new(),
    }
    .canonical();
    let got: Vec<Realization> = out.realizations().iter().map(Realization::canonical).collect();
    let mut r = Report::default();
    r.check(got == [want], || format!("{:?}", out.outcome));
    r
}

// ---- randomized suites ----

fn shape(rng: &mut impl Rng) -> Shape {
    Shape {
        constants: rng.gen_range(2..=5),
        base: rng.gen_range(1..=3),
        derived: rng.gen_range(1..=3),
        ..Shape::default()
    }
}

/// lfp of the soft operator over the stratification equals the iterated
/// fixpoint model.
pub fn soft_vs_iterated(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    for _ in 0..cases {
        let s = shape(&mut rng);
        let (_, db) = random_database(&mut rng, &s);
        let partition = stratification(&db.rules).unwrap().partition;
        let soft = soft_fixpoint(&db.facts, &partition, &cfg()).unwrap().atoms();
        let iterated = iterated_fixpoint(&db.facts, &db.rules, &cfg()).unwrap().atoms();
        let naive = soft_fixpoint(&db.facts, &partition, &EvalConfig::naive()).unwrap().atoms();
        r.check(soft == iterated && naive == soft, || show(&db));
    }
    r
}

/// One application of T equals one application of T^state on definite input.
pub fn state_vs_immediate(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    for _ in 0..cases {
        let s = Shape {
            rules_per_pred: 1,
            ..shape(&mut rng)
        };
        let sig = Sig::random(&mut rng, &s);
        let rules = random_rules(&mut rng, &sig, &s);
        let rule = rules.choose(&mut rng).unwrap().clone();
        let rules = build(&[rule], &[], "").rules;
        let atoms: Vec<GroundAtom> = sig
            .base_atoms()
            .into_iter()
            .chain(sig.derived_atoms())
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        let store = FactStore::from_atoms(atoms);
        let t = immediate_consequence(&rules, &store).unwrap();
        let ts = state_consequence(&rules, &store, &cfg()).unwrap();
        r.check(t == ts, || format!("{} on {store:?}", rules[0]));
    }
    r
}

/// lfp of T^g over the stratification equals the iterated fixpoint state,
/// and its perfect models match a brute-force enumeration.
pub fn general_vs_perfect(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    for _ in 0..cases {
        let db = random_disjunctive(&mut rng, 12);
        let strata = stratification(&db.rules).unwrap();
        let lfp = general_soft_fixpoint(&strata.partition, &db.fact_store(), &cfg()).unwrap();
        let state = iterated_fixpoint_state(&db, &cfg()).unwrap();
        let mut models = prioritized_models(&lfp, |p| strata.level(p), 32).unwrap();
        models.sort();
        let oracle = perfect_models_brute_force(&db);
        r.check(lfp == state && models == oracle, || {
            format!("{} lfp {lfp:?} state {state:?} models {models:?} oracle {oracle:?}", show(&db))
        });
    }
    r
}

/// Magic Sets answers equal membership in the materialized model.
pub fn magic_soundness(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    for _ in 0..cases {
        let s = shape(&mut rng);
        let (sig, db) = random_database(&mut rng, &s);
        let m = model(&db);
        let derived = sig.derived_atoms();
        // Favor atoms that hold so both outcomes are exercised.
        let holding: Vec<&GroundAtom> = derived.iter().filter(|a| m.contains(a)).collect();
        let q = if !holding.is_empty() && rng.gen_bool(0.5) {
            (*holding.choose(&mut rng).unwrap()).clone()
        } else {
            derived.choose(&mut rng).unwrap().clone()
        };
        let expected = m.contains(&q);
        let soft = answer_query(&db, &q.to_atom(), Engine::Soft, &cfg()).unwrap().holds;
        let alt = answer_query(&db, &q.to_atom(), Engine::Alternating, &cfg()).unwrap().holds;
        r.check(soft == expected && alt == expected, || {
            format!("?- {q}: expected {expected}, soft {soft}, alternating {alt}, {}", show(&db))
        });
    }
    r
}

pub fn random_true_update(rng: &mut impl Rng, sig: &Sig, db: &Database) -> DeltaSet {
    let atoms = sig.base_atoms();
    let n = rng.gen_range(1..=2);
    let mut d = DeltaSet::new();
    for a in atoms.choose_multiple(rng, n) {
        if db.facts.contains(a) {
            d.deletions.insert(a.clone());
        } else {
            d.insertions.insert(a.clone());
        }
    }
    d
}

/// Propagation in both modes equals recomputation; magic never generates
/// more facts than naive.
pub fn propagation_oracle(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    let mut larger = 0;
    for _ in 0..cases {
        let s = shape(&mut rng);
        let (sig, db) = random_database(&mut rng, &s);
        let update = random_true_update(&mut rng, &sig, &db);
        let oracle = recompute_deltas(&db, &update, &cfg()).unwrap();
        let naive = propagate_update(&db, &update, Mode::Naive, &cfg()).unwrap();
        let magic = propagate_update(&db, &update, Mode::Magic, &cfg()).unwrap();
        r.check(naive.deltas == oracle && magic.deltas == oracle, || {
            format!("update {update}: oracle {oracle} naive {} magic {}", naive.deltas, magic.deltas)
        });
        if magic.total() > naive.total() {
            larger += 1;
            r.fail(format!(
                "magic generated {} > naive {} for update {} on {}",
                magic.total(),
                naive.total(),
                update.to_string().replace('\n', " "),
                show(&db)
            ));
        }
    }
    if larger > 0 {
        r.note = format!("magic count exceeded naive in {larger} cases");
    }
    r
}

/// Solver realizations up to depth 3 equal the brute-force minimal
/// realizations of size at most 3.
pub fn view_update_oracle(cases: usize, seed: u64) -> Report {
    let mut rng = rng(seed);
    let mut r = Report::default();
    let cfg = VuConfig {
        max_depth: 3,
        policy: Policy::Exhaustive,
        ..VuConfig::default()
    };
    let mut with_solutions = 0;
    for _ in 0..cases {
        let case = random_vu_case(&mut rng);
        let oracle = brute_force_realizations(&case.db, &case.request, 3, 2);
        let out = match solve_view_update(&case.db, &case.request, &cfg) {
            Ok(out) => out,
            Err(e) => {
                r.checked += 1;
                r.fail(format!("{} on {}: {e}", case.request, show(&case.db)));
                continue;
            }
        };
        let got: BTreeSet<Realization> = match &out.outcome {
            Outcome::Realizations(rs) => rs.iter().filter(|x| x.len() <= 3).map(Realization::canonical).collect(),
            _ => BTreeSet::new(),
        };
        if !oracle.is_empty() {
            with_solutions += 1;
        }
        let sound = out.realizations().iter().all(|x| {
            is_minimal_realization(&case.db, &case.request, x, &cfg.eval).unwrap()
        });
        r.check(got == oracle && sound, || {
            format!(
                "{} on {}: solver {got:?} oracle {oracle:?}",
                case.request,
                show(&case.db)
            )
        });
    }
    r.note = format!("{with_solutions} with realizations");
    r
}

pub fn sign_name(s: Sign) -> &'static str {
    match s {
        Sign::Pos => "+",
        Sign::Neg => "-",
    }
}

pub fn alternating_agrees(db: &Database) -> bool {
    let a = alternating_fixpoint(&db.facts, &db.rules, &cfg()).unwrap();
    a.undefined.is_empty() && a.model.atoms() == model(db)
}
