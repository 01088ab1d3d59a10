//! Consequence operators and the fixpoint models they induce.
//!
//! Definite operators run on the indexed evaluator; the state operators work
//! on [`FactStore`]s of disjunctive facts and enumerate ground instances
//! directly, which is fine for the small stores they are meant for.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::eval::{self, Interp, Layer, Negation};
use crate::store::{ground_instances, min_models_capped, prioritized_models, DisjunctiveFact, FactStore, DEFAULT_MODEL_CAP};
use crate::stratify::{stratification, Partition};
use crate::syntax::{Database, GroundAtom, Rule, Symbol};

pub use crate::eval::EvalMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub mode: EvalMode,
    /// Largest number of atoms `min_models` may enumerate over.
    pub model_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: EvalMode::SemiNaive,
            model_cap: DEFAULT_MODEL_CAP,
        }
    }
}

impl EvalConfig {
    pub fn naive() -> Self {
        EvalConfig {
            mode: EvalMode::Naive,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Engine {
    Iterated,
    Soft,
    Alternating,
    General,
}

/// Positive part of a two-valued model, plus evaluation statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelResult {
    pub positive: FactStore,
    /// Operator applications that changed the store.
    pub steps: usize,
    /// Atoms materialized per relation, not counting the input facts.
    pub generated: BTreeMap<Symbol, usize>,
}

impl ModelResult {
    pub fn atoms(&self) -> BTreeSet<GroundAtom> {
        self.positive.definite_atoms()
    }

    pub fn holds(&self, atom: &GroundAtom) -> bool {
        self.positive.contains_atom(atom)
    }

    fn from_interp(interp: &Interp, input: &BTreeSet<GroundAtom>, steps: usize) -> Self {
        let atoms = interp.atoms();
        let mut generated = BTreeMap::new();
        for a in atoms.difference(input) {
            *generated.entry(a.pred.clone()).or_insert(0) += 1;
        }
        ModelResult {
            positive: FactStore::from_atoms(atoms),
            steps,
            generated,
        }
    }
}

fn require_definite_rules(rules: &[Rule]) -> Result<()> {
    match rules.iter().find(|r| !r.is_definite()) {
        Some(r) => Err(Error::NotDefinite(r.to_string())),
        None => Ok(()),
    }
}

fn definite_atoms(store: &FactStore) -> Result<BTreeSet<GroundAtom>> {
    if store.is_inconsistent() {
        return Err(Error::Inconsistent);
    }
    match store.facts().iter().find(|f| !f.is_definite()) {
        Some(f) => Err(Error::NotDefinite(f.to_string())),
        None => Ok(store.definite_atoms()),
    }
}

/// `T_R(I)`: one application of the immediate consequence operator.
pub fn immediate_consequence(rules: &[Rule], store: &FactStore) -> Result<FactStore> {
    let atoms = definite_atoms(store)?;
    let layer = Layer::compile(rules)?;
    let mut interp = Interp::from_atoms(&atoms);
    let new = layer.apply(&mut interp, None, Negation::Current);
    Ok(FactStore::from_atoms(atoms.into_iter().chain(new)))
}

/// Iterates an inflationary operator from `seed` until nothing changes.
pub fn lfp_of(
    op: impl Fn(&FactStore) -> Result<FactStore>,
    seed: &FactStore,
) -> Result<FactStore> {
    let mut cur = seed.clone();
    loop {
        let next = op(&cur)?;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
}

/// `lfp(T_R, seed)`.
pub fn lfp(rules: &[Rule], seed: &FactStore, cfg: &EvalConfig) -> Result<FactStore> {
    let partition = Partition::single(rules.to_vec());
    Ok(soft_fixpoint(&definite_atoms(seed)?, &partition, cfg)?.positive)
}

/// `M_n`, computed stratum by stratum along the canonical stratification.
pub fn iterated_fixpoint(
    facts: &BTreeSet<GroundAtom>,
    rules: &[Rule],
    cfg: &EvalConfig,
) -> Result<ModelResult> {
    require_definite_rules(rules)?;
    let strata = stratification(rules).map_err(|c| Error::Unstratifiable(c.to_string()))?;
    let mut interp = Interp::from_atoms(facts);
    let mut steps = 0;
    for layer in strata.partition.layers() {
        let layer = [Layer::compile(layer)?];
        steps += eval::soft_lfp(&mut interp, &layer, cfg.mode, Negation::Current).steps;
    }
    Ok(ModelResult::from_interp(&interp, facts, steps))
}

pub fn iterated_fixpoint_model(db: &Database, cfg: &EvalConfig) -> Result<ModelResult> {
    iterated_fixpoint(&db_facts(db)?, &db.rules, cfg)
}

/// `T^s_P(I)`: the first layer's `T` that grows `I`, or `I` itself.
pub fn soft_consequence(partition: &Partition, store: &FactStore) -> Result<FactStore> {
    for layer in partition.layers() {
        let next = immediate_consequence(layer, store)?;
        if next.len() > store.len() {
            return Ok(next);
        }
    }
    Ok(store.clone())
}

/// `lfp(T^s_P, F)`.
pub fn soft_fixpoint(
    facts: &BTreeSet<GroundAtom>,
    partition: &Partition,
    cfg: &EvalConfig,
) -> Result<ModelResult> {
    let layers = partition
        .layers()
        .iter()
        .map(|l| Layer::compile(l))
        .collect::<Result<Vec<_>>>()?;
    let mut interp = Interp::from_atoms(facts);
    let stats = eval::soft_lfp(&mut interp, &layers, cfg.mode, Negation::Current);
    Ok(ModelResult::from_interp(&interp, facts, stats.steps))
}

pub fn soft_fixpoint_model(db: &Database, partition: &Partition, cfg: &EvalConfig) -> Result<ModelResult> {
    soft_fixpoint(&db_facts(db)?, partition, cfg)
}

/// Well-founded model of a definite rule set with arbitrary negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFounded {
    pub model: ModelResult,
    /// Atoms that are neither true nor false.
    pub undefined: BTreeSet<GroundAtom>,
}

/// The alternating fixpoint: `K = S(S(K))` starting from the empty set, where
/// `S(J)` is the least fixpoint with negation tested against `J`.
pub fn alternating_fixpoint(
    facts: &BTreeSet<GroundAtom>,
    rules: &[Rule],
    cfg: &EvalConfig,
) -> Result<WellFounded> {
    let layer = [Layer::compile(rules)?];
    let eventual = |fixed: &Interp, steps: &mut usize| {
        let mut i = Interp::from_atoms(facts);
        *steps += eval::soft_lfp(&mut i, &layer, cfg.mode, Negation::Fixed(fixed)).steps;
        i
    };
    let mut steps = 0;
    let mut under = Interp::from_atoms(facts);
    loop {
        let over = eventual(&under, &mut steps);
        let next = eventual(&over, &mut steps);
        // The underestimates grow monotonically, so equal size means equal.
        if next.total() == under.total() {
            let undefined = over.atoms().difference(&next.atoms()).cloned().collect();
            return Ok(WellFounded {
                model: ModelResult::from_interp(&next, facts, steps),
                undefined,
            });
        }
        under = next;
    }
}

pub fn alternating_fixpoint_model(db: &Database, cfg: &EvalConfig) -> Result<ModelResult> {
    Ok(alternating_fixpoint(&db_facts(db)?, &db.rules, cfg)?.model)
}

fn db_facts(db: &Database) -> Result<BTreeSet<GroundAtom>> {
    if let Some(d) = db.disjunctions.first() {
        return Err(Error::NotDefinite(d.to_string()));
    }
    Ok(db.facts.clone())
}

/// `T^state_R(I)`, the disjunctive consequence operator.
///
/// A positive body atom may be taken from any stored fact `f` containing it,
/// contributing the residue `f \ {L}` to the derived disjunction. A negative
/// literal blocks the instance only if its atom is a definite fact. The
/// context part collects each negative-literal atom that occurs in some
/// minimal model containing all positive body atoms and no head atom.
pub fn state_consequence(rules: &[Rule], store: &FactStore, cfg: &EvalConfig) -> Result<FactStore> {
    if store.is_inconsistent() {
        return Ok(store.clone());
    }
    Ok(store.extend(state_derivations(rules, store, cfg)?))
}

fn state_derivations(rules: &[Rule], store: &FactStore, cfg: &EvalConfig) -> Result<Vec<DisjunctiveFact>> {
    let mut by_atom: BTreeMap<&GroundAtom, Vec<&DisjunctiveFact>> = BTreeMap::new();
    for f in store.facts() {
        for a in f.atoms() {
            by_atom.entry(a).or_default().push(f);
        }
    }
    let definite = store.definite_atoms();
    let mut models: Option<Vec<BTreeSet<GroundAtom>>> = None;
    let mut derived = Vec::new();
    for inst in ground_instances(rules, store) {
        let ground = |a: &crate::syntax::Atom| a.to_ground().expect("ground instance");
        let head: Vec<GroundAtom> = inst.head.iter().map(ground).collect();
        let pos: Vec<GroundAtom> = inst.body.iter().filter(|l| l.is_positive()).map(|l| ground(&l.atom)).collect();
        let neg: Vec<GroundAtom> = inst.body.iter().filter(|l| !l.is_positive()).map(|l| ground(&l.atom)).collect();
        if neg.iter().any(|a| definite.contains(a)) {
            continue;
        }
        let mut context = BTreeSet::new();
        let in_wide_fact = |a: &GroundAtom| by_atom.get(a).is_some_and(|fs| fs.iter().any(|f| !f.is_definite()));
        if neg.iter().any(in_wide_fact) {
            if models.is_none() {
                models = Some(min_models_capped(store, cfg.model_cap)?);
            }
            for m in models.as_ref().unwrap() {
                if pos.iter().all(|a| m.contains(a)) && !head.iter().any(|a| m.contains(a)) {
                    context.extend(neg.iter().filter(|a| m.contains(*a)).cloned());
                }
            }
        }
        // One derived disjunction per choice of supporting facts.
        let mut choices: Vec<BTreeSet<GroundAtom>> = vec![head.iter().cloned().chain(context).collect()];
        for l in &pos {
            let supports = &by_atom[l];
            let mut next = Vec::with_capacity(choices.len() * supports.len());
            for c in &choices {
                for f in supports {
                    let mut c = c.clone();
                    c.extend(f.atoms().iter().filter(|a| *a != l).cloned());
                    next.push(c);
                }
            }
            choices = next;
        }
        derived.extend(choices.into_iter().filter_map(DisjunctiveFact::new));
    }
    Ok(derived)
}

/// `T^g_P(I)`: `T^state` of the first layer that changes `I`, or `I` itself.
///
/// A layer reads the definite facts and those disjunctive facts that mention
/// no predicate defined only by a later layer, i.e. the part of `I` that the
/// stratum-by-stratum construction would have built when reaching it.
pub fn general_soft_consequence(partition: &Partition, store: &FactStore, cfg: &EvalConfig) -> Result<FactStore> {
    if store.is_inconsistent() {
        return Ok(store.clone());
    }
    let definite = store.is_definite();
    let layers = partition.layers();
    let heads: Vec<BTreeSet<&Symbol>> = layers.iter().map(|l| l.iter().flat_map(Rule::head_preds).collect()).collect();
    for (i, layer) in layers.iter().enumerate() {
        let next = if definite && layer.iter().all(Rule::is_definite) {
            immediate_consequence(layer, store)?
        } else {
            let seen: BTreeSet<&Symbol> = heads[..=i].iter().flatten().copied().collect();
            let later: BTreeSet<&Symbol> = heads[i + 1..].iter().flatten().filter(|p| !seen.contains(*p)).copied().collect();
            let visible = if later.is_empty() {
                store.clone()
            } else {
                FactStore::from_facts(
                    store
                        .facts()
                        .iter()
                        .filter(|f| f.is_definite() || !f.atoms().iter().any(|a| later.contains(&a.pred)))
                        .cloned(),
                )
            };
            store.extend(state_derivations(layer, &visible, cfg)?)
        };
        if next != *store {
            return Ok(next);
        }
    }
    Ok(store.clone())
}

/// `lfp(T^g_P, I)`.
pub fn general_soft_fixpoint(partition: &Partition, store: &FactStore, cfg: &EvalConfig) -> Result<FactStore> {
    let rules: Vec<Rule> = partition.rules().cloned().collect();
    if store.is_definite() && rules.iter().all(Rule::is_definite) && !store.is_inconsistent() {
        // Definite layers keep the store definite, where T^state is T.
        return Ok(soft_fixpoint(&store.definite_atoms(), partition, cfg)?.positive);
    }
    lfp_of(|s| general_soft_consequence(partition, s, cfg), store)
}

/// Minimal models of `facts` under `rules` by case splitting: definite rules
/// run to a fixpoint, then the first disjunctive instance whose body holds and
/// whose head does not is split into one branch per head atom.
///
/// Negative literals must only mention predicates that no rule defines, so
/// that they are settled by `facts`. On such programs the result equals the
/// minimal models of `lfp(T^g)`, without building the disjunctive state.
pub fn split_models(facts: &BTreeSet<GroundAtom>, rules: &[Rule], cfg: &EvalConfig) -> Result<Vec<BTreeSet<GroundAtom>>> {
    let defined: BTreeSet<&Symbol> = rules.iter().flat_map(Rule::head_preds).collect();
    if let Some(l) = rules.iter().flat_map(|r| &r.body).find(|l| !l.is_positive() && defined.contains(&l.atom.pred)) {
        return Err(Error::Unstratifiable(format!("negated {} is defined by the rules being split", l.atom)));
    }
    let (definite, disjunctive): (Vec<Rule>, Vec<Rule>) = rules.iter().cloned().partition(Rule::is_definite);
    let mut found: BTreeSet<BTreeSet<GroundAtom>> = BTreeSet::new();
    let mut stack = vec![facts.clone()];
    let mut visited = 0usize;
    while let Some(atoms) = stack.pop() {
        visited += 1;
        if visited > SPLIT_LIMIT {
            return Err(Error::ModelCap {
                atoms: visited,
                cap: SPLIT_LIMIT,
            });
        }
        let m = iterated_fixpoint(&atoms, &definite, cfg)?.atoms();
        // Branches that already contain a model found earlier cannot be minimal.
        if found.iter().any(|f| f.is_subset(&m)) {
            continue;
        }
        let store = FactStore::from_atoms(m.iter().cloned());
        let open = ground_instances(&disjunctive, &store).into_iter().find(|inst| {
            let g = |a: &crate::syntax::Atom| a.to_ground().expect("ground instance");
            inst.body.iter().all(|l| m.contains(&g(&l.atom)) == l.is_positive())
                && !inst.head.iter().any(|h| m.contains(&g(h)))
        });
        match open {
            None => {
                found.retain(|f| !m.is_subset(f));
                found.insert(m);
            }
            Some(inst) => {
                for h in inst.head.iter().rev() {
                    let mut next = m.clone();
                    next.insert(h.to_ground().expect("ground instance"));
                    stack.push(next);
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Branches [`split_models`] explores before giving up.
pub const SPLIT_LIMIT: usize = 100_000;

/// The iterated fixpoint state of a stratifiable disjunctive database,
/// together with its minimal models that satisfy every constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateModel {
    pub state: FactStore,
    pub models: Vec<BTreeSet<GroundAtom>>,
}

/// `S_n`, built stratum by stratum with `T^state`.
pub fn iterated_fixpoint_state(db: &Database, cfg: &EvalConfig) -> Result<FactStore> {
    let strata = stratification(&db.rules).map_err(|c| Error::Unstratifiable(c.to_string()))?;
    let mut state = db.fact_store();
    for layer in strata.partition.layers() {
        let one = Partition::single(layer.clone());
        state = general_soft_fixpoint(&one, &state, cfg)?;
    }
    Ok(state)
}

/// The perfect models of `S_n` that contain every constraint atom.
pub fn fixpoint_state_model(db: &Database, cfg: &EvalConfig) -> Result<StateModel> {
    let strata = stratification(&db.rules).map_err(|c| Error::Unstratifiable(c.to_string()))?;
    let state = iterated_fixpoint_state(db, cfg)?;
    let models: Vec<BTreeSet<GroundAtom>> = if state.is_definite() {
        vec![state.definite_atoms()]
    } else {
        prioritized_models(&state, |p| strata.level(p), cfg.model_cap)?
    }
    .into_iter()
    .filter(|m| db.constraints.iter().all(|c| m.contains(c)))
    .collect();
    if models.is_empty() {
        return Err(Error::ConstraintsUnsatisfiable);
    }
    Ok(StateModel { state, models })
}

/// Model of a definite database under the chosen engine. The soft and general
/// engines use the canonical stratification as their partition.
pub fn evaluate(db: &Database, engine: Engine, cfg: &EvalConfig) -> Result<ModelResult> {
    match engine {
        Engine::Iterated => iterated_fixpoint_model(db, cfg),
        Engine::Alternating => alternating_fixpoint_model(db, cfg),
        Engine::Soft | Engine::General => {
            let strata = stratification(&db.rules).map_err(|c| Error::Unstratifiable(c.to_string()))?;
            evaluate_partitioned(&db_facts(db)?, &strata.partition, engine, cfg)
        }
    }
}

/// Evaluates a partitioned definite rule set. The alternating engine ignores
/// the layering; the iterated engine requires a stratifiable union.
pub fn evaluate_partitioned(
    facts: &BTreeSet<GroundAtom>,
    partition: &Partition,
    engine: Engine,
    cfg: &EvalConfig,
) -> Result<ModelResult> {
    let rules: Vec<Rule> = partition.rules().cloned().collect();
    match engine {
        Engine::Iterated => iterated_fixpoint(facts, &rules, cfg),
        Engine::Soft => soft_fixpoint(facts, partition, cfg),
        Engine::Alternating => Ok(alternating_fixpoint(facts, &rules, cfg)?.model),
        Engine::General => {
            require_definite_rules(&rules)?;
            let seed = FactStore::from_atoms(facts.iter().cloned());
            let state = general_soft_fixpoint(partition, &seed, cfg)?;
            let steps = 0;
            let mut interp = Interp::from_atoms(facts);
            for a in state.definite_atoms() {
                interp.insert(a);
            }
            Ok(ModelResult::from_interp(&interp, facts, steps))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_facts, parse_program};

    fn db(text: &str) -> Database {
        parse_program(text).unwrap().database
    }

    fn store(text: &str) -> FactStore {
        crate::parser::parse_program(text).unwrap().database.fact_store()
    }

    fn atoms(text: &str) -> BTreeSet<GroundAtom> {
        parse_facts(text).unwrap()
    }

    const PATHS: &str = "p(X,Y) :- e(X,Y). p(X,Y) :- e(X,Z), p(Z,Y). o(X,Y) :- not p(Y,X), p(X,Y).";

    #[test]
    fn immediate_consequence_fires_once() {
        let d = db("p(X,Y) :- e(X,Y). e(1,2).");
        let out = immediate_consequence(&d.rules, &d.fact_store()).unwrap();
        assert_eq!(out.definite_atoms(), atoms("e(1,2). p(1,2)."));
        let d = db("o(X,Y) :- not p(Y,X), p(X,Y). p(1,2).");
        let out = immediate_consequence(&d.rules, &d.fact_store()).unwrap();
        assert!(out.contains_atom(&GroundAtom::of("o", &["1", "2"])));
        assert_eq!(immediate_consequence(&d.rules, &out).unwrap(), out);
    }

    #[test]
    fn immediate_consequence_rejects_disjunctions() {
        let d = db("a | b :- c. c.");
        assert!(matches!(
            immediate_consequence(&d.rules, &d.fact_store()),
            Err(Error::NotDefinite(_))
        ));
    }

    #[test]
    fn lfp_reachability() {
        let d = db("p(X,Y) :- e(X,Y). p(X,Y) :- e(X,Z), p(Z,Y). e(1,2). e(2,3).");
        let out = lfp(&d.rules, &d.fact_store(), &EvalConfig::default()).unwrap();
        assert_eq!(out.definite_atoms(), atoms("e(1,2). e(2,3). p(1,2). p(2,3). p(1,3)."));
        assert_eq!(lfp(&[], &d.fact_store(), &EvalConfig::default()).unwrap(), d.fact_store());
    }

    #[test]
    fn iterated_model_examples() {
        let cfg = EvalConfig::default();
        let m = iterated_fixpoint_model(&db(&format!("{PATHS} e(1,2).")), &cfg).unwrap();
        assert_eq!(m.atoms(), atoms("e(1,2). p(1,2). o(1,2)."));
        let m = iterated_fixpoint_model(&db(&format!("{PATHS} e(1,2). e(2,1).")), &cfg).unwrap();
        assert!(!m.atoms().iter().any(|a| a.pred.as_str() == "o"));
        assert_eq!(m.atoms().len(), 2 + 4);
        assert_eq!(m.generated[&Symbol::new("p")], 4);
    }

    #[test]
    fn alternating_leaves_even_loop_undefined() {
        let wf = alternating_fixpoint(&BTreeSet::new(), &db("p :- not q. q :- not p.").rules, &EvalConfig::default()).unwrap();
        assert!(wf.model.atoms().is_empty());
        assert_eq!(wf.undefined.len(), 2);
    }

    #[test]
    fn engines_agree_on_paths() {
        let d = db(&format!("{PATHS} e(1,2). e(2,3). e(3,1). e(3,4)."));
        let cfg = EvalConfig::default();
        let reference = evaluate(&d, Engine::Iterated, &cfg).unwrap().atoms();
        for engine in [Engine::Soft, Engine::Alternating, Engine::General] {
            assert_eq!(evaluate(&d, engine, &cfg).unwrap().atoms(), reference, "{engine:?}");
        }
    }

    #[test]
    fn state_consequence_examples() {
        let cfg = EvalConfig::default();
        let d = db("a | b :- c.");
        let out = state_consequence(&d.rules, &store("c."), &cfg).unwrap();
        assert_eq!(out, store("c. a | b."));
        let d = db("b :- a.");
        let out = state_consequence(&d.rules, &store("a | c."), &cfg).unwrap();
        assert_eq!(out, store("a | c. b | c."));
    }

    #[test]
    fn state_consequence_context_disjunction() {
        // a | c with b :- not a: the instance is not blocked, and a occurs in
        // the minimal model {a}, so the derived fact is b | a.
        let d = db("b :- x, not a.");
        let out = state_consequence(&d.rules, &store("x. a | c."), &EvalConfig::default()).unwrap();
        assert_eq!(out, store("x. a | c. a | b."));
    }

    #[test]
    fn fixpoint_state_filters_constraint_violations() {
        let d = db("a | b. constraint a.");
        let m = fixpoint_state_model(&d, &EvalConfig::default()).unwrap();
        assert_eq!(m.models, vec![BTreeSet::from([GroundAtom::of("a", &[])])]);
        let mut bad = d.clone();
        bad.constraints = BTreeSet::from([GroundAtom::of("z", &[])]);
        assert_eq!(
            fixpoint_state_model(&bad, &EvalConfig::default()),
            Err(Error::ConstraintsUnsatisfiable)
        );
    }

    #[test]
    fn state_models_are_taken_stratum_by_stratum() {
        // {a, c} is a minimal model of the state but not a perfect model.
        let d = db("a | c. b :- not a. d :- not c.");
        let m = fixpoint_state_model(&d, &EvalConfig::default()).unwrap();
        assert_eq!(m.state, store("a | c. a | b. c | d."));
        let atoms = |xs: &[&str]| xs.iter().map(|x| GroundAtom::of(x, &[])).collect::<BTreeSet<_>>();
        assert_eq!(m.models, vec![atoms(&["a", "d"]), atoms(&["b", "c"])]);
    }

    #[test]
    fn lower_layers_do_not_read_later_disjunctions() {
        // Rereading `b0 | d0` with `d1 :- b0` would add `d0 | d1`, which the
        // stratum-by-stratum state does not contain.
        let d = db("b1. b0 | b2. d0 :- b1, not b0. d1 :- b0.");
        let strata = stratification(&d.rules).unwrap();
        let lfp = general_soft_fixpoint(&strata.partition, &d.fact_store(), &EvalConfig::default()).unwrap();
        assert_eq!(lfp, iterated_fixpoint_state(&d, &EvalConfig::default()).unwrap());
        assert_eq!(lfp, store("b1. b0 | b2. b0 | d0. b2 | d1."));
    }

    #[test]
    fn fixpoint_state_of_view_update_database() {
        let d = db("p(X) :- q1(X). p(X) :- q2(X). q1(X) :- r1(X), s(X). q2(X) :- r2(X), not s(X). \
                    ic(X) :- r2(X), not au(X). r2(2). s(2). constraint ic(2).");
        let m = fixpoint_state_model(&d, &EvalConfig::default()).unwrap();
        let state = m.state.definite_atoms();
        assert!(state.contains(&GroundAtom::of("ic", &["2"])));
        assert!(!state.contains(&GroundAtom::of("q2", &["2"])));
        assert!(!state.contains(&GroundAtom::of("p", &["2"])));
    }

    #[test]
    fn naive_and_semi_naive_agree() {
        let d = db(&format!("{PATHS} e(1,2). e(2,3). e(3,1). e(3,4). e(4,5)."));
        let a = iterated_fixpoint_model(&d, &EvalConfig::default()).unwrap();
        let b = iterated_fixpoint_model(&d, &EvalConfig::naive()).unwrap();
        assert_eq!(a.atoms(), b.atoms());
        assert_eq!(a.generated, b.generated);
    }
}
