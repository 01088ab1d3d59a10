//! Predicate dependency graphs, stratification and soft partitions.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::error::{Error, Result};
use crate::syntax::{Rule, Sign, Symbol};

/// Edge `(q, p, pol)`: `q` occurs with polarity `pol` in a body whose head mentions `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<Symbol>,
    pub edges: BTreeSet<(Symbol, Symbol, Sign)>,
}

impl DependencyGraph {
    pub fn build(rules: &[Rule]) -> Self {
        let mut g = DependencyGraph::default();
        for r in rules {
            for h in &r.head {
                g.nodes.insert(h.pred.clone());
                for l in &r.body {
                    g.nodes.insert(l.atom.pred.clone());
                    g.edges.insert((l.atom.pred.clone(), h.pred.clone(), l.sign));
                }
            }
        }
        g
    }

    pub fn has_edge(&self, from: &str, to: &str, sign: Sign) -> bool {
        self.edges
            .contains(&(Symbol::new(from), Symbol::new(to), sign))
    }

    /// DOT rendering; negative edges are dashed and labelled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependencies {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (from, to, sign) in &self.edges {
            let style = match sign {
                Sign::Pos => "[label=\"pos\"]",
                Sign::Neg => "[label=\"neg\", style=dashed]",
            };
            let _ = writeln!(out, "  \"{from}\" -> \"{to}\" {style};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_dependency_graph(rules: &[Rule]) -> DependencyGraph {
    DependencyGraph::build(rules)
}

/// An ordered list of disjoint rule layers whose union is the rule set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    layers: Vec<Vec<Rule>>,
}

impl Partition {
    /// Builds a partition, dropping empty layers.
    pub fn new(layers: Vec<Vec<Rule>>) -> Self {
        Partition {
            layers: layers.into_iter().filter(|l| !l.is_empty()).collect(),
        }
    }

    pub fn single(rules: Vec<Rule>) -> Self {
        Partition::new(vec![rules])
    }

    pub fn layers(&self) -> &[Vec<Rule>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.layers.iter().flatten()
    }

    /// Head predicates per layer.
    pub fn layer_preds(&self) -> Vec<BTreeSet<Symbol>> {
        self.layers
            .iter()
            .map(|l| l.iter().flat_map(|r| r.head_preds().cloned()).collect())
            .collect()
    }
}

/// A cycle through at least one negative edge, listed as `(from, polarity)`
/// hops; the last hop returns to the first node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeCycle {
    pub hops: Vec<(Symbol, Sign)>,
}

impl NegativeCycle {
    pub fn preds(&self) -> impl Iterator<Item = &Symbol> {
        self.hops.iter().map(|(p, _)| p)
    }
}

impl fmt::Display for NegativeCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, s) in &self.hops {
            let arrow = if *s == Sign::Pos { "-pos->" } else { "-neg->" };
            write!(f, "{p} {arrow} ")?;
        }
        match self.hops.first() {
            Some((p, _)) => write!(f, "{p}"),
            None => Ok(()),
        }
    }
}

/// The canonical stratification: stratum numbers per predicate and the
/// induced partition of the rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strata {
    pub levels: BTreeMap<Symbol, usize>,
    pub partition: Partition,
}

impl Strata {
    pub fn level(&self, pred: &Symbol) -> usize {
        self.levels.get(pred).copied().unwrap_or(0)
    }
}

/// Assigns each predicate the lowest stratum such that positive dependencies
/// stay level and negative ones strictly climb. Head atoms of one disjunctive
/// rule share a stratum.
pub fn stratification(rules: &[Rule]) -> std::result::Result<Strata, NegativeCycle> {
    let mut dg = DependencyGraph::build(rules);
    for r in rules {
        for w in r.head.windows(2) {
            dg.edges.insert((w[0].pred.clone(), w[1].pred.clone(), Sign::Pos));
            dg.edges.insert((w[1].pred.clone(), w[0].pred.clone(), Sign::Pos));
        }
    }
    let mut graph: DiGraphMap<&str, ()> = DiGraphMap::new();
    for n in &dg.nodes {
        graph.add_node(n.as_str());
    }
    for (from, to, _) in &dg.edges {
        graph.add_edge(from.as_str(), to.as_str(), ());
    }
    // tarjan_scc yields components in reverse topological order.
    let mut sccs = tarjan_scc(&graph);
    sccs.reverse();
    let comp: HashMap<&str, usize> = sccs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |n| (*n, i)))
        .collect();

    for (from, to, sign) in &dg.edges {
        if *sign == Sign::Neg && comp[from.as_str()] == comp[to.as_str()] {
            return Err(witness(&dg, from, to, &comp));
        }
    }

    let mut incoming: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); sccs.len()];
    for (from, to, sign) in &dg.edges {
        let (a, b) = (comp[from.as_str()], comp[to.as_str()]);
        if a != b {
            incoming[b].push((a, *sign));
        }
    }
    let mut level = vec![0usize; sccs.len()];
    for c in 0..sccs.len() {
        level[c] = incoming[c]
            .iter()
            .map(|&(a, s)| level[a] + usize::from(s == Sign::Neg))
            .max()
            .unwrap_or(0);
    }
    let levels: BTreeMap<Symbol, usize> = dg
        .nodes
        .iter()
        .map(|n| (n.clone(), level[comp[n.as_str()]]))
        .collect();
    let top = levels.values().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); top + 1];
    for r in rules {
        layers[levels[&r.head[0].pred]].push(r.clone());
    }
    Ok(Strata {
        levels,
        partition: Partition::new(layers),
    })
}

pub fn is_stratifiable(rules: &[Rule]) -> bool {
    stratification(rules).is_ok()
}

fn witness(
    dg: &DependencyGraph,
    neg_from: &Symbol,
    neg_to: &Symbol,
    comp: &HashMap<&str, usize>,
) -> NegativeCycle {
    let target = comp[neg_from.as_str()];
    // BFS from neg_to back to neg_from inside the component.
    let mut prev: HashMap<&Symbol, (&Symbol, Sign)> = HashMap::new();
    let mut queue = VecDeque::from([neg_to]);
    let mut seen = BTreeSet::from([neg_to]);
    while let Some(n) = queue.pop_front() {
        if n == neg_from {
            break;
        }
        for (from, to, sign) in dg.edges.iter().filter(|(f, _, _)| f == n) {
            if comp[to.as_str()] == target && seen.insert(to) {
                prev.insert(to, (from, *sign));
                queue.push_back(to);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = neg_from;
    while cur != neg_to {
        let (p, s) = prev[cur];
        path.push((p.clone(), s));
        cur = p;
    }
    path.reverse();
    path.push((neg_from.clone(), Sign::Neg));
    NegativeCycle { hops: path }
}

/// Where a rewritten rule came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// An adorned or otherwise renamed copy of a rule of the source program.
    Adorned,
    /// A rule whose head is a magic (or magic seed) predicate.
    Magic,
    /// A query root, such as a propagation rule, evaluated without a guard.
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOrigin {
    pub kind: RuleKind,
    /// The source predicate the rule serves.
    pub origin: Symbol,
    /// Stratum of `origin` in the stratifiable source program.
    pub stratum: usize,
}

/// Provenance of a rewritten rule set, parallel to its rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub origins: Vec<RuleOrigin>,
}

/// Layers a magic-rewritten rule set for the soft consequence operator.
///
/// Non-magic rules go to the stratum of their originating predicate; a magic
/// rule goes to the earliest layer holding a rule that consumes its head.
/// A rule set that happens to be stratifiable keeps its stratification.
pub fn soft_partition(rules: &[Rule], provenance: &Provenance) -> Result<Partition> {
    if let Ok(strata) = stratification(rules) {
        return Ok(strata.partition);
    }
    if provenance.origins.len() != rules.len() {
        let missing = rules
            .get(provenance.origins.len())
            .map_or_else(String::new, |r| r.to_string());
        return Err(Error::MissingProvenance(missing));
    }
    const UNSET: usize = usize::MAX;
    let magic_preds: BTreeSet<&Symbol> = rules
        .iter()
        .zip(&provenance.origins)
        .filter(|(_, o)| o.kind == RuleKind::Magic)
        .map(|(r, _)| &r.head[0].pred)
        .collect();
    let mut magic_layer: BTreeMap<&Symbol, usize> =
        magic_preds.iter().map(|p| (*p, UNSET)).collect();
    let rule_layer = |i: usize, ml: &BTreeMap<&Symbol, usize>| -> usize {
        let o = &provenance.origins[i];
        match o.kind {
            RuleKind::Magic => ml[&rules[i].head[0].pred],
            _ => o.stratum,
        }
    };
    loop {
        let mut changed = false;
        for (i, r) in rules.iter().enumerate() {
            let layer = rule_layer(i, &magic_layer);
            if layer == UNSET {
                continue;
            }
            for a in r.positive_body() {
                if let Some(cur) = magic_layer.get_mut(&a.pred) {
                    if layer < *cur {
                        *cur = layer;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for v in magic_layer.values_mut() {
        if *v == UNSET {
            *v = 0;
        }
    }
    let mut layers: BTreeMap<usize, Vec<Rule>> = BTreeMap::new();
    for (i, r) in rules.iter().enumerate() {
        layers
            .entry(rule_layer(i, &magic_layer))
            .or_default()
            .push(r.clone());
    }
    Ok(Partition::new(layers.into_values().collect()))
}
