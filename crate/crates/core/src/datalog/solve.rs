use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::ground::GroundProgram;
use super::DatalogError;
use crate::model::{Atom, Predicate};

/// Default cap on undecided NAF atoms the model search may branch on.
pub const DEFAULT_MAX_CHOICE_ATOMS: usize = 24;

/// A Herbrand interpretation, given by its true atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation {
    pub true_atoms: BTreeSet<Atom>,
}

impl Interpretation {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Interpretation { true_atoms: atoms.into_iter().collect() }
    }

    pub fn holds(&self, atom: &Atom) -> bool {
        self.true_atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.true_atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_atoms.is_empty()
    }
}

/// `i` is stable iff it equals the least model of the reduct `p^i`.
/// Written independently of the solver below so it can serve as its oracle.
pub fn is_stable_model(p: &GroundProgram, i: &Interpretation) -> bool {
    let reduct: Vec<(&Atom, Vec<&Atom>)> = p
        .rules
        .iter()
        .filter(|r| r.negative_body().all(|a| !i.holds(a)))
        .map(|r| (&r.head, r.positive_body().collect()))
        .collect();
    let mut model: BTreeSet<Atom> = p.facts.clone();
    loop {
        let mut changed = false;
        for (head, body) in &reduct {
            if !model.contains(*head) && body.iter().all(|a| model.contains(*a)) {
                model.insert((*head).clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    model == i.true_atoms
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub max_choice_atoms: usize,
    /// Use iterated least fixpoints when the predicate graph has no negative cycle.
    pub stratified_fast_path: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_choice_atoms: DEFAULT_MAX_CHOICE_ATOMS, stratified_fast_path: true }
    }
}

/// All stable models, sorted. An empty result means the program has none.
pub fn stable_models(p: &GroundProgram) -> Result<Vec<Interpretation>, DatalogError> {
    stable_models_with(p, SolverOptions::default())
}

pub fn stable_models_with(p: &GroundProgram, options: SolverOptions) -> Result<Vec<Interpretation>, DatalogError> {
    let compiled = Compiled::new(p);
    if options.stratified_fast_path {
        if let Some(strata) = stratify(p, &compiled) {
            return Ok(vec![compiled.interpretation(&compiled.stratified_model(&strata))]);
        }
    }
    let mut search = Search::new(&compiled);
    let mut root = vec![None; compiled.naf_atoms.len()];
    if !search.propagate(&mut root) {
        return Ok(Vec::new());
    }
    let undecided = root.iter().filter(|v| v.is_none()).count();
    if undecided > options.max_choice_atoms {
        return Err(DatalogError::ChoiceBudget { undecided, limit: options.max_choice_atoms });
    }
    search.branch(root);
    let mut models: Vec<Interpretation> =
        search.found.into_iter().map(|m| compiled.interpretation(&m)).collect::<BTreeSet<_>>().into_iter().collect();
    models.sort();
    debug_assert!(models.iter().all(|m| is_stable_model(p, m)));
    Ok(models)
}

struct CompiledRule {
    head: usize,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Atoms numbered densely; rules as index lists.
struct Compiled {
    atoms: Vec<Atom>,
    rules: Vec<CompiledRule>,
    facts: Vec<usize>,
    /// Atoms occurring under NAF, and each atom's slot among them.
    naf_atoms: Vec<usize>,
    naf_slot: HashMap<usize, usize>,
    /// Rules where an atom occurs in the positive body.
    watches: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(p: &GroundProgram) -> Self {
        let mut ids: HashMap<Atom, usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut id = |a: &Atom, atoms: &mut Vec<Atom>| -> usize {
            *ids.entry(a.clone()).or_insert_with(|| {
                atoms.push(a.clone());
                atoms.len() - 1
            })
        };
        let facts: Vec<usize> = p.facts.iter().map(|a| id(a, &mut atoms)).collect();
        let rules: Vec<CompiledRule> = p
            .rules
            .iter()
            .map(|r| CompiledRule {
                head: id(&r.head, &mut atoms),
                pos: r.positive_body().map(|a| id(a, &mut atoms)).collect(),
                neg: r.negative_body().map(|a| id(a, &mut atoms)).collect(),
            })
            .collect();
        let mut naf_atoms: Vec<usize> = rules.iter().flat_map(|r| r.neg.iter().copied()).collect();
        naf_atoms.sort_unstable();
        naf_atoms.dedup();
        let naf_slot = naf_atoms.iter().enumerate().map(|(slot, &a)| (a, slot)).collect();
        let mut watches = vec![Vec::new(); atoms.len()];
        for (ri, r) in rules.iter().enumerate() {
            for &a in &r.pos {
                watches[a].push(ri);
            }
        }
        Compiled { atoms, rules, facts, naf_atoms, naf_slot, watches }
    }

    /// Least model of the rules selected by `active`.
    fn least_model(&self, active: &dyn Fn(&CompiledRule) -> bool, seed: Option<&[bool]>) -> Vec<bool> {
        let mut model = seed.map_or_else(|| vec![false; self.atoms.len()], <[bool]>::to_vec);
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos.len()).collect();
        let mut queue: VecDeque<usize> = VecDeque::new();
        let derive = |a: usize, model: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            if !model[a] {
                model[a] = true;
                queue.push_back(a);
            }
        };
        queue.extend(model.iter().enumerate().filter(|(_, t)| **t).map(|(a, _)| a));
        for &f in &self.facts {
            derive(f, &mut model, &mut queue);
        }
        for r in &self.rules {
            if r.pos.is_empty() && active(r) {
                derive(r.head, &mut model, &mut queue);
            }
        }
        while let Some(a) = queue.pop_front() {
            for &ri in &self.watches[a] {
                missing[ri] -= 1;
                let r = &self.rules[ri];
                if missing[ri] == 0 && active(r) {
                    derive(r.head, &mut model, &mut queue);
                }
            }
        }
        model
    }

    fn stratified_model(&self, strata: &[Vec<usize>]) -> Vec<bool> {
        let mut model = vec![false; self.atoms.len()];
        for f in &self.facts {
            model[*f] = true;
        }
        for stratum in strata {
            let frozen = model.clone();
            let in_stratum: std::collections::HashSet<usize> = stratum.iter().copied().collect();
            model = self.least_model(
                &|r: &CompiledRule| in_stratum.contains(&r.head) && r.neg.iter().all(|&n| !frozen[n]),
                Some(&model),
            );
        }
        model
    }

    fn interpretation(&self, model: &[bool]) -> Interpretation {
        Interpretation::new(model.iter().enumerate().filter(|(_, t)| **t).map(|(i, _)| self.atoms[i].clone()))
    }
}

/// Groups atoms (by predicate) into strata, lowest first; `None` if some
/// predicate depends negatively on itself through a cycle.
fn stratify(p: &GroundProgram, compiled: &Compiled) -> Option<Vec<Vec<usize>>> {
    let mut graph: DiGraph<Predicate, bool> = DiGraph::new();
    let mut nodes: HashMap<Predicate, NodeIndex> = HashMap::new();
    let mut node = |pred: &Predicate, graph: &mut DiGraph<Predicate, bool>| {
        *nodes.entry(pred.clone()).or_insert_with(|| graph.add_node(pred.clone()))
    };
    for a in &compiled.atoms {
        node(&a.pred, &mut graph);
    }
    for r in &p.rules {
        let h = node(&r.head.pred, &mut graph);
        for l in &r.body {
            let b = node(&l.atom.pred, &mut graph);
            graph.add_edge(h, b, !l.positive);
        }
    }
    // tarjan_scc lists dependencies before dependents for head -> body edges
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; graph.node_count()];
    for (ci, scc) in sccs.iter().enumerate() {
        for n in scc {
            component[n.index()] = ci;
        }
    }
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).expect("edge exists");
        if graph[e] && component[a.index()] == component[b.index()] {
            return None;
        }
    }
    let mut strata = vec![Vec::new(); sccs.len()];
    for (ai, a) in compiled.atoms.iter().enumerate() {
        strata[component[nodes[&a.pred].index()]].push(ai);
    }
    Some(strata)
}

struct Search<'c> {
    c: &'c Compiled,
    found: Vec<Vec<bool>>,
}

impl<'c> Search<'c> {
    fn new(c: &'c Compiled) -> Self {
        Search { c, found: Vec::new() }
    }

    fn naf_value(&self, assign: &[Option<bool>], atom: usize) -> Option<bool> {
        assign[self.c.naf_slot[&atom]]
    }

    /// Narrows `assign` using the lower bound (rules whose NAF atoms are all
    /// assigned false) and the upper bound (rules with no NAF atom assigned true).
    /// Returns false on conflict.
    fn propagate(&self, assign: &mut [Option<bool>]) -> bool {
        loop {
            let lower = self
                .c
                .least_model(&|r: &CompiledRule| r.neg.iter().all(|&n| self.naf_value(assign, n) == Some(false)), None);
            let upper = self
                .c
                .least_model(&|r: &CompiledRule| r.neg.iter().all(|&n| self.naf_value(assign, n) != Some(true)), None);
            let mut changed = false;
            for (slot, &atom) in self.c.naf_atoms.iter().enumerate() {
                match assign[slot] {
                    Some(true) if !upper[atom] => return false,
                    Some(false) if lower[atom] => return false,
                    Some(_) => {}
                    None if lower[atom] => {
                        assign[slot] = Some(true);
                        changed = true;
                    }
                    None if !upper[atom] => {
                        assign[slot] = Some(false);
                        changed = true;
                    }
                    None => {}
                }
            }
            if !changed {
                if assign.iter().all(Option::is_some) {
                    debug_assert_eq!(lower, upper);
                }
                return true;
            }
        }
    }

    fn branch(&mut self, assign: Vec<Option<bool>>) {
        match assign.iter().position(Option::is_none) {
            None => {
                let model = self.c.least_model(
                    &|r: &CompiledRule| r.neg.iter().all(|&n| self.naf_value(&assign, n) == Some(false)),
                    None,
                );
                self.found.push(model);
            }
            Some(slot) => {
                for value in [false, true] {
                    let mut next = assign.clone();
                    next[slot] = Some(value);
                    if self.propagate(&mut next) {
                        self.branch(next);
                    }
                }
            }
        }
    }
}
