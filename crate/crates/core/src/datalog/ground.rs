use std::collections::{BTreeSet, HashSet};

use crate::matcher::{unify_ground, AtomIndex};
use crate::model::{
    grounding_count, Atom, GroundingError, Predicate, Rule, Substitution, Symbol, Term, DEFAULT_GROUNDING_BUDGET,
};

/// A variable-free normal program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    pub facts: BTreeSet<Atom>,
}

impl GroundProgram {
    pub fn new(rules: Vec<Rule>, facts: impl IntoIterator<Item = Atom>) -> Self {
        debug_assert!(rules.iter().all(Rule::is_ground));
        GroundProgram { rules, facts: facts.into_iter().collect() }
    }

    /// Every atom occurring in the program.
    pub fn herbrand_base(&self) -> BTreeSet<Atom> {
        let mut out = self.facts.clone();
        for r in &self.rules {
            out.insert(r.head.clone());
            out.extend(r.body.iter().map(|l| l.atom.clone()));
        }
        out
    }

    pub fn is_naf_free(&self) -> bool {
        self.rules.iter().all(|r| r.body.iter().all(|l| l.positive))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundingOptions {
    pub budget: u64,
    /// Drop instances whose positive body holds an extensional atom absent from the facts.
    pub prune_extensional: bool,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions { budget: DEFAULT_GROUNDING_BUDGET, prune_extensional: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GroundingStats {
    /// `Σ |domain|^|vars(r)|`, the instance count before pruning.
    pub candidate_instances: u64,
    pub emitted: usize,
}

/// Instantiates `rules` over `domain` (extended with the constants of rules and facts).
pub fn ground_program(
    rules: &[Rule],
    facts: impl IntoIterator<Item = Atom>,
    domain: &BTreeSet<Symbol>,
    options: GroundingOptions,
) -> Result<(GroundProgram, GroundingStats), GroundingError> {
    let facts: BTreeSet<Atom> = facts.into_iter().collect();
    let mut domain = domain.clone();
    domain.extend(facts.iter().flat_map(|a| a.constants().cloned()));
    for r in rules {
        domain.extend(r.constants());
    }
    let domain: Vec<Symbol> = domain.into_iter().collect();

    let intensional: HashSet<&Predicate> = rules.iter().map(|r| &r.head.pred).collect();
    let fact_index: AtomIndex = facts.iter().cloned().collect();

    let mut stats = GroundingStats::default();
    for r in rules {
        stats.candidate_instances =
            stats.candidate_instances.saturating_add(grounding_count(r.vars().len(), domain.len()));
    }
    if stats.candidate_instances > options.budget {
        return Err(GroundingError::BudgetExceeded { requested: stats.candidate_instances, budget: options.budget });
    }

    let mut out = Vec::new();
    for r in rules {
        let vars = r.vars();
        let anchored: Vec<&Atom> = if options.prune_extensional {
            r.positive_body().filter(|a| !intensional.contains(&a.pred)).collect()
        } else {
            Vec::new()
        };
        let mut subst = Substitution::new();
        instantiate(r, &anchored, &vars, &domain, &fact_index, &mut subst, &mut out);
    }
    stats.emitted = out.len();
    Ok((GroundProgram { rules: out, facts }, stats))
}

/// Extensional atoms are matched against the facts first, remaining
/// variables range over the domain.
fn instantiate(
    rule: &Rule,
    anchored: &[&Atom],
    vars: &[Symbol],
    domain: &[Symbol],
    facts: &AtomIndex,
    subst: &mut Substitution,
    out: &mut Vec<Rule>,
) {
    if let Some((first, rest)) = anchored.split_first() {
        let pattern = first.apply(subst);
        if pattern.is_ground() {
            if facts.contains(&pattern) {
                instantiate(rule, rest, vars, domain, facts, subst, out);
            }
            return;
        }
        let mut candidates: Vec<&Atom> = facts.of(&pattern.pred).iter().collect();
        candidates.sort();
        for c in candidates {
            let saved = subst.clone();
            if unify_ground(&pattern, c, subst) {
                instantiate(rule, rest, vars, domain, facts, subst, out);
            }
            *subst = saved;
        }
        return;
    }
    match vars.iter().find(|v| subst.get(v).is_none()) {
        None => out.push(rule.apply(subst)),
        Some(v) => {
            for c in domain {
                subst.bind(v.clone(), Term::Const(c.clone()));
                instantiate(rule, anchored, vars, domain, facts, subst, out);
            }
            subst.0.remove(v);
        }
    }
}
