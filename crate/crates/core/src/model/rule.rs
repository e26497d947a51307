use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use super::term::{is_skolem_name, sym, Atom, Literal, Substitution, Symbol, Term};

/// Default cap on the number of ground instances a single grounding request may produce.
pub const DEFAULT_GROUNDING_BUDGET: u64 = 1_000_000;

/// A normal rule `head :- body`. The body is a set; order is kept only for
/// presentation and duplicates are dropped on construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        let mut seen = BTreeSet::new();
        let body = body.into_iter().filter(|l| seen.insert(l.clone())).collect();
        Rule { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Rule { head, body: Vec::new() }
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn negative_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| !l.positive).map(|l| &l.atom)
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(|l| l.atom.is_ground())
    }

    /// Variables in order of first occurrence, head first.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        let all = std::iter::once(&self.head).chain(self.body.iter().map(|l| &l.atom));
        for v in all.flat_map(|a| a.vars()) {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn head_vars(&self) -> BTreeSet<Symbol> {
        self.head.vars().cloned().collect()
    }

    pub fn body_vars(&self) -> BTreeSet<Symbol> {
        self.body.iter().flat_map(|l| l.atom.vars().cloned()).collect()
    }

    pub fn positive_body_vars(&self) -> BTreeSet<Symbol> {
        self.positive_body().flat_map(|a| a.vars().cloned()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        std::iter::once(&self.head)
            .chain(self.body.iter().map(|l| &l.atom))
            .flat_map(|a| a.constants().cloned())
            .collect()
    }

    pub fn apply(&self, subst: &Substitution) -> Rule {
        Rule::new(self.head.apply(subst), self.body.iter().map(|l| l.apply(subst)).collect())
    }

    /// Body compared as a set.
    pub fn same_as(&self, other: &Rule) -> bool {
        self.head == other.head
            && self.body.iter().collect::<BTreeSet<_>>() == other.body.iter().collect::<BTreeSet<_>>()
    }

    /// Every body literal is chained to the head through shared variables.
    pub fn is_linked(&self) -> bool {
        let mut linked = self.head_vars();
        let mut pending: Vec<&Literal> = self.body.iter().collect();
        loop {
            let before = pending.len();
            pending.retain(|l| {
                let vars: Vec<_> = l.atom.vars().cloned().collect();
                if vars.iter().any(|v| linked.contains(v)) {
                    linked.extend(vars);
                    false
                } else {
                    true
                }
            });
            if pending.is_empty() {
                return true;
            }
            if pending.len() == before {
                return false;
            }
        }
    }

    /// Canonical form up to variable renaming: head variables are numbered by
    /// position, body-only variables by the numbering that yields the
    /// lexicographically least sorted body.
    pub fn canonical_key(&self) -> String {
        let head_vars: Vec<Symbol> = self.head.vars().cloned().unique().collect();
        let body_only: Vec<Symbol> = self.vars().into_iter().filter(|v| !head_vars.contains(v)).collect();
        let mut base = Substitution::new();
        for (i, v) in head_vars.iter().enumerate() {
            base.bind(v.clone(), Term::Var(sym(&format!("H{i}"))));
        }
        let render = |subst: &Substitution| -> String {
            let mut lits: Vec<String> =
                self.body.iter().map(|l| format!("{}:{}", l.apply(subst), l.atom.pred.kind)).collect();
            lits.sort();
            format!("{} <- {}", self.head.apply(subst), lits.join(", "))
        };
        if body_only.len() > 6 {
            // first-occurrence numbering; exact canonicity is not needed past this size
            let mut s = base;
            for (i, v) in body_only.iter().enumerate() {
                s.bind(v.clone(), Term::Var(sym(&format!("B{i}"))));
            }
            return render(&s);
        }
        body_only
            .iter()
            .permutations(body_only.len())
            .map(|perm| {
                let mut s = base.clone();
                for (i, v) in perm.into_iter().enumerate() {
                    s.bind(v.clone(), Term::Var(sym(&format!("B{i}"))));
                }
                render(&s)
            })
            .min()
            .unwrap_or_else(|| render(&base))
    }

    pub fn equivalent_up_to_renaming(&self, other: &Rule) -> bool {
        self.head.pred == other.head.pred && self.canonical_key() == other.canonical_key()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SafenessCondition {
    /// Every variable occurs in a positive body atom.
    Datalog,
    /// Every head variable occurs in a positive datalog body atom.
    WeakDl,
}

impl fmt::Display for SafenessCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SafenessCondition::Datalog => "Datalog-safeness",
            SafenessCondition::WeakDl => "weak DL-safeness",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafenessViolation {
    pub var: Symbol,
    pub condition: SafenessCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unsafe rule: {}", .violations.iter().map(|v| format!("{} violates {}", v.var, v.condition)).join("; "))]
pub struct SafenessReport {
    pub violations: Vec<SafenessViolation>,
}

impl SafenessReport {
    pub fn offending(&self, condition: SafenessCondition) -> Vec<&str> {
        self.violations.iter().filter(|v| v.condition == condition).map(|v| &*v.var).collect()
    }
}

pub fn validate_safeness(rule: &Rule) -> Result<(), SafenessReport> {
    let positive: BTreeSet<Symbol> = rule.positive_body_vars();
    let positive_datalog: BTreeSet<Symbol> =
        rule.positive_body().filter(|a| !a.pred.is_dl()).flat_map(|a| a.vars().cloned()).collect();
    let mut violations = Vec::new();
    for v in rule.vars() {
        if !positive.contains(&v) {
            violations.push(SafenessViolation { var: v.clone(), condition: SafenessCondition::Datalog });
        }
    }
    for v in rule.head.vars().unique() {
        if !positive_datalog.contains(v) {
            violations.push(SafenessViolation { var: v.clone(), condition: SafenessCondition::WeakDl });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SafenessReport { violations })
    }
}

/// Replaces every variable by a fresh `sk<n>` constant outside `reserved`.
/// Numbering follows first occurrence, so the result is a function of the inputs.
pub fn skolemize(rule: &Rule, reserved: &BTreeSet<Symbol>) -> (Rule, Substitution) {
    let mut subst = Substitution::new();
    let mut next = 0usize;
    for v in rule.vars() {
        let name = loop {
            let candidate = format!("sk{next}");
            next += 1;
            if !reserved.contains(candidate.as_str()) {
                break candidate;
            }
        };
        debug_assert!(is_skolem_name(&name));
        subst.bind(v, Term::Const(sym(&name)));
    }
    (rule.apply(&subst), subst)
}

/// Undoes [`skolemize`]: maps each skolem constant of `subst` back to its variable.
pub fn deskolemize(rule: &Rule, subst: &Substitution) -> Rule {
    let back: std::collections::BTreeMap<&Term, &Symbol> = subst.iter().map(|(v, t)| (t, v)).collect();
    let undo = |a: &Atom| Atom {
        pred: a.pred.clone(),
        args: a.args.iter().map(|t| back.get(t).map_or_else(|| t.clone(), |v| Term::Var((*v).clone()))).collect(),
    };
    Rule::new(
        undo(&rule.head),
        rule.body.iter().map(|l| Literal { atom: undo(&l.atom), positive: l.positive }).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("grounding needs {requested} instances, budget is {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },
    #[error("cannot ground over an empty constant set")]
    EmptyDomain,
}

/// Number of groundings `|constants|^|vars|`, saturating.
pub fn grounding_count(num_vars: usize, num_constants: usize) -> u64 {
    (0..num_vars).fold(1u64, |acc, _| acc.saturating_mul(num_constants as u64))
}

/// All groundings of `rule` over `constants`, variables taken in order of first
/// occurrence and constants in the given order (lexicographic enumeration).
pub fn ground_substitutions(rule: &Rule, constants: &[Symbol], budget: u64) -> Result<Vec<Rule>, GroundingError> {
    let vars = rule.vars();
    if vars.is_empty() {
        return Ok(vec![rule.clone()]);
    }
    if constants.is_empty() {
        return Err(GroundingError::EmptyDomain);
    }
    let requested = grounding_count(vars.len(), constants.len());
    if requested > budget {
        return Err(GroundingError::BudgetExceeded { requested, budget });
    }
    Ok(vars
        .iter()
        .map(|_| constants.iter())
        .multi_cartesian_product()
        .map(|choice| {
            let subst: Substitution =
                vars.iter().cloned().zip(choice.into_iter().map(|c| Term::Const(c.clone()))).collect();
            rule.apply(&subst)
        })
        .collect())
}
