//! The hypothesis language and the downward refinement operator.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::dl::subsumes;
use crate::model::{sym, validate_safeness, Atom, DlAxiom, LanguageBias, Literal, Predicate, Rule, Symbol, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("target `{0}` must be a concept or role")]
    TargetNotDl(Predicate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefinementRule {
    AddDataLitPos,
    AddOntoLit,
    SpecOntoLit,
    AddDataLitNeg,
}

impl RefinementRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RefinementRule::AddDataLitPos => "AddDataLit_B+",
            RefinementRule::AddOntoLit => "AddOntoLit_B",
            RefinementRule::SpecOntoLit => "SpecOntoLit_B",
            RefinementRule::AddDataLitNeg => "AddDataLit_B-",
        }
    }
}

impl fmt::Display for RefinementRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementStep {
    pub rule_applied: RefinementRule,
    /// The literal added, or the specialized literal for `SpecOntoLit_B`.
    pub literal: Literal,
    /// The literal it replaced, for `SpecOntoLit_B`.
    pub replaced: Option<Literal>,
    pub parent: Rule,
    pub child: Rule,
}

impl fmt::Display for RefinementStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.replaced {
            Some(old) => write!(f, "{} {} -> {}", self.rule_applied, old, self.literal),
            None => write!(f, "{} {}", self.rule_applied, self.literal),
        }
    }
}

const FRESH_NAMES: [&str; 11] = ["X", "Y", "Z", "W", "V", "U", "T", "S", "R", "Q", "P"];

/// `n` variable names not used in `taken`, in a fixed order.
fn fresh_vars(taken: &BTreeSet<Symbol>, n: usize) -> Vec<Symbol> {
    let suffixed = (1..).flat_map(|i| FRESH_NAMES.iter().map(move |b| format!("{b}{i}")));
    FRESH_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(suffixed)
        .filter(|s| !taken.contains(s.as_str()))
        .take(n)
        .map(|s| sym(&s))
        .collect()
}

/// Argument tuples over `existing` plus up to `max_new` fresh variables, the
/// fresh ones introduced in order, with at least one existing variable.
fn tuples(arity: usize, existing: &[Symbol], fresh: &[Symbol], max_new: usize) -> Vec<Vec<Symbol>> {
    fn go(
        arity: usize,
        existing: &[Symbol],
        fresh: &[Symbol],
        max_new: usize,
        used_new: usize,
        cur: &mut Vec<Symbol>,
        out: &mut Vec<Vec<Symbol>>,
    ) {
        if cur.len() == arity {
            if cur.iter().any(|v| existing.contains(v)) {
                out.push(cur.clone());
            }
            return;
        }
        for v in existing.iter().chain(&fresh[..used_new]) {
            cur.push(v.clone());
            go(arity, existing, fresh, max_new, used_new, cur, out);
            cur.pop();
        }
        if used_new < max_new.min(fresh.len()) {
            cur.push(fresh[used_new].clone());
            go(arity, existing, fresh, max_new, used_new + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(arity, existing, fresh, max_new, 0, &mut Vec::new(), &mut out);
    out
}

fn atom_of(pred: &Predicate, vars: &[Symbol]) -> Atom {
    Atom::new(pred.clone(), vars.iter().map(|v| Term::Var(v.clone())).collect())
}

#[derive(Clone, Debug)]
pub struct HypothesisSpace {
    pub target: Predicate,
    pub bias: LanguageBias,
    pub tbox: Vec<DlAxiom>,
    /// Fresh variables a single added literal may introduce.
    pub max_new_vars: usize,
}

impl HypothesisSpace {
    pub fn new(target: Predicate, bias: LanguageBias, tbox: Vec<DlAxiom>) -> Result<Self, RefineError> {
        if !target.is_dl() {
            return Err(RefineError::TargetNotDl(target));
        }
        Ok(HypothesisSpace { target, bias, tbox, max_new_vars: 1 })
    }

    /// `p(X1..Xn) ←`, the most general rule. It is not itself in the language.
    pub fn seed_rule(&self) -> Rule {
        let vars = fresh_vars(&BTreeSet::new(), self.target.arity);
        Rule::new(atom_of(&self.target, &vars), Vec::new())
    }

    pub fn in_language(&self, h: &Rule) -> bool {
        in_language(h, &self.bias, &self.target)
    }

    fn below(&self, specific: &Predicate, general: &Predicate) -> bool {
        specific.kind == general.kind && subsumes(general, specific, &self.tbox).unwrap_or(false)
    }

    /// Every child of `h` under one rule application, deduplicated up to
    /// variable renaming, in a deterministic order.
    pub fn refine(&self, h: &Rule) -> Vec<(Rule, RefinementStep)> {
        let vars = h.vars();
        let fresh = fresh_vars(&vars.iter().cloned().collect(), self.max_new_vars);
        let pos_vars: Vec<Symbol> = {
            let pv = h.positive_body_vars();
            vars.iter().filter(|v| pv.contains(*v)).cloned().collect()
        };
        let mut raw: Vec<(Rule, RefinementStep)> = Vec::new();
        let mut emit = |rule_applied: RefinementRule, literal: Literal, replaced: Option<Literal>| {
            let mut body: Vec<Literal> = h.body.iter().filter(|l| Some(*l) != replaced.as_ref()).cloned().collect();
            match &replaced {
                Some(old) => {
                    let at = h.body.iter().position(|l| l == old).expect("replaced literal is in the body");
                    body.insert(at, literal.clone());
                }
                None => body.push(literal.clone()),
            }
            let child = Rule::new(h.head.clone(), body);
            raw.push((child.clone(), RefinementStep { rule_applied, literal, replaced, parent: h.clone(), child }));
        };

        for p in &self.bias.datalog_pos {
            for args in tuples(p.arity, &vars, &fresh, self.max_new_vars) {
                let lit = Literal::pos(atom_of(p, &args));
                if !h.body.contains(&lit) {
                    emit(RefinementRule::AddDataLitPos, lit, None);
                }
            }
        }

        let body_dl: Vec<&Atom> = h.positive_body().filter(|a| a.pred.is_dl()).collect();
        for p in self.bias.dl_predicates() {
            if body_dl.iter().any(|s| self.below(p, &s.pred)) {
                continue;
            }
            for args in tuples(p.arity, &vars, &fresh, self.max_new_vars) {
                emit(RefinementRule::AddOntoLit, Literal::pos(atom_of(p, &args)), None);
            }
        }

        for s in &body_dl {
            for p in self.bias.dl_predicates() {
                if p == &s.pred || !self.below(p, &s.pred) {
                    continue;
                }
                let lit = Literal::pos(Atom::new(p.clone(), s.args.clone()));
                if !h.body.contains(&lit) {
                    emit(RefinementRule::SpecOntoLit, lit, Some(Literal::pos((*s).clone())));
                }
            }
        }

        for p in &self.bias.datalog_neg {
            for args in tuples(p.arity, &pos_vars, &[], 0) {
                let atom = atom_of(p, &args);
                if !h.body.iter().any(|l| l.atom == atom) {
                    emit(RefinementRule::AddDataLitNeg, Literal::naf(atom), None);
                }
            }
        }

        let mut seen = HashSet::new();
        raw.retain(|(child, _)| {
            validate_safeness(child).is_ok() && child.is_linked() && seen.insert(child.canonical_key())
        });
        raw
    }
}

/// Whether `h` belongs to the language the bias defines for `target`.
pub fn in_language(h: &Rule, bias: &LanguageBias, target: &Predicate) -> bool {
    h.head.pred == *target
        && h.head.args.iter().all(Term::is_var)
        && h.body.iter().all(|l| {
            let p = &l.atom.pred;
            l.atom.args.iter().all(Term::is_var)
                && if !l.positive {
                    bias.datalog_neg.contains(p)
                } else {
                    bias.datalog_pos.contains(p) || bias.concepts.contains(p) || bias.roles.contains(p)
                }
        })
        && validate_safeness(h).is_ok()
        && h.is_linked()
}
