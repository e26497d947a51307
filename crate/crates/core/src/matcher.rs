//! Join of rule bodies against a set of ground atoms.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use crate::model::{Atom, Literal, Predicate, Substitution, Term};

#[derive(Clone, Debug, Default)]
pub struct AtomIndex {
    by_pred: HashMap<Predicate, Vec<Atom>>,
    all: HashSet<Atom>,
}

impl AtomIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        if self.all.insert(atom.clone()) {
            self.by_pred.entry(atom.pred.clone()).or_default().push(atom);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.all.contains(atom)
    }

    pub fn of(&self, pred: &Predicate) -> &[Atom] {
        self.by_pred.get(pred).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.all.iter()
    }

    pub fn to_set(&self) -> BTreeSet<Atom> {
        self.all.iter().cloned().collect()
    }
}

impl FromIterator<Atom> for AtomIndex {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut idx = AtomIndex::new();
        for a in iter {
            idx.insert(a);
        }
        idx
    }
}

/// Extends `subst` so that `pattern` instantiates to `ground`, if possible.
pub fn unify_ground(pattern: &Atom, ground: &Atom, subst: &mut Substitution) -> bool {
    if pattern.pred != ground.pred {
        return false;
    }
    let mut added = Vec::new();
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        let ok = match p {
            Term::Const(_) => p == g,
            Term::Var(v) => match subst.get(v) {
                Some(bound) => bound == g,
                None => {
                    subst.bind(v.clone(), g.clone());
                    added.push(v.clone());
                    true
                }
            },
        };
        if !ok {
            for v in added {
                subst.0.remove(&v);
            }
            return false;
        }
    }
    true
}

/// Enumerates substitutions making every positive literal true in `index`
/// and every NAF literal satisfy `naf_holds`. NAF literals are checked once
/// their variables are bound by positive literals (safe bodies).
pub fn for_each_match<B>(
    body: &[Literal],
    index: &AtomIndex,
    init: &Substitution,
    naf_holds: &dyn Fn(&Atom) -> bool,
    visit: &mut dyn FnMut(&Substitution) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let mut positive: Vec<&Atom> = body.iter().filter(|l| l.positive).map(|l| &l.atom).collect();
    // most-constrained first: fewer candidate atoms
    positive.sort_by_key(|a| index.of(&a.pred).len());
    let negative: Vec<&Atom> = body.iter().filter(|l| !l.positive).map(|l| &l.atom).collect();
    let mut subst = init.clone();
    search(&positive, &negative, index, &mut subst, naf_holds, visit)
}

fn search<B>(
    positive: &[&Atom],
    negative: &[&Atom],
    index: &AtomIndex,
    subst: &mut Substitution,
    naf_holds: &dyn Fn(&Atom) -> bool,
    visit: &mut dyn FnMut(&Substitution) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let Some((first, rest)) = positive.split_first() else {
        for n in negative {
            if !naf_holds(&n.apply(subst)) {
                return ControlFlow::Continue(());
            }
        }
        return visit(subst);
    };
    let pattern = first.apply(subst);
    if pattern.is_ground() {
        if index.contains(&pattern) {
            return search(rest, negative, index, subst, naf_holds, visit);
        }
        return ControlFlow::Continue(());
    }
    for candidate in index.of(&pattern.pred) {
        let saved = subst.clone();
        if unify_ground(&pattern, candidate, subst) {
            search(rest, negative, index, subst, naf_holds, visit)?;
        }
        *subst = saved;
    }
    ControlFlow::Continue(())
}

/// All matching substitutions, deduplicated and sorted.
pub fn all_matches(
    body: &[Literal],
    index: &AtomIndex,
    init: &Substitution,
    naf_holds: &dyn Fn(&Atom) -> bool,
) -> Vec<Substitution> {
    let mut out = BTreeSet::new();
    let _ = for_each_match::<()>(body, index, init, naf_holds, &mut |s| {
        out.insert(s.clone());
        ControlFlow::Continue(())
    });
    out.into_iter().collect()
}

pub fn has_match(body: &[Literal], index: &AtomIndex, init: &Substitution, naf_holds: &dyn Fn(&Atom) -> bool) -> bool {
    for_each_match(body, index, init, naf_holds, &mut |_| ControlFlow::Break(())).is_break()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Predicate, Term};

    fn meets(a: &str, b: &str, c: &str) -> Atom {
        let t = |s: &str| if crate::model::is_variable_name(s) { Term::var(s) } else { Term::constant(s) };
        Atom::new(Predicate::datalog("meets", 3), vec![t(a), t(b), t(c)])
    }

    #[test]
    fn join_binds_shared_variables() {
        let idx: AtomIndex =
            [meets("Mary", "Paul", "Italy"), meets("Mary", "Joe", "Germany"), meets("Joe", "Mary", "Italy")]
                .into_iter()
                .collect();
        let body = vec![Literal::pos(meets("Mary", "Z", "Italy"))];
        let found = all_matches(&body, &idx, &Substitution::new(), &|_| true);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].get("Z"), Some(&Term::constant("Paul")));

        let repeated = vec![Literal::pos(meets("X", "X", "Y"))];
        assert!(all_matches(&repeated, &idx, &Substitution::new(), &|_| true).is_empty());
    }

    #[test]
    fn naf_filter_applies_after_binding() {
        let idx: AtomIndex = [meets("Mary", "Paul", "Italy"), meets("Joe", "Mary", "Italy")].into_iter().collect();
        let body = vec![Literal::pos(meets("X", "Z", "Italy")), Literal::naf(meets("Z", "X", "Italy"))];
        let found = all_matches(&body, &idx, &Substitution::new(), &|a| !idx.contains(a));
        assert_eq!(found.len(), 2);
        let blocked = vec![Literal::pos(meets("X", "Z", "Y")), Literal::naf(meets("X", "Z", "Y"))];
        assert!(!has_match(&blocked, &idx, &Substitution::new(), &|a| !idx.contains(a)));
    }
}
