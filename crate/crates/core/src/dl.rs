//! The supported TBox fragment: `C1 ⊓ ... ⊓ Cn ⊑ D` with each side built from
//! atomic concepts, `⊤` and `∃R(⁻).⊤`, plus role inclusions `R ⊑ S`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{sym, Atom, ConceptExpr, DlAxiom, Literal, PredKind, Predicate, Rule, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DlError {
    #[error("cannot compare {general} ({general_kind}) with {specific} ({specific_kind})")]
    KindMismatch { general: Predicate, general_kind: PredKind, specific: Predicate, specific_kind: PredKind },
    #[error("atom {0} is both true and false in the guess")]
    Contradictory(Atom),
    #[error("unsupported axiom `{0}`")]
    Unsupported(DlAxiom),
}

/// A signed set of ground DL atoms over named individuals.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DlGuess {
    pub true_atoms: BTreeSet<Atom>,
    pub false_atoms: BTreeSet<Atom>,
}

impl DlGuess {
    pub fn new(
        true_atoms: impl IntoIterator<Item = Atom>,
        false_atoms: impl IntoIterator<Item = Atom>,
    ) -> Result<Self, DlError> {
        let g =
            DlGuess { true_atoms: true_atoms.into_iter().collect(), false_atoms: false_atoms.into_iter().collect() };
        if let Some(a) = g.true_atoms.intersection(&g.false_atoms).next() {
            return Err(DlError::Contradictory(a.clone()));
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Saturation {
    Consistent(DlGuess),
    /// `atom` is derived but the guess declares it false.
    Inconsistent {
        atom: Atom,
        guess: DlGuess,
    },
}

impl Saturation {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Saturation::Consistent(_))
    }

    pub fn guess(&self) -> &DlGuess {
        match self {
            Saturation::Consistent(g) | Saturation::Inconsistent { guess: g, .. } => g,
        }
    }
}

/// Concept holding of the individuals with an `R`-successor (`∃R.⊤`) or an
/// `R`-predecessor (`∃R⁻.⊤`). The parenthesised name keeps it apart from user symbols.
pub fn witness_concept(role: &Predicate, inverse: bool) -> Predicate {
    let name = if inverse { format!("some(inv({}))", role.name) } else { format!("some({})", role.name) };
    Predicate { name: sym(&name), arity: 1, kind: PredKind::Concept }
}

pub fn is_witness_concept(pred: &Predicate) -> bool {
    pred.kind == PredKind::Concept && pred.name.starts_with("some(")
}

/// `specific ⊑ general` by the reflexive-transitive closure of atomic inclusions.
pub fn subsumes(general: &Predicate, specific: &Predicate, tbox: &[DlAxiom]) -> Result<bool, DlError> {
    if general.kind != specific.kind || !general.is_dl() {
        return Err(DlError::KindMismatch {
            general: general.clone(),
            general_kind: general.kind,
            specific: specific.clone(),
            specific_kind: specific.kind,
        });
    }
    Ok(supers(specific, tbox).contains(general))
}

/// Every named predicate subsuming `pred`, including itself.
pub fn supers(pred: &Predicate, tbox: &[DlAxiom]) -> BTreeSet<Predicate> {
    let edges = atomic_edges(tbox);
    let mut seen = BTreeSet::from([pred.clone()]);
    let mut stack = vec![pred.clone()];
    while let Some(p) = stack.pop() {
        for q in edges.get(&p).into_iter().flatten() {
            if seen.insert(q.clone()) {
                stack.push(q.clone());
            }
        }
    }
    seen
}

/// Every named predicate among `candidates` subsumed by `pred`, including itself.
pub fn subs<'a>(
    pred: &Predicate,
    candidates: impl IntoIterator<Item = &'a Predicate>,
    tbox: &[DlAxiom],
) -> BTreeSet<Predicate> {
    candidates.into_iter().filter(|c| supers(c, tbox).contains(pred)).cloned().collect()
}

fn atomic_edges(tbox: &[DlAxiom]) -> BTreeMap<Predicate, Vec<Predicate>> {
    let mut edges: BTreeMap<Predicate, Vec<Predicate>> = BTreeMap::new();
    for ax in tbox {
        match ax {
            DlAxiom::RoleInclusion { sub, sup } => edges.entry(sub.clone()).or_default().push(sup.clone()),
            DlAxiom::ConceptInclusion { sub, sup } => {
                let lhs = match sub {
                    ConceptExpr::Atomic(a) => a,
                    ConceptExpr::And(parts) if parts.len() == 1 => match &parts[0] {
                        ConceptExpr::Atomic(a) => a,
                        _ => continue,
                    },
                    _ => continue,
                };
                for d in conjuncts(sup) {
                    if let ConceptExpr::Atomic(d) = d {
                        edges.entry(lhs.clone()).or_default().push(d.clone());
                    }
                }
            }
        }
    }
    edges
}

fn conjuncts(c: &ConceptExpr) -> Vec<&ConceptExpr> {
    match c {
        ConceptExpr::And(parts) => parts.iter().flat_map(conjuncts).collect(),
        other => vec![other],
    }
}

/// Translates the TBox into definite rules over concept and role atoms.
/// Existential restrictions become witness concepts; every role `R` in
/// `roles` gets `some(R)(X) :- R(X,Y)` and `some(inv(R))(Y) :- R(X,Y)`.
pub fn tbox_rules<'a>(tbox: &[DlAxiom], roles: impl IntoIterator<Item = &'a Predicate>) -> Result<Vec<Rule>, DlError> {
    let x = Term::var("X");
    let y = Term::var("Y");
    let mut out = Vec::new();
    let mut all_roles: BTreeSet<Predicate> = roles.into_iter().cloned().collect();
    for ax in tbox {
        match ax {
            DlAxiom::RoleInclusion { sub, sup } => {
                all_roles.insert(sub.clone());
                all_roles.insert(sup.clone());
            }
            DlAxiom::ConceptInclusion { sub, sup } => {
                for c in conjuncts(sub).into_iter().chain(conjuncts(sup)) {
                    if let ConceptExpr::Exists { role, .. } = c {
                        all_roles.insert(role.clone());
                    }
                }
            }
        }
    }
    for r in &all_roles {
        let edge = Atom::new(r.clone(), vec![x.clone(), y.clone()]);
        out.push(Rule::new(Atom::new(witness_concept(r, false), vec![x.clone()]), vec![Literal::pos(edge.clone())]));
        out.push(Rule::new(Atom::new(witness_concept(r, true), vec![y.clone()]), vec![Literal::pos(edge)]));
    }
    for ax in tbox {
        match ax {
            DlAxiom::RoleInclusion { sub, sup } => {
                out.push(Rule::new(
                    Atom::new(sup.clone(), vec![x.clone(), y.clone()]),
                    vec![Literal::pos(Atom::new(sub.clone(), vec![x.clone(), y.clone()]))],
                ));
                for inverse in [false, true] {
                    out.push(Rule::new(
                        Atom::new(witness_concept(sup, inverse), vec![x.clone()]),
                        vec![Literal::pos(Atom::new(witness_concept(sub, inverse), vec![x.clone()]))],
                    ));
                }
            }
            DlAxiom::ConceptInclusion { sub, sup } => {
                let body: Vec<Literal> =
                    conjuncts(sub).into_iter().filter_map(|c| concept_atom(c, &x)).map(Literal::pos).collect();
                if body.is_empty() {
                    return Err(DlError::Unsupported(ax.clone()));
                }
                for d in conjuncts(sup) {
                    if let Some(head) = concept_atom(d, &x) {
                        out.push(Rule::new(head, body.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn concept_atom(c: &ConceptExpr, x: &Term) -> Option<Atom> {
    match c {
        ConceptExpr::Top | ConceptExpr::And(_) => None,
        ConceptExpr::Atomic(a) => Some(Atom::new(a.clone(), vec![x.clone()])),
        ConceptExpr::Exists { role, inverse } => Some(Atom::new(witness_concept(role, *inverse), vec![x.clone()])),
    }
}

/// Closes `guess.true_atoms` (plus the ABox) under the TBox. Existential
/// right-hand sides only ever yield witness concepts, never named role atoms.
pub fn saturate(guess: &DlGuess, tbox: &[DlAxiom], abox: &[Atom]) -> Result<Saturation, DlError> {
    let rules =
        tbox_rules(tbox, guess.true_atoms.iter().chain(abox).map(|a| &a.pred).filter(|p| p.kind == PredKind::Role))?;
    let mut index: crate::matcher::AtomIndex = guess.true_atoms.iter().chain(abox).cloned().collect();
    loop {
        let mut fresh = Vec::new();
        for r in &rules {
            for s in crate::matcher::all_matches(&r.body, &index, &Default::default(), &|_| true) {
                let h = r.head.apply(&s);
                if !index.contains(&h) {
                    fresh.push(h);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        for a in fresh {
            index.insert(a);
        }
    }
    let saturated = DlGuess { true_atoms: index.to_set(), false_atoms: guess.false_atoms.clone() };
    Ok(match saturated.true_atoms.intersection(&saturated.false_atoms).next() {
        Some(atom) => Saturation::Inconsistent { atom: atom.clone(), guess: saturated },
        None => Saturation::Consistent(saturated),
    })
}
