use std::collections::BTreeSet;
use std::fmt;

use super::rule::Rule;
use super::term::{Atom, PredKind, Predicate, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptExpr {
    Top,
    Atomic(Predicate),
    And(Vec<ConceptExpr>),
    /// `∃R.⊤`, or `∃R⁻.⊤` when `inverse` is set.
    Exists {
        role: Predicate,
        inverse: bool,
    },
}

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Top => f.write_str("Top"),
            ConceptExpr::Atomic(p) => f.write_str(&p.name),
            ConceptExpr::And(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            ConceptExpr::Exists { role, inverse: false } => write!(f, "some {} Top", role.name),
            ConceptExpr::Exists { role, inverse: true } => write!(f, "some inv({}) Top", role.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DlAxiom {
    ConceptInclusion { sub: ConceptExpr, sup: ConceptExpr },
    RoleInclusion { sub: Predicate, sup: Predicate },
}

impl fmt::Display for DlAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DlAxiom::ConceptInclusion { sub, sup } => write!(f, "{sub} subclass {sup}."),
            DlAxiom::RoleInclusion { sub, sup } => write!(f, "{} subrole {}.", sub.name, sup.name),
        }
    }
}

/// The predicate alphabets of a knowledge base.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: BTreeSet<Predicate>,
    pub roles: BTreeSet<Predicate>,
    pub datalog: BTreeSet<Predicate>,
}

impl Signature {
    pub fn declare(&mut self, pred: Predicate) -> bool {
        match pred.kind {
            PredKind::Concept => self.concepts.insert(pred),
            PredKind::Role => self.roles.insert(pred),
            PredKind::Datalog => self.datalog.insert(pred),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&Predicate> {
        self.iter().find(|p| &*p.name == name)
    }

    pub fn contains(&self, pred: &Predicate) -> bool {
        self.concepts.contains(pred) || self.roles.contains(pred) || self.datalog.contains(pred)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Predicate> {
        self.concepts.iter().chain(self.roles.iter()).chain(self.datalog.iter())
    }
}

/// Background theory: TBox and ABox coupled with a normal Datalog program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HybridKb {
    pub tbox: Vec<DlAxiom>,
    pub abox: Vec<Atom>,
    pub idb: Vec<Rule>,
    pub edb: Vec<Atom>,
    pub signature: Signature,
}

impl HybridKb {
    /// The intensional part `T ∪ IDB(Π)`, with the same alphabets.
    pub fn intensional(&self) -> HybridKb {
        HybridKb {
            tbox: self.tbox.clone(),
            abox: Vec::new(),
            idb: self.idb.clone(),
            edb: Vec::new(),
            signature: self.signature.clone(),
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        self.abox.iter().chain(self.edb.iter())
    }

    /// Constants occurring anywhere in the KB.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.facts().flat_map(|a| a.constants().cloned()).collect();
        for r in &self.idb {
            out.extend(r.constants());
        }
        out
    }

    /// Constants of the extensional part `A ∪ EDB(Π)`; examples must be drawn from these.
    pub fn individuals(&self) -> BTreeSet<Symbol> {
        self.facts().flat_map(|a| a.constants().cloned()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.tbox.is_empty() && self.abox.is_empty() && self.idb.is_empty() && self.edb.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleSet {
    pub target: Predicate,
    pub positives: Vec<Atom>,
    pub negatives: Vec<Atom>,
}

impl ExampleSet {
    pub fn new(target: Predicate) -> Self {
        ExampleSet { target, positives: Vec::new(), negatives: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Alphabets of the hypothesis language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LanguageBias {
    pub concepts: BTreeSet<Predicate>,
    pub roles: BTreeSet<Predicate>,
    pub datalog_pos: BTreeSet<Predicate>,
    pub datalog_neg: BTreeSet<Predicate>,
}

impl LanguageBias {
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty() && self.datalog_pos.is_empty() && self.datalog_neg.is_empty()
    }

    pub fn dl_predicates(&self) -> impl Iterator<Item = &Predicate> {
        self.concepts.iter().chain(self.roles.iter())
    }
}
