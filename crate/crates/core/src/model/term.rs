use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Interned-by-sharing identifier.
pub type Symbol = Arc<str>;

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

/// A variable is an uppercase letter optionally followed by digits (`X`, `Y2`).
/// Every other identifier names a constant.
pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Skolem constants are `sk<digits>`; that shape is reserved.
pub fn is_skolem_name(name: &str) -> bool {
    name.len() > 2 && name.starts_with("sk") && name[2..].chars().all(|c| c.is_ascii_digit())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(sym(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(sym(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &Symbol {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(s) => Some(s),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Symbol> {
        match self {
            Term::Const(s) => Some(s),
            Term::Var(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredKind {
    Concept,
    Role,
    Datalog,
}

impl PredKind {
    pub fn is_dl(self) -> bool {
        !matches!(self, PredKind::Datalog)
    }
}

impl fmt::Display for PredKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredKind::Concept => "concept",
            PredKind::Role => "role",
            PredKind::Datalog => "datalog",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: Symbol,
    pub arity: usize,
    pub kind: PredKind,
}

impl Predicate {
    pub fn new(name: &str, arity: usize, kind: PredKind) -> Self {
        Predicate { name: sym(name), arity, kind }
    }

    pub fn concept(name: &str) -> Self {
        Self::new(name, 1, PredKind::Concept)
    }

    pub fn role(name: &str) -> Self {
        Self::new(name, 2, PredKind::Role)
    }

    pub fn datalog(name: &str, arity: usize) -> Self {
        Self::new(name, arity, PredKind::Datalog)
    }

    pub fn is_dl(&self) -> bool {
        self.kind.is_dl()
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<Term>,
}

impl Atom {
    /// Panics if the argument count does not match the arity; callers that
    /// handle user input check arity first.
    pub fn new(pred: Predicate, args: Vec<Term>) -> Self {
        assert_eq!(pred.arity, args.len(), "arity mismatch for {pred}");
        Atom { pred, args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_const)
    }

    pub fn apply(&self, subst: &Substitution) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| subst.apply_term(t)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred.name)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    /// NAF literal. Only datalog predicates may be negated; the parser and the
    /// refinement operator enforce this.
    pub fn naf(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn apply(&self, subst: &Substitution) -> Literal {
        Literal { atom: self.atom.apply(subst), positive: self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Mapping from variable names to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(pub BTreeMap<Symbol, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn bind(&mut self, var: Symbol, term: Term) {
        self.0.insert(var, term);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.0.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(Symbol, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Symbol, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

/// Collects constants of a sequence of atoms.
pub fn constants_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Symbol> {
    atoms.into_iter().flat_map(|a| a.constants().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_names() {
        assert!(is_variable_name("X"));
        assert!(is_variable_name("Z12"));
        assert!(!is_variable_name("Mary"));
        assert!(!is_variable_name("x"));
        assert!(!is_variable_name("XY"));
    }

    #[test]
    fn skolem_names() {
        assert!(is_skolem_name("sk0"));
        assert!(is_skolem_name("sk17"));
        assert!(!is_skolem_name("sk"));
        assert!(!is_skolem_name("skiing"));
    }

    #[test]
    fn atom_display() {
        let a = Atom::new(
            Predicate::datalog("meets", 3),
            vec![Term::constant("Mary"), Term::var("Z"), Term::constant("Italy")],
        );
        assert_eq!(a.to_string(), "meets(Mary,Z,Italy)");
        assert!(!a.is_ground());
    }
}
