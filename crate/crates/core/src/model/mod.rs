//! Terms, atoms, rules and the hybrid knowledge base.

mod kb;
mod rule;
mod term;

pub use kb::{ConceptExpr, DlAxiom, ExampleSet, HybridKb, LanguageBias, Signature};
pub use rule::{
    deskolemize, ground_substitutions, grounding_count, skolemize, validate_safeness, GroundingError, Rule,
    SafenessCondition, SafenessReport, SafenessViolation, DEFAULT_GROUNDING_BUDGET,
};
pub use term::{
    constants_of, is_skolem_name, is_variable_name, sym, Atom, Literal, PredKind, Predicate, Substitution, Symbol, Term,
};
