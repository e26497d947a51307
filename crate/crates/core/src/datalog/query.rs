use std::collections::BTreeSet;

use super::solve::{stable_models_with, SolverOptions};
use super::{DatalogError, GroundProgram};
use crate::matcher::{all_matches, AtomIndex};
use crate::model::{Literal, Substitution};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QueryMode {
    /// True in every stable model.
    #[default]
    Cautious,
    /// True in some stable model.
    Brave,
}

/// Cautious answers to a conjunctive query. Variables of NAF literals must
/// also occur in a positive literal.
pub fn answer_query(p: &GroundProgram, q: &[Literal]) -> Result<Vec<Substitution>, DatalogError> {
    answer_query_with(p, q, QueryMode::Cautious, SolverOptions::default())
}

pub fn answer_query_with(
    p: &GroundProgram,
    q: &[Literal],
    mode: QueryMode,
    options: SolverOptions,
) -> Result<Vec<Substitution>, DatalogError> {
    let models = stable_models_with(p, options)?;
    if models.is_empty() {
        return Err(DatalogError::Inconsistent);
    }
    let mut acc: Option<BTreeSet<Substitution>> = None;
    for m in &models {
        let index: AtomIndex = m.true_atoms.iter().cloned().collect();
        let found: BTreeSet<Substitution> =
            all_matches(q, &index, &Substitution::new(), &|a| !index.contains(a)).into_iter().collect();
        acc = Some(match (acc, mode) {
            (None, _) => found,
            (Some(prev), QueryMode::Cautious) => prev.intersection(&found).cloned().collect(),
            (Some(prev), QueryMode::Brave) => prev.union(&found).cloned().collect(),
        });
    }
    Ok(acc.unwrap_or_default().into_iter().collect())
}
