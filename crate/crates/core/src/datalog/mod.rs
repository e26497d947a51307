//! Grounding, stable models and query answering for normal Datalog programs.

mod ground;
mod query;
mod solve;

use thiserror::Error;

use crate::model::GroundingError;

pub use ground::{ground_program, GroundProgram, GroundingOptions, GroundingStats};
pub use query::{answer_query, answer_query_with, QueryMode};
pub use solve::{
    is_stable_model, stable_models, stable_models_with, Interpretation, SolverOptions, DEFAULT_MAX_CHOICE_ATOMS,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DatalogError {
    #[error("program has no stable model")]
    Inconsistent,
    #[error("model search would branch on {undecided} undecided atoms (limit {limit})")]
    ChoiceBudget { undecided: usize, limit: usize },
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}
