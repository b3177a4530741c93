//! Contract checkers, exploration drivers and reports.

mod explore;
mod replay;
mod report;
mod run;
mod verdict;

pub use explore::{all_assignments, explore, explore_default, measure_empirical_k, reachable_outcomes, Budget, ExploreConfig, InputsMode, SearchMode};
pub use replay::{Replay, ReplayError};
pub use report::{ExplorationReport, Violation, NOTE_CONDITIONAL_OK, NOTE_GAP, NOTE_INCOMPLETE, SCHEMA_VERSION};
pub use run::{execute, Adversary, RunConfig, RunResult, Trace};
pub use verdict::{check_agreement, Outcome, Snapshot, Verdict};

use thiserror::Error;

use crate::error::{ModelError, SpecError};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("n = {n} exceeds the exhaustive cap of {cap} for all input assignments; use sampled mode or fixed inputs")]
    TooLarge { n: usize, cap: usize },
}
