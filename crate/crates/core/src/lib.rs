//! Simulation and verification toolkit for partial agreement and partial set
//! agreement under crash faults.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod objects;
pub mod shmem;
pub mod sync;
pub mod types;
pub mod verify;
pub mod witness;

pub use bounds::{evaluate_bounds, BoundReport, Row};
pub use error::{BudgetError, ModelError, SpecError};
pub use types::{pid_label, values, Model, Pid, ProblemSpec, Validity, ValueId};

pub use algorithms::{instantiate, AlgorithmId, AlgorithmParams, QuorumPolicy};
pub use verify::{check_agreement, explore, ExplorationReport, ExploreConfig, Verdict};
