//! Shared objects that live inside a single run: wait-free consensus objects
//! and partial-agreement oracles.

mod consensus;
mod oracle;

use serde::{Deserialize, Serialize};

pub use consensus::ConsensusObject;
pub use oracle::{
    compliant_assignments, is_compliant, OracleSpec, OracleStrategy, PartialAgreementOracle,
};

use crate::error::ModelError;
use crate::types::{Pid, ValueId};

/// Names a shared object from inside a behavior's action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "kebab-case")]
pub enum ObjectRef {
    Consensus(usize),
    Oracle,
}

impl std::fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectRef::Consensus(i) => write!(f, "consensus[{i}]"),
            ObjectRef::Oracle => f.write_str("oracle"),
        }
    }
}

/// Every object available to one run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SharedObjects {
    pub consensus: Vec<ConsensusObject>,
    pub oracle: Option<PartialAgreementOracle>,
}

impl SharedObjects {
    pub fn new(capacities: &[usize], oracle: Option<PartialAgreementOracle>) -> Self {
        SharedObjects {
            consensus: capacities
                .iter()
                .enumerate()
                .map(|(i, &c)| ConsensusObject::new(i, c))
                .collect(),
            oracle,
        }
    }

    pub fn consensus_propose(&mut self, object: usize, pid: Pid, value: ValueId) -> Result<ValueId, ModelError> {
        self.consensus
            .get_mut(object)
            .ok_or_else(|| ModelError::UnknownObject(ObjectRef::Consensus(object).to_string()))?
            .propose(pid, value)
    }

    pub fn oracle_mut(&mut self) -> Result<&mut PartialAgreementOracle, ModelError> {
        self.oracle
            .as_mut()
            .ok_or_else(|| ModelError::UnknownObject(ObjectRef::Oracle.to_string()))
    }

    /// A propose on `object` whose outcome cannot depend on ordering.
    pub fn is_order_independent(&self, object: ObjectRef) -> bool {
        match object {
            ObjectRef::Consensus(i) => self.consensus.get(i).is_some_and(ConsensusObject::is_decided),
            ObjectRef::Oracle => false,
        }
    }
}
