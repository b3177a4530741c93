use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::ModelError;
use crate::types::{Pid, ValueId};

/// Wait-free consensus object for `capacity` processes with first-value-wins
/// linearization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConsensusObject {
    pub id: usize,
    pub capacity: usize,
    pub winner: Option<ValueId>,
    /// Sorted.
    pub proposers: SmallVec<[Pid; 8]>,
}

impl ConsensusObject {
    pub fn new(id: usize, capacity: usize) -> Self {
        ConsensusObject {
            id,
            capacity,
            winner: None,
            proposers: SmallVec::new(),
        }
    }

    pub fn propose(&mut self, pid: Pid, value: ValueId) -> Result<ValueId, ModelError> {
        if self.proposers.contains(&pid) {
            return Err(ModelError::DoublePropose {
                object: format!("consensus object {}", self.id),
                pid,
            });
        }
        if self.proposers.len() >= self.capacity {
            return Err(ModelError::CapacityExceeded {
                object: self.id,
                capacity: self.capacity,
                pid,
            });
        }
        let at = self.proposers.binary_search(&pid).unwrap_or_else(|i| i);
        self.proposers.insert(at, pid);
        Ok(*self.winner.get_or_insert(value))
    }

    /// A propose on a decided object returns the winner whatever the order, so
    /// it commutes with every other access.
    pub fn is_decided(&self) -> bool {
        self.winner.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_value_wins() {
        let mut obj = ConsensusObject::new(0, 3);
        assert_eq!(obj.propose(0, ValueId(2)), Ok(ValueId(2)));
        assert_eq!(obj.propose(1, ValueId(0)), Ok(ValueId(2)));
    }

    #[test]
    fn capacity_and_double_propose() {
        let mut obj = ConsensusObject::new(0, 2);
        obj.propose(0, ValueId(1)).unwrap();
        assert!(matches!(
            obj.propose(0, ValueId(1)),
            Err(ModelError::DoublePropose { .. })
        ));
        obj.propose(1, ValueId(0)).unwrap();
        assert!(matches!(
            obj.propose(2, ValueId(0)),
            Err(ModelError::CapacityExceeded { capacity: 2, .. })
        ));
    }
}
