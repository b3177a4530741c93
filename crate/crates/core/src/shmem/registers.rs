use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::ModelError;
use crate::types::{Pid, ValueId};

/// Unbounded arrays of single-writer registers, one array per process.
///
/// Each owner fills its array in index order without gaps and writes every
/// cell at most once, so cell `(owner, i)` is present iff `i < len(owner)`
/// and never changes once present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterSpace {
    cells: Vec<SmallVec<[ValueId; 2]>>,
}

impl RegisterSpace {
    pub fn new(n: usize) -> Self {
        RegisterSpace {
            cells: vec![SmallVec::new(); n],
        }
    }

    pub fn write(&mut self, writer: Pid, owner: Pid, index: usize, value: ValueId) -> Result<(), ModelError> {
        if owner >= self.cells.len() {
            return Err(ModelError::UnknownProcess {
                pid: owner,
                n: self.cells.len(),
            });
        }
        if writer != owner {
            return Err(ModelError::ForeignWrite { writer, owner, index });
        }
        let next = self.cells[owner].len();
        if index != next {
            return Err(ModelError::OutOfOrderWrite {
                owner,
                index,
                expected: next,
            });
        }
        self.cells[owner].push(value);
        Ok(())
    }

    pub fn read(&self, owner: Pid, index: usize) -> Option<ValueId> {
        self.cells.get(owner).and_then(|c| c.get(index)).copied()
    }

    /// Number of cells `owner` has written.
    pub fn len(&self, owner: Pid) -> usize {
        self.cells.get(owner).map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(|c| c.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_unused_discipline() {
        let mut r = RegisterSpace::new(2);
        assert_eq!(r.read(0, 0), None);
        r.write(0, 0, 0, ValueId(3)).unwrap();
        assert_eq!(r.read(0, 0), Some(ValueId(3)));
        assert!(matches!(
            r.write(0, 0, 2, ValueId(1)),
            Err(ModelError::OutOfOrderWrite { expected: 1, .. })
        ));
        assert!(matches!(
            r.write(0, 0, 0, ValueId(1)),
            Err(ModelError::OutOfOrderWrite { .. })
        ));
        assert!(matches!(
            r.write(1, 0, 1, ValueId(1)),
            Err(ModelError::ForeignWrite { .. })
        ));
        r.write(0, 0, 1, ValueId(1)).unwrap();
        assert_eq!(r.len(0), 2);
    }
}
