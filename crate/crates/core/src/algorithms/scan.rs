use smallvec::{smallvec, SmallVec};

use crate::types::{Pid, ValueId};

/// Phase-two view: the single cell `(q, 0)` of every process `q`, learned by
/// cyclic reads that skip cells already known.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scan {
    pub me: Pid,
    pub known: SmallVec<[Option<ValueId>; 8]>,
    pub cursor: Pid,
}

impl Scan {
    pub fn new(me: Pid, n: usize) -> Self {
        Scan {
            me,
            known: smallvec![None; n],
            cursor: me,
        }
    }

    pub fn count(&self) -> usize {
        self.known.iter().flatten().count()
    }

    pub fn values(&self) -> impl Iterator<Item = ValueId> + '_ {
        self.known.iter().flatten().copied()
    }

    /// Records the own published value and aims at the first unknown cell.
    pub fn publish(&mut self, value: ValueId) {
        self.known[self.me] = Some(value);
        self.advance();
    }

    pub fn observe(&mut self, value: Option<ValueId>) {
        if value.is_some() {
            self.known[self.cursor] = value;
        }
        self.advance();
    }

    /// Moves the cursor to the next unknown cell after it, wrapping around.
    fn advance(&mut self) {
        let n = self.known.len();
        for step in 1..=n {
            let q = (self.cursor + step) % n;
            if self.known[q].is_none() {
                self.cursor = q;
                return;
            }
        }
    }

    pub fn unknown(&self) -> Vec<Pid> {
        (0..self.known.len()).filter(|&q| self.known[q].is_none()).collect()
    }
}
