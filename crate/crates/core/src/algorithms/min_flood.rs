use crate::sync::{broadcast, SyncBehavior};
use crate::types::{Pid, ValueId};

/// Flood the smallest value seen; decide it after the last round.
#[derive(Debug, Clone, Copy)]
pub struct MinFlood {
    pub n: usize,
    pub rounds: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinFloodState {
    preferred: ValueId,
    round: u32,
}

impl MinFlood {
    pub fn new(n: usize, rounds: u32) -> Self {
        MinFlood { n, rounds }
    }
}

impl SyncBehavior for MinFlood {
    type State = MinFloodState;

    fn init(&self, _pid: Pid, input: ValueId) -> MinFloodState {
        MinFloodState {
            preferred: input,
            round: 0,
        }
    }

    fn send(&self, s: &MinFloodState, _round: u32) -> Vec<(Pid, ValueId)> {
        if s.round >= self.rounds {
            return Vec::new();
        }
        broadcast(self.n, s.preferred)
    }

    fn receive(&self, s: &mut MinFloodState, round: u32, inbox: &[(Pid, ValueId)]) {
        if let Some(min) = inbox.iter().map(|&(_, v)| v).min() {
            s.preferred = s.preferred.min(min);
        }
        s.round = round;
    }

    fn decision(&self, s: &MinFloodState, round: u32) -> Option<(ValueId, bool)> {
        (round == self.rounds).then_some((s.preferred, true))
    }

    fn preference(&self, s: &MinFloodState) -> Option<ValueId> {
        Some(s.preferred)
    }
}
