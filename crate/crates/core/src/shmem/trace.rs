use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::objects::ObjectRef;
use crate::shmem::system::EventKind;
use crate::types::{Pid, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Number of process steps taken before this event.
    pub step: usize,
    pub pid: Pid,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Complete log of one asynchronous run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub n: usize,
    pub inputs: Vec<ValueId>,
    pub events: Vec<TraceEvent>,
    pub decisions: Vec<Option<ValueId>>,
    pub crashed: Vec<Pid>,
    pub distinct_inputs: usize,
    /// Processes that decided through a fallback path.
    pub unsound: Vec<Pid>,
    /// Some correct process was still undecided when the step bound ran out.
    pub resiliency_violation: bool,
    pub steps: usize,
    /// Final assignment of the black-box oracle, when the behavior used one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_decisions: Option<Vec<Option<ValueId>>>,
}

pub(crate) fn distinct(values: &[ValueId]) -> usize {
    values.iter().collect::<BTreeSet<_>>().len()
}

impl ExecutionTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// One event per line.
    pub fn to_json_lines(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }

    /// Every write names its own writer's array, in gap-free index order.
    pub fn single_writer_holds(&self) -> bool {
        let mut next = vec![0usize; self.n];
        self.events.iter().all(|e| match e.kind {
            EventKind::Write { owner, index, .. } => {
                let ok = owner == e.pid && next[owner] == index;
                next[owner] += 1;
                ok
            }
            _ => true,
        })
    }

    /// Every consensus propose returned the value of the object's first
    /// propose.
    pub fn linearizable(&self) -> bool {
        let mut winners: Vec<(usize, ValueId)> = Vec::new();
        self.events.iter().all(|e| match e.kind {
            EventKind::Propose {
                object: ObjectRef::Consensus(i),
                value,
                returned,
            } => match winners.iter().find(|(o, _)| *o == i) {
                Some(&(_, w)) => returned == w,
                None => {
                    winners.push((i, value));
                    returned == value
                }
            },
            _ => true,
        })
    }

    /// No process has events after its crash.
    pub fn crash_silent(&self) -> bool {
        let mut dead = vec![false; self.n];
        self.events.iter().all(|e| {
            let ok = !dead[e.pid];
            if e.kind == EventKind::Crash {
                dead[e.pid] = true;
            }
            ok
        })
    }
}
