//! Lockstep round-based message passing with crash-during-round partial
//! sends.

mod pattern;
mod system;

pub use pattern::{crash_pattern_count, enumerate_crash_patterns, CrashPattern, CrashPoint};
pub use system::{broadcast, Message, RoundRecord, SyncBehavior, SyncState, SyncSystem};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::objects::OracleStrategy;
use crate::shmem::distinct;
use crate::types::{Pid, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub n: usize,
    pub inputs: Vec<ValueId>,
    /// Phase-one oracle answers in access order, as `(pid, answer)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_accesses: Vec<(Pid, ValueId)>,
    pub rounds: Vec<RoundRecord>,
    pub decisions: Vec<Option<ValueId>>,
    pub decide_round: Vec<Option<u32>>,
    pub crash_round: Vec<Option<u32>>,
    pub crashed: Vec<Pid>,
    pub distinct_inputs: usize,
    pub unsound: Vec<Pid>,
    /// A correct process had not decided after the last round.
    pub resiliency_violation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_decisions: Option<Vec<Option<ValueId>>>,
}

impl RoundTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// One delivered message per line, with its round.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            for m in &r.delivered {
                let line = serde_json::json!({
                    "round": r.round,
                    "src": m.src,
                    "dst": m.dst,
                    "payload": m.value,
                });
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
        out
    }
}

pub(crate) fn victims_of(pattern: &CrashPattern, round: u32) -> BTreeMap<Pid, BTreeSet<Pid>> {
    pattern.crashing_in(round).map(|(p, r)| (p, r.clone())).collect()
}

pub(crate) fn finish<S>(
    system_inputs: &[ValueId],
    state: &SyncState<S>,
    oracle_accesses: Vec<(Pid, ValueId)>,
    rounds: Vec<RoundRecord>,
) -> RoundTrace {
    let n = system_inputs.len();
    RoundTrace {
        n,
        inputs: system_inputs.to_vec(),
        oracle_accesses,
        rounds,
        decisions: state.decided_values(),
        decide_round: state.decide_round.clone(),
        crash_round: state.crash_round.clone(),
        crashed: (0..n).filter(|&p| state.locals[p].is_none()).collect(),
        distinct_inputs: distinct(system_inputs),
        unsound: state.unsound(),
        resiliency_violation: state.live().any(|p| state.decisions[p].is_none()),
        oracle_decisions: state.oracle.as_ref().map(|o| o.decisions().to_vec()),
    }
}

/// Executes exactly `rounds` rounds under `pattern`.
pub fn run_sync<B: SyncBehavior>(
    behavior: &B,
    inputs: &[ValueId],
    pattern: &CrashPattern,
    rounds: u32,
    t: usize,
    oracle: &OracleStrategy,
) -> Result<RoundTrace, ModelError> {
    if rounds == 0 {
        return Err(ModelError::Config("at least one round is required".into()));
    }
    pattern.validate(inputs.len(), t, rounds)?;
    let system = SyncSystem::new(behavior, inputs.to_vec(), rounds, t);
    let mut state = system.initial(oracle);
    let mut accesses = Vec::new();
    while let Some((pid, value)) = system.pending_oracle(&state) {
        let r = system.oracle_step(&mut state, pid, value, None)?;
        accesses.push((pid, r));
    }
    let mut records = Vec::with_capacity(rounds as usize);
    for round in 1..=rounds {
        records.push(system.round(&mut state, round, &victims_of(pattern, round))?);
    }
    Ok(finish(inputs, &state, accesses, records))
}
