use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::objects::{OracleSpec, OracleStrategy, PartialAgreementOracle};
use crate::types::{Pid, ValueId};

/// A deterministic per-process program for the lockstep executor.
pub trait SyncBehavior: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    fn init(&self, pid: Pid, input: ValueId) -> Self::State;

    /// Contract of an oracle every process consults once before round 1.
    fn oracle_spec(&self) -> Option<OracleSpec> {
        None
    }

    /// Value proposed to the oracle.
    fn oracle_proposal(&self, _state: &Self::State) -> Option<ValueId> {
        None
    }

    fn oracle_returned(&self, _state: &mut Self::State, _decision: ValueId) {}

    /// Messages `(dst, payload)` sent in `round`.
    fn send(&self, state: &Self::State, round: u32) -> Vec<(Pid, ValueId)>;

    /// Consumes the round's inbox of `(src, payload)`, sorted by source.
    fn receive(&self, state: &mut Self::State, round: u32, inbox: &[(Pid, ValueId)]);

    /// Decision after the receive phase of `round`, if any.
    fn decision(&self, state: &Self::State, round: u32) -> Option<(ValueId, bool)>;

    /// Current preferred value, for snapshots.
    fn preference(&self, _state: &Self::State) -> Option<ValueId> {
        None
    }
}

/// Convenience: the same payload to every process, self included.
pub fn broadcast(n: usize, value: ValueId) -> Vec<(Pid, ValueId)> {
    (0..n).map(|dst| (dst, value)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Message {
    pub src: Pid,
    pub dst: Pid,
    pub value: ValueId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub sent: Vec<Message>,
    pub delivered: Vec<Message>,
    pub crashed: Vec<Pid>,
    /// Preferences after the round; `None` for crashed processes.
    pub preferences: Vec<Option<ValueId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyncState<S> {
    /// `None` once crashed.
    pub locals: Vec<Option<S>>,
    pub decisions: Vec<Option<(ValueId, bool)>>,
    pub decide_round: Vec<Option<u32>>,
    pub crash_round: Vec<Option<u32>>,
    pub oracle: Option<PartialAgreementOracle>,
    pub crashes: usize,
}

impl<S> SyncState<S> {
    pub fn live(&self) -> impl Iterator<Item = Pid> + '_ {
        self.locals.iter().enumerate().filter(|(_, l)| l.is_some()).map(|(p, _)| p)
    }

    pub fn decided_values(&self) -> Vec<Option<ValueId>> {
        self.decisions.iter().map(|d| d.map(|(v, _)| v)).collect()
    }

    pub fn crashed(&self) -> Vec<bool> {
        self.locals.iter().map(Option::is_none).collect()
    }

    pub fn unsound(&self) -> Vec<Pid> {
        (0..self.decisions.len())
            .filter(|&p| matches!(self.decisions[p], Some((_, false))))
            .collect()
    }
}

pub struct SyncSystem<'b, B: SyncBehavior> {
    pub behavior: &'b B,
    pub inputs: Vec<ValueId>,
    pub rounds: u32,
    pub crash_budget: usize,
}

impl<'b, B: SyncBehavior> SyncSystem<'b, B> {
    pub fn new(behavior: &'b B, inputs: Vec<ValueId>, rounds: u32, crash_budget: usize) -> Self {
        SyncSystem {
            behavior,
            inputs,
            rounds,
            crash_budget,
        }
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn initial(&self, strategy: &OracleStrategy) -> SyncState<B::State> {
        let n = self.n();
        SyncState {
            locals: self
                .inputs
                .iter()
                .enumerate()
                .map(|(p, &v)| Some(self.behavior.init(p, v)))
                .collect(),
            decisions: vec![None; n],
            decide_round: vec![None; n],
            crash_round: vec![None; n],
            oracle: self
                .behavior
                .oracle_spec()
                .map(|spec| PartialAgreementOracle::new(spec, strategy.clone()).with_known_proposals(&self.inputs)),
            crashes: 0,
        }
    }

    /// Next process still owing its oracle access, with its proposal.
    pub fn pending_oracle(&self, state: &SyncState<B::State>) -> Option<(Pid, ValueId)> {
        let oracle = state.oracle.as_ref()?;
        (0..self.n()).find_map(|p| {
            if oracle.proposals()[p].is_some() {
                return None;
            }
            let local = state.locals[p].as_ref()?;
            self.behavior.oracle_proposal(local).map(|v| (p, v))
        })
    }

    /// Performs the pending access with `response`, or with the oracle's own
    /// strategy when `None`.
    pub fn oracle_step(
        &self,
        state: &mut SyncState<B::State>,
        pid: Pid,
        value: ValueId,
        response: Option<ValueId>,
    ) -> Result<ValueId, ModelError> {
        let oracle = state
            .oracle
            .as_mut()
            .ok_or_else(|| ModelError::UnknownObject("oracle".into()))?;
        let r = match response {
            Some(r) => oracle.commit(pid, value, r)?,
            None => oracle.propose(pid, value)?,
        };
        if let Some(local) = state.locals[pid].as_mut() {
            self.behavior.oracle_returned(local, r);
        }
        Ok(r)
    }

    /// Runs one lockstep round. `victims` maps each process crashing in this
    /// round to the recipients of its last messages.
    pub fn round(
        &self,
        state: &mut SyncState<B::State>,
        round: u32,
        victims: &BTreeMap<Pid, BTreeSet<Pid>>,
    ) -> Result<RoundRecord, ModelError> {
        let n = self.n();
        let mut sent = Vec::new();
        let mut delivered = Vec::new();
        let mut inboxes: Vec<Vec<(Pid, ValueId)>> = vec![Vec::new(); n];
        for src in 0..n {
            let Some(local) = state.locals[src].as_ref() else {
                continue;
            };
            let out = self.behavior.send(local, round);
            if state.decisions[src].is_some() && !out.is_empty() {
                return Err(ModelError::SendAfterDecide { pid: src });
            }
            for (dst, value) in out {
                if dst >= n {
                    return Err(ModelError::UnknownProcess { pid: dst, n });
                }
                let msg = Message { src, dst, value };
                sent.push(msg);
                let reaches = victims.get(&src).is_none_or(|r| r.contains(&dst));
                if reaches {
                    delivered.push(msg);
                    inboxes[dst].push((src, value));
                }
            }
        }
        let mut crashed = Vec::new();
        for &pid in victims.keys() {
            if state.locals[pid].take().is_some() {
                state.crashes += 1;
                state.crash_round[pid] = Some(round);
                crashed.push(pid);
            }
        }
        if state.crashes > self.crash_budget {
            return Err(ModelError::CrashBudget {
                crashes: state.crashes,
                t: self.crash_budget,
            });
        }
        for (pid, inbox) in inboxes.iter().enumerate() {
            let Some(local) = state.locals[pid].as_mut() else {
                continue;
            };
            self.behavior.receive(local, round, inbox);
            if state.decisions[pid].is_none() {
                if let Some(d) = self.behavior.decision(local, round) {
                    state.decisions[pid] = Some(d);
                    state.decide_round[pid] = Some(round);
                }
            }
        }
        let preferences = state
            .locals
            .iter()
            .map(|l| l.as_ref().and_then(|s| self.behavior.preference(s)))
            .collect();
        Ok(RoundRecord {
            round,
            sent,
            delivered,
            crashed,
            preferences,
        })
    }
}
