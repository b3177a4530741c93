//! Two-phase constructions that consume a black-box partial-agreement
//! oracle: propose to it, publish its answer, gather a quorum of published
//! answers and apply a decision rule.

use serde::{Deserialize, Serialize};

use crate::algorithms::scan::Scan;
use crate::objects::{ObjectRef, OracleSpec};
use crate::shmem::{Action, AsyncBehavior, Observation};
use crate::sync::{broadcast, SyncBehavior};
use crate::types::{Pid, Validity, ValueId};
use crate::witness::tally;

/// When phase two stops reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuorumPolicy {
    /// As soon as the quorum is met.
    #[default]
    Exact,
    /// After the quorum is met, read every still-unknown cell once more.
    Eager,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    /// The value held by more than half; otherwise the smaller of the most
    /// repeated, flagged unsound.
    StrictMajority,
    /// The largest among the most repeated.
    LargestMode,
}

impl DecisionRule {
    pub fn apply(self, m: usize, observed: impl IntoIterator<Item = ValueId>) -> (ValueId, bool) {
        let counts = tally(m, observed);
        let total: usize = counts.iter().sum();
        let top = counts.iter().copied().max().unwrap_or(0);
        let modes = (0..m).filter(|&v| counts[v] == top);
        match self {
            DecisionRule::StrictMajority => {
                let v = modes.min().unwrap_or(0);
                (ValueId(v as u32), 2 * counts[v] > total)
            }
            DecisionRule::LargestMode => (ValueId(modes.max().unwrap_or(0) as u32), true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoPhase {
    pub oracle: OracleSpec,
    pub quorum: usize,
    pub rule: DecisionRule,
    pub policy: QuorumPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwoPhaseState {
    input: ValueId,
    /// Answer of the oracle.
    decision_from_a: Option<ValueId>,
    written: bool,
    scan: Scan,
    sweep: Option<Vec<Pid>>,
}

impl TwoPhase {
    fn oracle_spec(n: usize, m: u32, k: usize, validity: Validity) -> OracleSpec {
        OracleSpec {
            n,
            m,
            k: k.min(n),
            ell: 1,
            validity,
        }
    }

    /// Full agreement from an `(n, ceil(n/2)+1)` oracle, one crash.
    pub fn binary(n: usize, policy: QuorumPolicy) -> Self {
        TwoPhase {
            oracle: Self::oracle_spec(n, 2, n.div_ceil(2) + 1, Validity::Weak),
            quorum: n - 1,
            rule: DecisionRule::StrictMajority,
            policy,
        }
    }

    /// `(m-1)`-set agreement from an `(n, floor(n/m) + n mod m + 1)` oracle
    /// with strong validity, `m-1` crashes.
    pub fn set_agreement(n: usize, m: u32, policy: QuorumPolicy) -> Self {
        let mu = m as usize;
        TwoPhase {
            oracle: Self::oracle_spec(n, m, n / mu + n % mu + 1, Validity::Strong),
            quorum: n - (mu - 1),
            rule: DecisionRule::LargestMode,
            policy,
        }
    }

    /// Full agreement from an `(n, ceil((n+t-1)/2)+1)` oracle, `t` crashes.
    pub fn shared_objects(n: usize, t: usize, policy: QuorumPolicy) -> Self {
        TwoPhase {
            oracle: Self::oracle_spec(n, 2, (n + t - 1).div_ceil(2) + 1, Validity::Weak),
            quorum: n - t,
            rule: DecisionRule::StrictMajority,
            policy,
        }
    }

    fn quorum_met(&self, s: &TwoPhaseState) -> bool {
        s.scan.count() >= self.quorum
    }

    fn settle(&self, s: &mut TwoPhaseState) {
        if self.policy == QuorumPolicy::Eager && s.sweep.is_none() && self.quorum_met(s) {
            let mut pending = s.scan.unknown();
            pending.reverse();
            s.sweep = Some(pending);
        }
    }
}

impl AsyncBehavior for TwoPhase {
    type State = TwoPhaseState;

    fn init(&self, pid: Pid, input: ValueId) -> TwoPhaseState {
        TwoPhaseState {
            input,
            decision_from_a: None,
            written: false,
            scan: Scan::new(pid, self.oracle.n),
            sweep: None,
        }
    }

    fn next_action(&self, s: &TwoPhaseState) -> Action {
        let Some(d) = s.decision_from_a else {
            return Action::Propose {
                object: ObjectRef::Oracle,
                value: s.input,
            };
        };
        if !s.written {
            return Action::Write {
                owner: s.scan.me,
                index: 0,
                value: d,
            };
        }
        if let Some(&owner) = s.sweep.as_ref().and_then(|p| p.last()) {
            return Action::Read { owner, index: 0 };
        }
        if self.quorum_met(s) {
            let (value, sound) = self.rule.apply(self.oracle.m as usize, s.scan.values());
            return Action::Decide { value, sound };
        }
        Action::Read {
            owner: s.scan.cursor,
            index: 0,
        }
    }

    fn may_access(&self, s: &TwoPhaseState, object: ObjectRef) -> bool {
        object == ObjectRef::Oracle && s.decision_from_a.is_none()
    }

    fn observe(&self, s: &mut TwoPhaseState, observation: Observation) {
        match observation {
            Observation::Returned(d) => s.decision_from_a = Some(d),
            Observation::Written => {
                s.written = true;
                s.scan.publish(s.decision_from_a.expect("phase one done"));
            }
            Observation::Read(v) => match s.sweep.as_mut() {
                Some(pending) => {
                    let owner = pending.pop().expect("sweep read");
                    if v.is_some() {
                        s.scan.known[owner] = v;
                    }
                }
                None => s.scan.observe(v),
            },
        }
        self.settle(s);
    }

    fn oracle_spec(&self) -> Option<OracleSpec> {
        Some(self.oracle)
    }
}

/// Phase one through the oracle, then one broadcast round of its answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncReduction {
    pub oracle: OracleSpec,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyncReductionState {
    input: ValueId,
    decision_from_a: Option<ValueId>,
    observed: Vec<ValueId>,
    done: bool,
}

impl SyncReduction {
    /// Full agreement from an `(n, ceil((n+t+1)/2))` oracle.
    pub fn new(n: usize, t: usize) -> Self {
        SyncReduction {
            oracle: OracleSpec {
                n,
                m: 2,
                k: (n + t + 1).div_ceil(2).min(n),
                ell: 1,
                validity: Validity::Weak,
            },
            t,
        }
    }
}

impl SyncBehavior for SyncReduction {
    type State = SyncReductionState;

    fn init(&self, _pid: Pid, input: ValueId) -> SyncReductionState {
        SyncReductionState {
            input,
            decision_from_a: None,
            observed: Vec::new(),
            done: false,
        }
    }

    fn oracle_spec(&self) -> Option<OracleSpec> {
        Some(self.oracle)
    }

    fn oracle_proposal(&self, s: &SyncReductionState) -> Option<ValueId> {
        Some(s.input)
    }

    fn oracle_returned(&self, s: &mut SyncReductionState, decision: ValueId) {
        s.decision_from_a = Some(decision);
    }

    fn send(&self, s: &SyncReductionState, _round: u32) -> Vec<(Pid, ValueId)> {
        match (s.done, s.decision_from_a) {
            (false, Some(d)) => broadcast(self.oracle.n, d),
            _ => Vec::new(),
        }
    }

    fn receive(&self, s: &mut SyncReductionState, _round: u32, inbox: &[(Pid, ValueId)]) {
        if !s.done {
            s.observed = inbox.iter().map(|&(_, v)| v).collect();
            s.done = true;
        }
    }

    fn decision(&self, s: &SyncReductionState, _round: u32) -> Option<(ValueId, bool)> {
        if !s.done {
            return None;
        }
        let (v, majority) = DecisionRule::StrictMajority.apply(2, s.observed.iter().copied());
        Some((v, majority && s.observed.len() + self.t >= self.oracle.n))
    }

    fn preference(&self, s: &SyncReductionState) -> Option<ValueId> {
        s.decision_from_a
    }
}
