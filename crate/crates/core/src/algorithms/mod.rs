//! The algorithm catalog: constructive algorithms and oracle-backed
//! reductions, selectable by stable string identifiers.

mod max_wait;
mod min_flood;
mod no_comm;
mod reductions;
mod scan;
mod smg;

pub use max_wait::{MaxWait, MaxWaitState};
pub use min_flood::{MinFlood, MinFloodState};
pub use no_comm::NoComm;
pub use reductions::{DecisionRule, QuorumPolicy, SyncReduction, SyncReductionState, TwoPhase, TwoPhaseState};
pub use smg::{Role, SmgComposition, SmgState};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::composition_guarantee;
use crate::error::SpecError;
use crate::objects::{ObjectRef, OracleSpec};
use crate::shmem::{Action, AsyncBehavior, Observation};
use crate::sync::SyncBehavior;
use crate::types::{ceil_div, Model, Pid, ProblemSpec, Validity, ValueId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    NoComm,
    MaxWait,
    MinFlood,
    SmgComp,
    ReduceBinary,
    ReduceSet,
    ReduceSync,
    ReduceSmg,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 8] = [
        AlgorithmId::NoComm,
        AlgorithmId::MaxWait,
        AlgorithmId::MinFlood,
        AlgorithmId::SmgComp,
        AlgorithmId::ReduceBinary,
        AlgorithmId::ReduceSet,
        AlgorithmId::ReduceSync,
        AlgorithmId::ReduceSmg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::NoComm => "no-comm",
            AlgorithmId::MaxWait => "max-wait",
            AlgorithmId::MinFlood => "min-flood",
            AlgorithmId::SmgComp => "smg-comp",
            AlgorithmId::ReduceBinary => "reduce-binary",
            AlgorithmId::ReduceSet => "reduce-set",
            AlgorithmId::ReduceSync => "reduce-sync",
            AlgorithmId::ReduceSmg => "reduce-smg",
        }
    }

    pub fn parse(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == id)
    }

    /// Oracle-backed constructions: their guarantee is conditional on the
    /// oracle meeting its contract.
    pub fn is_reduction(self) -> bool {
        matches!(
            self,
            AlgorithmId::ReduceBinary | AlgorithmId::ReduceSet | AlgorithmId::ReduceSync | AlgorithmId::ReduceSmg
        )
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        AlgorithmId::parse(s).ok_or_else(|| SpecError::Unsupported(format!("unknown algorithm id {s:?}")))
    }
}

/// Tuning knobs; unset fields take each algorithm's default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AlgorithmParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(default)]
    pub quorum: QuorumPolicy,
}

#[derive(Debug, Clone, Copy)]
pub enum AsyncAlgorithm {
    NoComm(NoComm),
    MaxWait(MaxWait),
    Smg(SmgComposition),
    TwoPhase(TwoPhase),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AsyncState {
    NoComm(ValueId),
    MaxWait(MaxWaitState),
    Smg(SmgState),
    TwoPhase(TwoPhaseState),
}

macro_rules! dispatch_async {
    ($self:expr, $state:expr, $b:ident, $s:ident => $body:expr) => {
        match ($self, $state) {
            (AsyncAlgorithm::NoComm($b), AsyncState::NoComm($s)) => $body,
            (AsyncAlgorithm::MaxWait($b), AsyncState::MaxWait($s)) => $body,
            (AsyncAlgorithm::Smg($b), AsyncState::Smg($s)) => $body,
            (AsyncAlgorithm::TwoPhase($b), AsyncState::TwoPhase($s)) => $body,
            _ => unreachable!("state of another algorithm"),
        }
    };
}

impl AsyncBehavior for AsyncAlgorithm {
    type State = AsyncState;

    fn init(&self, pid: Pid, input: ValueId) -> AsyncState {
        match self {
            AsyncAlgorithm::NoComm(b) => AsyncState::NoComm(b.init(pid, input)),
            AsyncAlgorithm::MaxWait(b) => AsyncState::MaxWait(b.init(pid, input)),
            AsyncAlgorithm::Smg(b) => AsyncState::Smg(b.init(pid, input)),
            AsyncAlgorithm::TwoPhase(b) => AsyncState::TwoPhase(b.init(pid, input)),
        }
    }

    fn next_action(&self, state: &AsyncState) -> Action {
        dispatch_async!(self, state, b, s => b.next_action(s))
    }

    fn observe(&self, state: &mut AsyncState, observation: Observation) {
        dispatch_async!(self, state, b, s => b.observe(s, observation))
    }

    fn may_access(&self, state: &AsyncState, object: ObjectRef) -> bool {
        dispatch_async!(self, state, b, s => b.may_access(s, object))
    }

    fn consensus_capacities(&self) -> Vec<usize> {
        match self {
            AsyncAlgorithm::Smg(b) => b.consensus_capacities(),
            _ => Vec::new(),
        }
    }

    fn oracle_spec(&self) -> Option<OracleSpec> {
        match self {
            AsyncAlgorithm::TwoPhase(b) => AsyncBehavior::oracle_spec(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum SyncAlgorithm {
    MinFlood(MinFlood),
    Reduction(SyncReduction),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SyncAlgState {
    MinFlood(MinFloodState),
    Reduction(SyncReductionState),
}

macro_rules! dispatch_sync {
    ($self:expr, $state:expr, $b:ident, $s:ident => $body:expr) => {
        match ($self, $state) {
            (SyncAlgorithm::MinFlood($b), SyncAlgState::MinFlood($s)) => $body,
            (SyncAlgorithm::Reduction($b), SyncAlgState::Reduction($s)) => $body,
            _ => unreachable!("state of another algorithm"),
        }
    };
}

impl SyncBehavior for SyncAlgorithm {
    type State = SyncAlgState;

    fn init(&self, pid: Pid, input: ValueId) -> SyncAlgState {
        match self {
            SyncAlgorithm::MinFlood(b) => SyncAlgState::MinFlood(b.init(pid, input)),
            SyncAlgorithm::Reduction(b) => SyncAlgState::Reduction(b.init(pid, input)),
        }
    }

    fn oracle_spec(&self) -> Option<OracleSpec> {
        match self {
            SyncAlgorithm::MinFlood(_) => None,
            SyncAlgorithm::Reduction(b) => SyncBehavior::oracle_spec(b),
        }
    }

    fn oracle_proposal(&self, state: &SyncAlgState) -> Option<ValueId> {
        dispatch_sync!(self, state, b, s => b.oracle_proposal(s))
    }

    fn oracle_returned(&self, state: &mut SyncAlgState, decision: ValueId) {
        dispatch_sync!(self, state, b, s => b.oracle_returned(s, decision))
    }

    fn send(&self, state: &SyncAlgState, round: u32) -> Vec<(Pid, ValueId)> {
        dispatch_sync!(self, state, b, s => b.send(s, round))
    }

    fn receive(&self, state: &mut SyncAlgState, round: u32, inbox: &[(Pid, ValueId)]) {
        dispatch_sync!(self, state, b, s => b.receive(s, round, inbox))
    }

    fn decision(&self, state: &SyncAlgState, round: u32) -> Option<(ValueId, bool)> {
        dispatch_sync!(self, state, b, s => b.decision(s, round))
    }

    fn preference(&self, state: &SyncAlgState) -> Option<ValueId> {
        dispatch_sync!(self, state, b, s => b.preference(s))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Executable {
    Async(AsyncAlgorithm),
    Sync { behavior: SyncAlgorithm, rounds: u32 },
}

/// A catalog algorithm instantiated for one problem size.
#[derive(Debug, Clone, Copy)]
pub struct Instance {
    pub id: AlgorithmId,
    pub executable: Executable,
    /// Crashes the adversary may inject.
    pub crash_budget: usize,
    /// The task the algorithm claims to solve.
    pub claimed: ProblemSpec,
}

impl Instance {
    pub fn oracle(&self) -> Option<OracleSpec> {
        match self.executable {
            Executable::Async(b) => AsyncBehavior::oracle_spec(&b),
            Executable::Sync { behavior, .. } => SyncBehavior::oracle_spec(&behavior),
        }
    }
}

fn unsupported(id: AlgorithmId, why: impl fmt::Display) -> SpecError {
    SpecError::Unsupported(format!("{id}: {why}"))
}

/// Builds `id` for `spec`. The claimed task shares `n`, `m` and the model
/// with `spec`; its `k`, `ell` and validity are the algorithm's guarantee.
pub fn instantiate(id: AlgorithmId, spec: &ProblemSpec, params: &AlgorithmParams) -> Result<Instance, SpecError> {
    spec.validate()?;
    let n = spec.n;
    let m = spec.m;
    let t = spec.t;
    let base = ProblemSpec::new(n, m, t, n).with_model(spec.model);
    let binary_only = || {
        if m == 2 {
            Ok(())
        } else {
            Err(unsupported(id, "needs m = 2"))
        }
    };
    let within = |budget: usize| {
        if t <= budget {
            Ok(())
        } else {
            Err(unsupported(id, format!("fault budget is {budget}, got t = {t}")))
        }
    };
    let (executable, crash_budget, claimed) = match id {
        AlgorithmId::NoComm => (
            Executable::Async(AsyncAlgorithm::NoComm(NoComm)),
            t,
            base.with_k(ceil_div(n, m as usize)),
        ),
        AlgorithmId::MaxWait => {
            let q = params.q.unwrap_or(n.saturating_sub(t).max(1));
            if q == 0 || q > n || q + t < n {
                return Err(unsupported(id, format!("q = {q} outside n - t ..= n")));
            }
            (
                Executable::Async(AsyncAlgorithm::MaxWait(MaxWait::new(n, q))),
                t,
                base.with_k(ceil_div(n, n - q + 1)),
            )
        }
        AlgorithmId::MinFlood => {
            let rounds = params.rounds.unwrap_or(t as u32 / spec.ell + 1);
            if rounds == 0 {
                return Err(unsupported(id, "rounds must be at least 1"));
            }
            (
                Executable::Sync {
                    behavior: SyncAlgorithm::MinFlood(MinFlood::new(n, rounds)),
                    rounds,
                },
                t,
                base.with_ell(spec.ell),
            )
        }
        AlgorithmId::SmgComp => {
            let g = match (params.g, spec.model) {
                (Some(g), _) | (None, Model::SmG { g }) => g,
                _ => return Err(unsupported(id, "needs g (sm-g model or explicit g)")),
            };
            if g == 0 || g > n {
                return Err(SpecError::ObjectSizeOutOfRange { g, n });
            }
            (
                Executable::Async(AsyncAlgorithm::Smg(SmgComposition::new(n, g))),
                n,
                base.with_k(composition_guarantee(n, g)).with_model(Model::SmG { g }),
            )
        }
        AlgorithmId::ReduceBinary => {
            binary_only()?;
            within(1)?;
            (
                Executable::Async(AsyncAlgorithm::TwoPhase(TwoPhase::binary(n, params.quorum))),
                t,
                base,
            )
        }
        AlgorithmId::ReduceSet => {
            within(m as usize - 1)?;
            if m as usize > n {
                return Err(unsupported(id, "needs m <= n"));
            }
            (
                Executable::Async(AsyncAlgorithm::TwoPhase(TwoPhase::set_agreement(n, m, params.quorum))),
                t,
                base.with_ell(m - 1).with_validity(Validity::Strong),
            )
        }
        AlgorithmId::ReduceSync => {
            binary_only()?;
            within(n - 1)?;
            (
                Executable::Sync {
                    behavior: SyncAlgorithm::Reduction(SyncReduction::new(n, t)),
                    rounds: 1,
                },
                t,
                base,
            )
        }
        AlgorithmId::ReduceSmg => {
            binary_only()?;
            within(n - 1)?;
            (
                Executable::Async(AsyncAlgorithm::TwoPhase(TwoPhase::shared_objects(n, t, params.quorum))),
                t,
                base,
            )
        }
    };
    Ok(Instance {
        id,
        executable,
        crash_budget,
        claimed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(AlgorithmId::parse(id.as_str()), Some(id));
        }
        assert!("paxos".parse::<AlgorithmId>().is_err());
    }

    #[test]
    fn claimed_thresholds() {
        let claimed = |id, spec: ProblemSpec, params: AlgorithmParams| instantiate(id, &spec, &params).unwrap().claimed;
        let p = AlgorithmParams::default();
        assert_eq!(claimed(AlgorithmId::NoComm, ProblemSpec::new(6, 3, 3, 1), p).k, 2);
        assert_eq!(claimed(AlgorithmId::MaxWait, ProblemSpec::new(4, 4, 1, 1), p).k, 2);
        assert_eq!(claimed(AlgorithmId::MaxWait, ProblemSpec::new(4, 4, 3, 1), p).k, 1);
        let smg = ProblemSpec::new(8, 2, 4, 1).with_model(Model::SmG { g: 4 });
        assert_eq!(claimed(AlgorithmId::SmgComp, smg, p).k, 6);
        let set = claimed(AlgorithmId::ReduceSet, ProblemSpec::new(6, 3, 2, 1), p);
        assert_eq!((set.k, set.ell, set.validity), (6, 2, Validity::Strong));
        assert!(instantiate(AlgorithmId::ReduceBinary, &ProblemSpec::new(4, 2, 2, 1), &p).is_err());
        assert!(instantiate(AlgorithmId::ReduceBinary, &ProblemSpec::new(4, 3, 1, 1), &p).is_err());
    }
}
