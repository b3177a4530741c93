use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::shmem::{ExecutionTrace, GlobalState, Slot};
use crate::sync::{RoundTrace, SyncState};
use crate::types::{Pid, ProblemSpec, Validity, ValueId};
use crate::witness::{best_witness, mask, tally};

/// What the checkers need from a finished run.
pub trait Outcome {
    fn inputs(&self) -> &[ValueId];
    fn decisions(&self) -> Vec<Option<ValueId>>;
    fn crashed(&self) -> Vec<Pid>;
    /// Processes that decided through a fallback path.
    fn unsound(&self) -> Vec<Pid>;
    /// A correct process never decided.
    fn resiliency_violation(&self) -> bool;
}

impl Outcome for ExecutionTrace {
    fn inputs(&self) -> &[ValueId] {
        &self.inputs
    }
    fn decisions(&self) -> Vec<Option<ValueId>> {
        self.decisions.clone()
    }
    fn crashed(&self) -> Vec<Pid> {
        self.crashed.clone()
    }
    fn unsound(&self) -> Vec<Pid> {
        self.unsound.clone()
    }
    fn resiliency_violation(&self) -> bool {
        self.resiliency_violation
    }
}

impl Outcome for RoundTrace {
    fn inputs(&self) -> &[ValueId] {
        &self.inputs
    }
    fn decisions(&self) -> Vec<Option<ValueId>> {
        self.decisions.clone()
    }
    fn crashed(&self) -> Vec<Pid> {
        self.crashed.clone()
    }
    fn unsound(&self) -> Vec<Pid> {
        self.unsound.clone()
    }
    fn resiliency_violation(&self) -> bool {
        self.resiliency_violation
    }
}

/// A bare final configuration, as seen by the explorers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub inputs: Vec<ValueId>,
    pub decisions: Vec<Option<ValueId>>,
    pub crashed: Vec<Pid>,
    pub unsound: Vec<Pid>,
    pub stuck: bool,
}

impl Snapshot {
    pub fn of_async<S>(inputs: &[ValueId], state: &GlobalState<S>, stuck: bool) -> Self {
        Snapshot {
            inputs: inputs.to_vec(),
            decisions: state.decisions(),
            crashed: (0..inputs.len())
                .filter(|&p| matches!(state.slots[p], Slot::Crashed))
                .collect(),
            unsound: state.unsound(),
            stuck,
        }
    }

    pub fn of_sync<S>(inputs: &[ValueId], state: &SyncState<S>) -> Self {
        Snapshot {
            inputs: inputs.to_vec(),
            decisions: state.decided_values(),
            crashed: (0..inputs.len()).filter(|&p| state.locals[p].is_none()).collect(),
            unsound: state.unsound(),
            stuck: state.live().any(|p| state.decisions[p].is_none()),
        }
    }
}

impl Outcome for Snapshot {
    fn inputs(&self) -> &[ValueId] {
        &self.inputs
    }
    fn decisions(&self) -> Vec<Option<ValueId>> {
        self.decisions.clone()
    }
    fn crashed(&self) -> Vec<Pid> {
        self.crashed.clone()
    }
    fn unsound(&self) -> Vec<Pid> {
        self.unsound.clone()
    }
    fn resiliency_violation(&self) -> bool {
        self.stuck
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub agreement_ok: bool,
    pub witness_set: Vec<ValueId>,
    pub offenders: usize,
    pub validity_ok: bool,
    pub resiliency_ok: bool,
    /// No process decided through a fallback path.
    pub soundness_ok: bool,
    /// `decision_counts[v]` processes decided `v`.
    pub decision_counts: Vec<usize>,
    pub undecided: usize,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.agreement_ok && self.validity_ok && self.resiliency_ok && self.soundness_ok
    }

    /// Size of the largest same-value group.
    pub fn plurality(&self) -> usize {
        self.decision_counts.iter().copied().max().unwrap_or(0)
    }

    pub fn distinct_decisions(&self) -> usize {
        self.decision_counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn all_decided(&self) -> bool {
        self.undecided == 0
    }
}

/// Judges `outcome` against the `(n, k, ell)` contract of `spec`.
/// Undecided and crashed processes are never offenders.
pub fn check_agreement(outcome: &impl Outcome, spec: &ProblemSpec) -> Result<Verdict, SpecError> {
    spec.validate()?;
    let inputs = outcome.inputs();
    spec.check_inputs(inputs)?;
    let decisions = outcome.decisions();
    if decisions.len() != spec.n {
        return Err(SpecError::InputCount {
            got: decisions.len(),
            n: spec.n,
        });
    }
    let m = spec.m as usize;
    if let Some(v) = decisions.iter().flatten().find(|v| v.0 >= spec.m) {
        return Err(SpecError::ValueOutOfDomain { value: v.0, m: spec.m });
    }
    let crashed: BTreeSet<Pid> = outcome.crashed().into_iter().collect();
    let proposed = mask(m, inputs.iter().copied());
    let counts = tally(m, decisions.iter().flatten().copied());
    let witness = best_witness(&counts, &proposed, spec.ell as usize);
    let validity_ok = match spec.validity {
        Validity::Weak => true,
        Validity::Strong => decisions.iter().flatten().all(|v| proposed[v.index()]),
    };
    let stuck = outcome.resiliency_violation()
        || (0..spec.n).any(|p| decisions[p].is_none() && !crashed.contains(&p));
    Ok(Verdict {
        agreement_ok: witness.offenders <= spec.n - spec.k,
        witness_set: witness.set,
        offenders: witness.offenders,
        validity_ok,
        resiliency_ok: !stuck,
        soundness_ok: outcome.unsound().is_empty(),
        undecided: decisions.iter().filter(|d| d.is_none()).count(),
        decision_counts: counts,
    })
}
