//! Global state and single-step semantics of the asynchronous shared-memory
//! model. [`run_async`](super::run_async), the exhaustive explorer and the
//! random sampler all drive the same [`AsyncSystem`].

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::objects::{ObjectRef, OracleSpec, OracleStrategy, PartialAgreementOracle, SharedObjects};
use crate::shmem::RegisterSpace;
use crate::types::{Pid, ValueId};

/// What a process does on its next scheduled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    Write { owner: Pid, index: usize, value: ValueId },
    Read { owner: Pid, index: usize },
    Propose { object: ObjectRef, value: ValueId },
    /// `sound = false` marks a fallback decision a reduction should never
    /// need to take.
    Decide { value: ValueId, sound: bool },
}

/// What the executor hands back after performing an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    Written,
    Read(Option<ValueId>),
    Returned(ValueId),
}

/// A deterministic per-process program for the asynchronous executor. One
/// behavior value serves every process; roles are derived from the pid.
pub trait AsyncBehavior: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    fn init(&self, pid: Pid, input: ValueId) -> Self::State;

    /// Must be a pure function of the state.
    fn next_action(&self, state: &Self::State) -> Action;

    /// Called after every action except `Decide`.
    fn observe(&self, state: &mut Self::State, observation: Observation);

    /// Capacities of the consensus objects the behavior uses.
    fn consensus_capacities(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Contract of the black-box oracle the behavior consumes, if any.
    fn oracle_spec(&self) -> Option<OracleSpec> {
        None
    }

    /// Whether a process in `state` may still propose to `object` at some
    /// later step. Must never answer `false` wrongly; the explorer's
    /// reductions rely on it.
    fn may_access(&self, _state: &Self::State, _object: ObjectRef) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot<S> {
    Running(S),
    Decided { value: ValueId, sound: bool },
    /// Local state is discarded: a crashed process never acts again.
    Crashed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState<S> {
    pub slots: Vec<Slot<S>>,
    pub registers: RegisterSpace,
    pub objects: SharedObjects,
    pub crashes: usize,
}

impl<S> GlobalState<S> {
    pub fn running(&self) -> impl Iterator<Item = Pid> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Slot::Running(_)))
            .map(|(p, _)| p)
    }

    pub fn is_terminal(&self) -> bool {
        self.running().next().is_none()
    }

    pub fn decisions(&self) -> Vec<Option<ValueId>> {
        self.slots
            .iter()
            .map(|s| match s {
                Slot::Decided { value, .. } => Some(*value),
                _ => None,
            })
            .collect()
    }

    pub fn crashed(&self) -> Vec<bool> {
        self.slots.iter().map(|s| matches!(s, Slot::Crashed)).collect()
    }

    pub fn unsound(&self) -> Vec<Pid> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Slot::Decided { sound: false, .. }))
            .map(|(p, _)| p)
            .collect()
    }
}

/// An adversary choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// Run the process's next action; oracle answers come from the oracle's
    /// strategy.
    Step(Pid),
    /// Run the process's oracle access with a chosen answer.
    Respond(Pid, ValueId),
    Crash(Pid),
}

/// A transition, optionally followed at once by the mover's crash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub transition: Transition,
    pub crash_after: bool,
}

impl Move {
    pub fn new(transition: Transition) -> Self {
        Move {
            transition,
            crash_after: false,
        }
    }

    pub fn then_crash(transition: Transition) -> Self {
        Move {
            transition,
            crash_after: true,
        }
    }
}

impl Transition {
    pub fn pid(self) -> Pid {
        match self {
            Transition::Step(p) | Transition::Respond(p, _) | Transition::Crash(p) => p,
        }
    }
}

/// Result of one applied transition, as logged in traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum EventKind {
    Write { owner: Pid, index: usize, value: ValueId },
    Read { owner: Pid, index: usize, value: Option<ValueId> },
    Propose { object: ObjectRef, value: ValueId, returned: ValueId },
    Decide { value: ValueId, sound: bool },
    Crash,
}

pub struct AsyncSystem<'b, B: AsyncBehavior> {
    pub behavior: &'b B,
    pub inputs: Vec<ValueId>,
    pub crash_budget: usize,
}

impl<'b, B: AsyncBehavior> AsyncSystem<'b, B> {
    pub fn new(behavior: &'b B, inputs: Vec<ValueId>, crash_budget: usize) -> Self {
        AsyncSystem {
            behavior,
            inputs,
            crash_budget,
        }
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn initial(&self, strategy: &OracleStrategy) -> GlobalState<B::State> {
        let oracle = self.behavior.oracle_spec().map(|spec| {
            PartialAgreementOracle::new(spec, strategy.clone()).with_known_proposals(&self.inputs)
        });
        GlobalState {
            slots: self
                .inputs
                .iter()
                .enumerate()
                .map(|(p, &v)| Slot::Running(self.behavior.init(p, v)))
                .collect(),
            registers: RegisterSpace::new(self.n()),
            objects: SharedObjects::new(&self.behavior.consensus_capacities(), oracle),
            crashes: 0,
        }
    }

    pub fn next_action(&self, state: &GlobalState<B::State>, pid: Pid) -> Option<Action> {
        match state.slots.get(pid) {
            Some(Slot::Running(s)) => Some(self.behavior.next_action(s)),
            _ => None,
        }
    }

    pub fn apply(&self, state: &mut GlobalState<B::State>, transition: Transition) -> Result<EventKind, ModelError> {
        let pid = transition.pid();
        let n = self.n();
        let local = match state.slots.get_mut(pid) {
            Some(Slot::Running(s)) => s,
            Some(_) => return Err(ModelError::Config(format!("p{} is not running", pid + 1))),
            None => return Err(ModelError::UnknownProcess { pid, n }),
        };
        if let Transition::Crash(_) = transition {
            if state.crashes >= self.crash_budget {
                return Err(ModelError::CrashBudget {
                    crashes: state.crashes + 1,
                    t: self.crash_budget,
                });
            }
            state.slots[pid] = Slot::Crashed;
            state.crashes += 1;
            return Ok(EventKind::Crash);
        }
        let action = self.behavior.next_action(local);
        let (event, observation) = match action {
            Action::Write { owner, index, value } => {
                state.registers.write(pid, owner, index, value)?;
                (EventKind::Write { owner, index, value }, Observation::Written)
            }
            Action::Read { owner, index } => {
                if owner >= n {
                    return Err(ModelError::UnknownProcess { pid: owner, n });
                }
                let value = state.registers.read(owner, index);
                (EventKind::Read { owner, index, value }, Observation::Read(value))
            }
            Action::Propose { object, value } => {
                let returned = match (object, transition) {
                    (ObjectRef::Consensus(i), _) => state.objects.consensus_propose(i, pid, value)?,
                    (ObjectRef::Oracle, Transition::Respond(_, r)) => state.objects.oracle_mut()?.commit(pid, value, r)?,
                    (ObjectRef::Oracle, _) => state.objects.oracle_mut()?.propose(pid, value)?,
                };
                (EventKind::Propose { object, value, returned }, Observation::Returned(returned))
            }
            Action::Decide { value, sound } => {
                state.slots[pid] = Slot::Decided { value, sound };
                return Ok(EventKind::Decide { value, sound });
            }
        };
        if let Slot::Running(s) = &mut state.slots[pid] {
            self.behavior.observe(s, observation);
        }
        Ok(event)
    }

    /// A step whose effect cannot depend on, or influence, any other
    /// process's steps: a decide, a read of a cell that can no longer change,
    /// or a propose on a consensus object that already has a winner.
    pub fn is_local(&self, state: &GlobalState<B::State>, action: &Action) -> bool {
        match *action {
            Action::Decide { .. } => true,
            Action::Read { owner, index } => {
                state.registers.read(owner, index).is_some()
                    || !matches!(state.slots.get(owner), Some(Slot::Running(_)))
            }
            Action::Propose { object, .. } => state.objects.is_order_independent(object),
            Action::Write { .. } => false,
        }
    }

    /// All adversary choices at `state`. Oracle accesses branch over every
    /// admissible answer.
    pub fn enabled(&self, state: &GlobalState<B::State>) -> Result<Vec<Transition>, ModelError> {
        let mut out = Vec::new();
        let can_crash = state.crashes < self.crash_budget;
        for pid in state.running() {
            out.extend(self.steps_of(state, pid)?);
            if can_crash {
                out.push(Transition::Crash(pid));
            }
        }
        Ok(out)
    }

    fn steps_of(&self, state: &GlobalState<B::State>, pid: Pid) -> Result<Vec<Transition>, ModelError> {
        match self.next_action(state, pid) {
            Some(Action::Propose {
                object: ObjectRef::Oracle,
                value,
            }) => {
                let oracle = state
                    .objects
                    .oracle
                    .as_ref()
                    .ok_or_else(|| ModelError::UnknownObject("oracle".into()))?;
                let answers = oracle.admissible_responses(pid, value)?;
                if answers.is_empty() {
                    return Err(ModelError::OracleExhausted { pid });
                }
                Ok(answers.into_iter().map(|r| Transition::Respond(pid, r)).collect())
            }
            Some(_) => Ok(vec![Transition::Step(pid)]),
            None => Ok(Vec::new()),
        }
    }

    /// Moves of `pid` with crashes restricted to the points that matter: a
    /// process stopping between two reads is indistinguishable from one
    /// stopping right after its previous write, propose or decide, so crashes
    /// are offered only before a non-read action, directly after one, or
    /// before the very first step.
    fn moves_of(&self, state: &GlobalState<B::State>, pid: Pid, out: &mut Vec<Move>) -> Result<(), ModelError> {
        let Some(Slot::Running(local)) = state.slots.get(pid) else {
            return Ok(());
        };
        let action = self.behavior.next_action(local);
        let can_crash = state.crashes < self.crash_budget;
        let steps = self.steps_of(state, pid)?;
        let visible = !matches!(action, Action::Read { .. } | Action::Decide { .. });
        for &t in &steps {
            out.push(Move::new(t));
            if can_crash && visible {
                out.push(Move::then_crash(t));
            }
        }
        let fresh = || *local == self.behavior.init(pid, self.inputs[pid]);
        if can_crash && (!matches!(action, Action::Read { .. }) || fresh()) {
            out.push(Move::new(Transition::Crash(pid)));
        }
        Ok(())
    }

    /// Every move of the crash-restricted adversary.
    pub fn moves(&self, state: &GlobalState<B::State>) -> Result<Vec<Move>, ModelError> {
        let mut out = Vec::new();
        for pid in state.running() {
            self.moves_of(state, pid, &mut out)?;
        }
        Ok(out)
    }

    /// A persistent subset of [`moves`](Self::moves), and whether it was
    /// chosen because of a local step. A local step is explored alone (with
    /// its crash before a decide). Otherwise, when every running process that
    /// may still access some shared object is about to do so, only those
    /// accesses are explored: they commute with every other operation.
    pub fn reduced(&self, state: &GlobalState<B::State>) -> Result<(Vec<Move>, bool), ModelError> {
        for pid in state.running() {
            let action = self.next_action(state, pid).expect("running");
            if self.is_local(state, &action) {
                let mut out = vec![Move::new(Transition::Step(pid))];
                if matches!(action, Action::Decide { .. }) && state.crashes < self.crash_budget {
                    out.push(Move::new(Transition::Crash(pid)));
                }
                return Ok((out, true));
            }
        }
        let mut objects: Vec<ObjectRef> = (0..state.objects.consensus.len()).map(ObjectRef::Consensus).collect();
        if state.objects.oracle.is_some() {
            objects.push(ObjectRef::Oracle);
        }
        for object in objects {
            if state.objects.is_order_independent(object) {
                continue;
            }
            let mut group = Vec::new();
            let mut ready = true;
            for pid in state.running() {
                let Slot::Running(local) = &state.slots[pid] else {
                    unreachable!("running");
                };
                if !self.behavior.may_access(local, object) {
                    continue;
                }
                match self.behavior.next_action(local) {
                    Action::Propose { object: o, .. } if o == object => group.push(pid),
                    _ => {
                        ready = false;
                        break;
                    }
                }
            }
            if ready && !group.is_empty() {
                let mut out = Vec::new();
                for pid in group {
                    self.moves_of(state, pid, &mut out)?;
                }
                return Ok((out, false));
            }
        }
        Ok((self.moves(state)?, false))
    }

    /// Applies a move.
    pub fn apply_move(&self, state: &mut GlobalState<B::State>, m: Move) -> Result<(), ModelError> {
        self.apply(state, m.transition)?;
        if m.crash_after && matches!(state.slots[m.transition.pid()], Slot::Running(_)) {
            self.apply(state, Transition::Crash(m.transition.pid()))?;
        }
        Ok(())
    }

    /// Whether `pid`, running alone against the current memory, loops forever
    /// without writing, proposing or deciding.
    pub fn solo_blocked(&self, state: &GlobalState<B::State>, pid: Pid, limit: usize) -> bool {
        let Some(Slot::Running(start)) = state.slots.get(pid) else {
            return false;
        };
        let mut local = start.clone();
        let mut seen = vec![local.clone()];
        for _ in 0..limit {
            match self.behavior.next_action(&local) {
                Action::Read { owner, index } => {
                    let value = state.registers.read(owner, index);
                    self.behavior.observe(&mut local, Observation::Read(value));
                }
                _ => return false,
            }
            if seen.contains(&local) {
                return true;
            }
            seen.push(local.clone());
        }
        true
    }

    pub fn is_deadlocked(&self, state: &GlobalState<B::State>, limit: usize) -> bool {
        let mut running = state.running().peekable();
        running.peek().is_some() && running.all(|p| self.solo_blocked(state, p, limit))
    }
}
