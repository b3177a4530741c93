//! Asynchronous shared-memory executor over single-writer registers.

mod registers;
mod schedule;
mod system;
mod trace;

pub use registers::RegisterSpace;
pub use schedule::{enumerate_async_schedules, enumerate_async_schedules_with, AsyncSchedule, CrashAt};
pub use system::{Action, AsyncBehavior, AsyncSystem, EventKind, GlobalState, Move, Observation, Slot, Transition};
pub use trace::{ExecutionTrace, TraceEvent};

pub(crate) use schedule::combinations;
pub(crate) use trace::distinct;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::objects::OracleStrategy;
use crate::types::{Pid, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Crash budget the schedule is checked against.
    pub t: usize,
    /// Defaults to `64 * n * n`.
    pub step_bound: Option<usize>,
    pub oracle: OracleStrategy,
}

impl RunOptions {
    pub fn new(t: usize) -> Self {
        RunOptions {
            t,
            step_bound: None,
            oracle: OracleStrategy::default(),
        }
    }

    pub fn with_oracle(mut self, oracle: OracleStrategy) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_step_bound(mut self, bound: usize) -> Self {
        self.step_bound = Some(bound);
        self
    }
}

pub fn default_step_bound(n: usize) -> usize {
    64 * n * n
}

struct Recorder<'a, 'b, B: AsyncBehavior> {
    system: &'a AsyncSystem<'b, B>,
    state: GlobalState<B::State>,
    events: Vec<TraceEvent>,
    steps: usize,
}

impl<B: AsyncBehavior> Recorder<'_, '_, B> {
    fn apply(&mut self, transition: Transition) -> Result<(), ModelError> {
        let kind = self.system.apply(&mut self.state, transition)?;
        self.events.push(TraceEvent {
            step: self.steps,
            pid: transition.pid(),
            kind,
        });
        if !matches!(transition, Transition::Crash(_)) {
            self.steps += 1;
        }
        Ok(())
    }

    fn is_running(&self, pid: Pid) -> bool {
        matches!(self.state.slots[pid], Slot::Running(_))
    }
}

/// Runs `behavior` under `schedule`, then round-robin until every correct
/// process decides or `step_bound` steps were taken.
pub fn run_async<B: AsyncBehavior>(
    behavior: &B,
    inputs: &[ValueId],
    schedule: &AsyncSchedule,
    options: &RunOptions,
) -> Result<ExecutionTrace, ModelError> {
    let n = inputs.len();
    schedule.validate(n, options.t)?;
    let bound = options.step_bound.unwrap_or_else(|| default_step_bound(n));
    if bound == 0 {
        return Err(ModelError::Config("step bound must be at least 1".into()));
    }
    let system = AsyncSystem::new(behavior, inputs.to_vec(), options.t);
    let mut rec = Recorder {
        system: &system,
        state: system.initial(&options.oracle),
        events: Vec::new(),
        steps: 0,
    };
    let crash_due = |rec: &mut Recorder<B>, position: usize| -> Result<(), ModelError> {
        for c in schedule.crashes.iter().filter(|c| c.position == position) {
            if rec.is_running(c.pid) {
                rec.apply(Transition::Crash(c.pid))?;
            }
        }
        Ok(())
    };
    for (i, &pid) in schedule.steps.iter().enumerate() {
        crash_due(&mut rec, i)?;
        if rec.steps >= bound {
            break;
        }
        if rec.is_running(pid) {
            rec.apply(Transition::Step(pid))?;
        }
    }
    for c in &schedule.crashes {
        if c.position >= schedule.steps.len() && rec.is_running(c.pid) {
            rec.apply(Transition::Crash(c.pid))?;
        }
    }
    while !rec.state.is_terminal() && rec.steps < bound {
        for pid in 0..n {
            if rec.steps < bound && rec.is_running(pid) {
                rec.apply(Transition::Step(pid))?;
            }
        }
    }
    let Recorder { state, events, steps, .. } = rec;
    Ok(ExecutionTrace {
        n,
        inputs: inputs.to_vec(),
        decisions: state.decisions(),
        crashed: (0..n).filter(|&p| matches!(state.slots[p], Slot::Crashed)).collect(),
        distinct_inputs: distinct(inputs),
        unsound: state.unsound(),
        resiliency_violation: !state.is_terminal(),
        steps,
        oracle_decisions: state.objects.oracle.as_ref().map(|o| o.decisions().to_vec()),
        events,
    })
}
