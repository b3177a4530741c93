use crate::shmem::{Action, AsyncBehavior, Observation};
use crate::types::{Pid, ValueId};

/// Every process decides its own input at its first step.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoComm;

impl AsyncBehavior for NoComm {
    type State = ValueId;

    fn init(&self, _pid: Pid, input: ValueId) -> ValueId {
        input
    }

    fn next_action(&self, &input: &ValueId) -> Action {
        Action::Decide {
            value: input,
            sound: true,
        }
    }

    fn observe(&self, _state: &mut ValueId, _observation: Observation) {}
}
