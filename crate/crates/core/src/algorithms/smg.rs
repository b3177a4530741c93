use crate::objects::ObjectRef;
use crate::shmem::{Action, AsyncBehavior, Observation};
use crate::types::{Pid, ValueId};

const A: ObjectRef = ObjectRef::Consensus(0);
const B: ObjectRef = ObjectRef::Consensus(1);
const C: ObjectRef = ObjectRef::Consensus(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Propose to the object, decide its winner.
    Single(ObjectRef),
    /// Propose to the object, re-propose its winner to `C`, decide `C`'s.
    Relay(ObjectRef),
    Alone,
}

/// Wait-free composition of consensus objects for `g` processes.
///
/// With `g > 3 * floor(n/4)` the lowest `g` pids share one object. Otherwise
/// two groups of `min(floor(n/2), g)` share objects `A` and `B`, and half of
/// each group relays its group's winner through `C`.
#[derive(Debug, Clone, Copy)]
pub struct SmgComposition {
    pub n: usize,
    pub g: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SmgState {
    role: Role,
    input: ValueId,
    carried: Option<ValueId>,
    relayed: Option<ValueId>,
}

impl SmgComposition {
    pub fn new(n: usize, g: usize) -> Self {
        SmgComposition { n, g }
    }

    pub fn single_object(&self) -> bool {
        self.g > 3 * (self.n / 4)
    }

    fn g_hat(&self) -> usize {
        (self.n / 2).min(self.g)
    }

    pub fn role(&self, pid: Pid) -> Role {
        if self.single_object() {
            return if pid < self.g { Role::Single(A) } else { Role::Alone };
        }
        let gh = self.g_hat();
        let half = gh / 2;
        match pid {
            p if p < half => Role::Relay(A),
            p if p < gh => Role::Single(A),
            p if p < gh + half => Role::Relay(B),
            p if p < 2 * gh => Role::Single(B),
            _ => Role::Alone,
        }
    }
}

impl AsyncBehavior for SmgComposition {
    type State = SmgState;

    fn init(&self, pid: Pid, input: ValueId) -> SmgState {
        SmgState {
            role: self.role(pid),
            input,
            carried: None,
            relayed: None,
        }
    }

    fn next_action(&self, s: &SmgState) -> Action {
        let decide = |value| Action::Decide { value, sound: true };
        match (s.role, s.carried, s.relayed) {
            (Role::Alone, ..) => decide(s.input),
            (Role::Single(object) | Role::Relay(object), None, _) => Action::Propose { object, value: s.input },
            (Role::Single(_), Some(w), _) => decide(w),
            (Role::Relay(_), Some(w), None) => Action::Propose { object: C, value: w },
            (Role::Relay(_), Some(_), Some(c)) => decide(c),
        }
    }

    fn observe(&self, s: &mut SmgState, observation: Observation) {
        if let Observation::Returned(v) = observation {
            if s.carried.is_none() {
                s.carried = Some(v);
            } else {
                s.relayed = Some(v);
            }
        }
    }

    fn may_access(&self, s: &SmgState, object: ObjectRef) -> bool {
        match (s.role, s.carried, s.relayed) {
            (Role::Single(o), None, _) => o == object,
            (Role::Relay(o), None, _) => o == object || object == C,
            (Role::Relay(_), Some(_), None) => object == C,
            _ => false,
        }
    }

    fn consensus_capacities(&self) -> Vec<usize> {
        if self.single_object() {
            vec![self.g]
        } else {
            let gh = self.g_hat();
            vec![gh, gh, 2 * (gh / 2)]
        }
    }
}
