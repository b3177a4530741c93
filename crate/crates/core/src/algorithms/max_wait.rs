use crate::algorithms::scan::Scan;
use crate::shmem::{Action, AsyncBehavior, Observation};
use crate::types::{Pid, ValueId};

/// Publish the input, collect inputs until `q` are known (own included) and
/// decide the largest.
#[derive(Debug, Clone, Copy)]
pub struct MaxWait {
    pub n: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaxWaitState {
    input: ValueId,
    written: bool,
    scan: Scan,
}

impl MaxWait {
    pub fn new(n: usize, q: usize) -> Self {
        MaxWait { n, q }
    }
}

impl AsyncBehavior for MaxWait {
    type State = MaxWaitState;

    fn init(&self, pid: Pid, input: ValueId) -> MaxWaitState {
        MaxWaitState {
            input,
            written: false,
            scan: Scan::new(pid, self.n),
        }
    }

    fn next_action(&self, s: &MaxWaitState) -> Action {
        if !s.written {
            return Action::Write {
                owner: s.scan.me,
                index: 0,
                value: s.input,
            };
        }
        if s.scan.count() >= self.q {
            return Action::Decide {
                value: s.scan.values().max().expect("own input is known"),
                sound: true,
            };
        }
        Action::Read {
            owner: s.scan.cursor,
            index: 0,
        }
    }

    fn observe(&self, s: &mut MaxWaitState, observation: Observation) {
        match observation {
            Observation::Written => {
                s.written = true;
                s.scan.publish(s.input);
            }
            Observation::Read(v) => s.scan.observe(v),
            Observation::Returned(_) => {}
        }
    }
}
