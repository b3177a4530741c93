use thiserror::Error;

use crate::types::Pid;

/// A [`ProblemSpec`](crate::ProblemSpec) violates one of its invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("invariant n >= 2 violated (n = {0})")]
    TooFewProcesses(usize),
    #[error("invariant m >= 2 violated (m = {0})")]
    TooFewValues(u32),
    #[error("invariant 1 <= k <= n violated (k = {k}, n = {n})")]
    ThresholdOutOfRange { k: usize, n: usize },
    #[error("invariant 1 <= ell <= m violated (ell = {ell}, m = {m})")]
    SetBoundOutOfRange { ell: u32, m: u32 },
    #[error("invariant 0 <= t <= n violated (t = {t}, n = {n})")]
    TooManyCrashes { t: usize, n: usize },
    #[error("invariant 1 <= g <= n violated (g = {g}, n = {n})")]
    ObjectSizeOutOfRange { g: usize, n: usize },
    #[error("expected {n} inputs, got {got}")]
    InputCount { got: usize, n: usize },
    #[error("value {value} outside the domain 0..{m}")]
    ValueOutOfDomain { value: u32, m: u32 },
    #[error("{0}")]
    Unsupported(String),
}

/// A behavior, schedule or object access broke the computation model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("p{} wrote register ({owner}, {index}) owned by p{}", writer + 1, owner + 1)]
    ForeignWrite { writer: Pid, owner: Pid, index: usize },
    #[error("p{} wrote register index {index} but the next unused index is {expected}", owner + 1)]
    OutOfOrderWrite { owner: Pid, index: usize, expected: usize },
    #[error("consensus object {object} of capacity {capacity} exceeded by p{}", pid + 1)]
    CapacityExceeded { object: usize, capacity: usize, pid: Pid },
    #[error("p{} proposed twice on {object}", pid + 1)]
    DoublePropose { object: String, pid: Pid },
    #[error("unknown shared object {0}")]
    UnknownObject(String),
    #[error("oracle response {response} to p{} violates its agreement contract", pid + 1)]
    OracleNonCompliant { pid: Pid, response: u32 },
    #[error("oracle has no admissible response for p{}", pid + 1)]
    OracleExhausted { pid: Pid },
    #[error("p{} emitted a message after deciding", pid + 1)]
    SendAfterDecide { pid: Pid },
    #[error("p{} is scheduled at position {position} after crashing", pid + 1)]
    StepAfterCrash { pid: Pid, position: usize },
    #[error("schedule refers to p{} but there are only {n} processes", pid + 1)]
    UnknownProcess { pid: Pid, n: usize },
    #[error("{crashes} crashes exceed the budget t = {t}")]
    CrashBudget { crashes: usize, t: usize },
    #[error("crash pattern round {round} outside 1..={rounds}")]
    CrashRound { round: u32, rounds: u32 },
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// A combinatorial enumeration outgrew its cap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("enumeration budget of {cap} exceeded after {reached} items")]
pub struct BudgetError {
    pub cap: u128,
    pub reached: u128,
}
