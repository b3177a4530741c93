use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmId, AlgorithmParams, Instance};
use crate::types::{Model, ProblemSpec, ValueId};
use crate::verify::explore::{Budget, ExploreConfig, SearchMode, Tally};
use crate::verify::replay::Replay;
use crate::verify::verdict::Verdict;

pub const SCHEMA_VERSION: u32 = 1;

pub const NOTE_CONDITIONAL_OK: &str = "conditional construction verified against oracle";
pub const NOTE_CONDITIONAL_FAILED: &str = "conditional construction falsified against oracle";
pub const NOTE_INCOMPLETE: &str = "state budget exhausted: exploration is not exhaustive";
pub const NOTE_GAP: &str = "tightness open: necessary and sufficient thresholds differ since min(m,t+1) does not divide n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub inputs: Vec<ValueId>,
    /// Reproduces the failing execution with `run --replay`.
    pub replay: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub schema_version: u32,
    pub algorithm: AlgorithmId,
    pub params: AlgorithmParams,
    /// The task executions were judged against.
    pub spec: ProblemSpec,
    /// The task the algorithm claims to solve.
    pub claimed: ProblemSpec,
    pub search: SearchMode,
    pub budget: Budget,
    pub crash_budget: usize,
    /// Whether every adversary choice was covered.
    pub complete: bool,
    pub input_assignments: usize,
    /// Distinct final configurations (exhaustive) or runs (sampled).
    pub executions_checked: u64,
    pub states_visited: u64,
    pub violations_total: u64,
    pub violations: Vec<Violation>,
    /// Smallest plurality over executions where every process decided.
    pub empirical_k: Option<usize>,
    /// Smallest plurality plus undecided processes, over all executions.
    pub empirical_k_with_undecided: Option<usize>,
    /// Largest number of distinct decided values.
    pub empirical_ell: usize,
    pub soundness_violations: u64,
    pub resiliency_violations: u64,
    pub oracle_noncompliant: u64,
    pub notes: Vec<String>,
    /// Reproduces this report with `explore --replay`.
    pub replay: String,
}

impl ExplorationReport {
    pub(crate) fn build(config: &ExploreConfig, instance: &Instance, input_assignments: usize, tally: Tally) -> Self {
        let spec = config.spec;
        let mut notes = Vec::new();
        if instance.id.is_reduction() {
            notes.push(
                if tally.violations_total == 0 {
                    NOTE_CONDITIONAL_OK
                } else {
                    NOTE_CONDITIONAL_FAILED
                }
                .to_string(),
            );
        }
        if !tally.complete {
            notes.push(NOTE_INCOMPLETE.to_string());
        }
        let d = spec.effective_values();
        if spec.model == Model::AsyncRw && spec.t >= 1 && spec.n % d > 1 {
            notes.push(NOTE_GAP.to_string());
        }
        ExplorationReport {
            schema_version: SCHEMA_VERSION,
            algorithm: config.algorithm,
            params: config.params,
            spec,
            claimed: instance.claimed,
            search: config.search,
            budget: config.budget,
            crash_budget: instance.crash_budget,
            complete: tally.complete,
            input_assignments,
            executions_checked: tally.executions,
            states_visited: tally.states,
            violations_total: tally.violations_total,
            violations: tally.violations,
            empirical_k: tally.min_plurality,
            empirical_k_with_undecided: tally.min_plurality_with_undecided,
            empirical_ell: tally.max_distinct,
            soundness_violations: tally.unsound,
            resiliency_violations: tally.stuck,
            oracle_noncompliant: tally.oracle_noncompliant,
            notes,
            replay: Replay::Explore(config.clone()).encode(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations_total == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
