use serde::{Deserialize, Serialize};

use crate::algorithms::{instantiate, AlgorithmId, AlgorithmParams, Executable};
use crate::objects::OracleStrategy;
use crate::shmem::{run_async, AsyncSchedule, ExecutionTrace, RunOptions};
use crate::sync::{run_sync, CrashPattern, RoundTrace};
use crate::types::{ProblemSpec, ValueId};
use crate::verify::replay::Replay;
use crate::verify::verdict::{check_agreement, Verdict};
use crate::verify::ExploreError;
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Adversary {
    Schedule(AsyncSchedule),
    Pattern(CrashPattern),
}

/// Everything needed to reproduce one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmId,
    #[serde(default)]
    pub params: AlgorithmParams,
    /// The task the run is judged against.
    pub spec: ProblemSpec,
    pub inputs: Vec<ValueId>,
    pub adversary: Adversary,
    #[serde(default)]
    pub oracle: OracleStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Trace {
    Async(ExecutionTrace),
    Sync(RoundTrace),
}

impl Trace {
    pub fn to_json_lines(&self) -> String {
        match self {
            Trace::Async(t) => t.to_json_lines(),
            Trace::Sync(t) => t.to_json_lines(),
        }
    }

    pub fn decisions(&self) -> &[Option<ValueId>] {
        match self {
            Trace::Async(t) => &t.decisions,
            Trace::Sync(t) => &t.decisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: AlgorithmId,
    pub spec: ProblemSpec,
    pub verdict: Verdict,
    pub replay: String,
    pub trace: Trace,
}

pub fn execute(config: &RunConfig) -> Result<RunResult, ExploreError> {
    let instance = instantiate(config.algorithm, &config.spec, &config.params)?;
    config.spec.check_inputs(&config.inputs)?;
    let (trace, verdict) = match (&instance.executable, &config.adversary) {
        (Executable::Async(b), Adversary::Schedule(schedule)) => {
            let options = RunOptions::new(instance.crash_budget).with_oracle(config.oracle.clone());
            let trace = run_async(b, &config.inputs, schedule, &options)?;
            let verdict = check_agreement(&trace, &config.spec)?;
            (Trace::Async(trace), verdict)
        }
        (Executable::Sync { behavior, rounds }, Adversary::Pattern(pattern)) => {
            let trace = run_sync(behavior, &config.inputs, pattern, *rounds, instance.crash_budget, &config.oracle)?;
            let verdict = check_agreement(&trace, &config.spec)?;
            (Trace::Sync(trace), verdict)
        }
        (Executable::Async(_), _) => {
            return Err(ModelError::Config(format!("{} needs an asynchronous schedule", config.algorithm)).into())
        }
        (Executable::Sync { .. }, _) => {
            return Err(ModelError::Config(format!("{} needs a crash pattern", config.algorithm)).into())
        }
    };
    Ok(RunResult {
        algorithm: config.algorithm,
        spec: config.spec,
        verdict,
        replay: Replay::Run(config.clone()).encode(),
        trace,
    })
}
