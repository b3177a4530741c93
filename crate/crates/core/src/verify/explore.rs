//! Exhaustive and sampled exploration of adversary choices.

use std::collections::{BTreeMap, BTreeSet};
use std::cell::RefCell;
use std::sync::Mutex;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::{xxh3_128, xxh3_64};

use crate::algorithms::{instantiate, AlgorithmId, AlgorithmParams, AsyncAlgorithm, Executable, Instance, SyncAlgorithm};
use crate::error::ModelError;
use crate::objects::{is_compliant, ObjectRef, OracleStrategy};
use crate::shmem::{combinations, default_step_bound, Action, AsyncSchedule, AsyncSystem, GlobalState, Move, Transition};
use crate::sync::{CrashPattern, SyncState, SyncSystem};
use crate::types::{Pid, ProblemSpec, ValueId};
use crate::verify::replay::Replay;
use crate::verify::report::{ExplorationReport, Violation};
use crate::verify::run::{Adversary, RunConfig};
use crate::verify::verdict::{check_agreement, Snapshot, Verdict};
use crate::verify::ExploreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InputsMode {
    /// All `m^n` assignments.
    All,
    Fixed { assignments: Vec<Vec<ValueId>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    /// `runs` random adversaries per input assignment.
    Sampled { runs: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Distinct states per input assignment before giving up on it.
    pub max_states: usize,
    /// Largest `n` for which all input assignments are explored exhaustively.
    pub exhaustive_n: usize,
    /// Violations kept in the report; all are counted.
    pub max_recorded: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: 2_000_000,
            exhaustive_n: 5,
            max_recorded: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreConfig {
    pub algorithm: AlgorithmId,
    #[serde(default)]
    pub params: AlgorithmParams,
    /// The task each execution is judged against.
    pub spec: ProblemSpec,
    pub inputs: InputsMode,
    pub search: SearchMode,
    #[serde(default)]
    pub budget: Budget,
}

impl ExploreConfig {
    pub fn new(algorithm: AlgorithmId, spec: ProblemSpec) -> Self {
        ExploreConfig {
            algorithm,
            params: AlgorithmParams::default(),
            spec,
            inputs: InputsMode::All,
            search: SearchMode::Exhaustive,
            budget: Budget::default(),
        }
    }

    pub fn with_params(mut self, params: AlgorithmParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_inputs(mut self, assignments: Vec<Vec<ValueId>>) -> Self {
        self.inputs = InputsMode::Fixed { assignments };
        self
    }

    pub fn sampled(mut self, runs: usize, seed: u64) -> Self {
        self.search = SearchMode::Sampled { runs, seed };
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}

pub fn all_assignments(n: usize, m: u32) -> Vec<Vec<ValueId>> {
    let m = m as usize;
    let total = m.pow(n as u32);
    (0..total)
        .map(|code| {
            (0..n)
                .map(|p| ValueId(((code / m.pow((n - 1 - p) as u32)) % m) as u32))
                .collect()
        })
        .collect()
}

/// Aggregate over the executions of one or more input assignments.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    pub executions: u64,
    pub states: u64,
    pub complete: bool,
    pub violations: Vec<Violation>,
    pub violations_total: u64,
    pub min_plurality: Option<usize>,
    pub min_plurality_with_undecided: Option<usize>,
    pub max_distinct: usize,
    pub unsound: u64,
    pub stuck: u64,
    pub oracle_noncompliant: u64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            complete: true,
            ..Tally::default()
        }
    }

    fn record(&mut self, verdict: Verdict, oracle_ok: bool, replay: impl FnOnce() -> String, inputs: &[ValueId], cap: usize) {
        self.executions += 1;
        let plurality = verdict.plurality();
        if verdict.all_decided() {
            self.min_plurality = Some(self.min_plurality.map_or(plurality, |p| p.min(plurality)));
        }
        let with_undecided = plurality + verdict.undecided;
        self.min_plurality_with_undecided = Some(
            self.min_plurality_with_undecided
                .map_or(with_undecided, |p| p.min(with_undecided)),
        );
        self.max_distinct = self.max_distinct.max(verdict.distinct_decisions());
        self.unsound += u64::from(!verdict.soundness_ok);
        self.stuck += u64::from(!verdict.resiliency_ok);
        self.oracle_noncompliant += u64::from(!oracle_ok);
        if !verdict.passed() || !oracle_ok {
            self.violations_total += 1;
            if self.violations.len() < cap {
                self.violations.push(Violation {
                    inputs: inputs.to_vec(),
                    replay: replay(),
                    verdict,
                });
            }
        }
    }

    fn merge(mut self, other: Tally, cap: usize) -> Tally {
        self.executions += other.executions;
        self.states += other.states;
        self.complete &= other.complete;
        self.violations_total += other.violations_total;
        let room = cap.saturating_sub(self.violations.len());
        self.violations.extend(other.violations.into_iter().take(room));
        self.min_plurality = min_opt(self.min_plurality, other.min_plurality);
        self.min_plurality_with_undecided = min_opt(self.min_plurality_with_undecided, other.min_plurality_with_undecided);
        self.max_distinct = self.max_distinct.max(other.max_distinct);
        self.unsound += other.unsound;
        self.stuck += other.stuck;
        self.oracle_noncompliant += other.oracle_noncompliant;
        self
    }
}

fn min_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Ctx<'a> {
    config: &'a ExploreConfig,
    instance: &'a Instance,
    /// Distinct final configurations with one replay each, when collecting.
    outcomes: Option<Mutex<BTreeMap<Snapshot, String>>>,
}

impl Ctx<'_> {
    fn run_config(&self, inputs: &[ValueId], adversary: Adversary, responses: Vec<ValueId>) -> String {
        let oracle = if self.instance.oracle().is_some() {
            OracleStrategy::Scripted { responses }
        } else {
            OracleStrategy::default()
        };
        Replay::Run(RunConfig {
            algorithm: self.config.algorithm,
            params: self.config.params,
            spec: self.config.spec,
            inputs: inputs.to_vec(),
            adversary,
            oracle,
        })
        .encode()
    }

    fn leaf(&self, tally: &mut Tally, snapshot: Snapshot, oracle_ok: bool, replay: impl Fn() -> String) -> Result<(), ExploreError> {
        let verdict = check_agreement(&snapshot, &self.config.spec)?;
        tally.record(verdict, oracle_ok, &replay, &snapshot.inputs, self.config.budget.max_recorded);
        if let Some(outcomes) = &self.outcomes {
            let mut outcomes = outcomes.lock().expect("outcome map");
            outcomes.entry(snapshot).or_insert_with(replay);
        }
        Ok(())
    }
}

fn oracle_ok(oracle: Option<&crate::objects::PartialAgreementOracle>) -> bool {
    oracle.is_none_or(|o| {
        let proposed: Vec<ValueId> = o.proposals().iter().flatten().copied().collect();
        is_compliant(o.spec(), &proposed, o.decisions())
    })
}

/// Converts an explorer path to a replayable schedule and oracle script.
fn to_schedule(path: &[Move]) -> (AsyncSchedule, Vec<ValueId>) {
    let mut schedule = AsyncSchedule::default();
    let mut responses = Vec::new();
    let expanded = path.iter().flat_map(|m| {
        let crash = m.crash_after.then_some(Transition::Crash(m.transition.pid()));
        std::iter::once(m.transition).chain(crash)
    });
    for t in expanded {
        match t {
            Transition::Step(p) => schedule.steps.push(p),
            Transition::Respond(p, r) => {
                schedule.steps.push(p);
                responses.push(r);
            }
            Transition::Crash(p) => {
                let at = schedule.steps.len();
                schedule = schedule.with_crash(p, at);
            }
        }
    }
    (schedule, responses)
}

fn stuck_limit(n: usize) -> usize {
    8 * n + 8
}

/// Whether every running process is caught in a read-only loop.
fn is_stuck(system: &AsyncSystem<AsyncAlgorithm>, state: &GlobalState<<AsyncAlgorithm as crate::shmem::AsyncBehavior>::State>) -> bool {
    let all_reads = state
        .running()
        .all(|p| matches!(system.next_action(state, p), Some(Action::Read { .. })));
    all_reads && system.is_deadlocked(state, stuck_limit(system.n()))
}

type AsyncState = GlobalState<<AsyncAlgorithm as crate::shmem::AsyncBehavior>::State>;

/// Collects the bytes fed to `Hash` so they can be digested in one pass.
#[derive(Default)]
struct ByteSink(Vec<u8>);

impl Hasher for ByteSink {
    fn finish(&self) -> u64 {
        xxh3_64(&self.0)
    }

    fn write(&mut self, bytes: &[u8]) {
        self.0.extend_from_slice(bytes);
    }
}

thread_local! {
    static SINK: RefCell<ByteSink> = RefCell::new(ByteSink(Vec::with_capacity(512)));
}

/// 128-bit state fingerprint. Visited sets store fingerprints only.
fn fingerprint<T: Hash>(value: &T) -> u128 {
    SINK.with(|sink| {
        let mut sink = sink.borrow_mut();
        sink.0.clear();
        value.hash(&mut *sink);
        xxh3_128(&sink.0)
    })
}

struct Frame {
    state: AsyncState,
    key: u128,
    moves: Vec<Move>,
    next: usize,
}

fn async_exhaustive(ctx: &Ctx, behavior: &AsyncAlgorithm, inputs: &[ValueId]) -> Result<Tally, ExploreError> {
    let system = AsyncSystem::new(behavior, inputs.to_vec(), ctx.instance.crash_budget);
    let mut tally = Tally::new();
    // value: whether the state is on the DFS stack
    let mut visited: FxHashMap<u128, bool> = FxHashMap::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut path: Vec<Move> = Vec::new();

    let enter = |state: AsyncState,
                 key: u128,
                 visited: &mut FxHashMap<u128, bool>,
                 path: &[Move],
                 tally: &mut Tally|
     -> Result<Frame, ExploreError> {
        visited.insert(key, true);
        tally.states += 1;
        let terminal = state.is_terminal();
        let stuck = !terminal && is_stuck(&system, &state);
        if terminal || stuck {
            let oracle_fine = !terminal || oracle_ok(state.objects.oracle.as_ref());
            ctx.leaf(tally, Snapshot::of_async(inputs, &state, stuck), oracle_fine, || {
                let (schedule, responses) = to_schedule(path);
                ctx.run_config(inputs, Adversary::Schedule(schedule), responses)
            })?;
        }
        let mut moves = Vec::new();
        if !terminal {
            let (reduced, local) = system.reduced(&state)?;
            moves = reduced;
            if local {
                let mut succ = state.clone();
                system.apply_move(&mut succ, moves[0])?;
                if visited.get(&fingerprint(&succ)) == Some(&true) {
                    moves = system.moves(&state)?;
                }
            }
        }
        Ok(Frame {
            state,
            key,
            moves,
            next: 0,
        })
    };

    let root = system.initial(&OracleStrategy::default());
    let key = fingerprint(&root);
    stack.push(enter(root, key, &mut visited, &path, &mut tally)?);
    while let Some(top) = stack.last_mut() {
        if top.next == top.moves.len() {
            let done = stack.pop().expect("non-empty");
            visited.insert(done.key, false);
            path.pop();
            continue;
        }
        let m = top.moves[top.next];
        top.next += 1;
        let mut succ = top.state.clone();
        system.apply_move(&mut succ, m)?;
        let key = fingerprint(&succ);
        if visited.contains_key(&key) {
            continue;
        }
        if tally.states as usize >= ctx.config.budget.max_states {
            tally.complete = false;
            break;
        }
        path.push(m);
        stack.push(enter(succ, key, &mut visited, &path, &mut tally)?);
    }
    Ok(tally)
}

fn async_sampled(ctx: &Ctx, behavior: &AsyncAlgorithm, inputs: &[ValueId], runs: usize, rng: &mut ChaCha8Rng) -> Result<Tally, ExploreError> {
    let system = AsyncSystem::new(behavior, inputs.to_vec(), ctx.instance.crash_budget);
    let n = inputs.len();
    let bound = default_step_bound(n);
    let crash_chance = 1.0 / (2 * n) as f64;
    let mut tally = Tally::new();
    for _ in 0..runs {
        let mut state = system.initial(&OracleStrategy::default());
        let mut path = Vec::new();
        let mut steps = 0;
        let mut stuck = false;
        while !state.is_terminal() {
            if steps >= bound || is_stuck(&system, &state) {
                stuck = true;
                break;
            }
            let running: Vec<Pid> = state.running().collect();
            let p = *running.choose(rng).expect("running");
            let transition = if state.crashes < system.crash_budget && rng.gen_bool(crash_chance) {
                Transition::Crash(p)
            } else {
                match system.next_action(&state, p) {
                    Some(Action::Propose {
                        object: ObjectRef::Oracle,
                        value,
                    }) => {
                        let oracle = state.objects.oracle.as_ref().expect("oracle present");
                        let answers = oracle.admissible_responses(p, value)?;
                        Transition::Respond(p, *answers.choose(rng).ok_or(ModelError::OracleExhausted { pid: p })?)
                    }
                    _ => Transition::Step(p),
                }
            };
            if !matches!(transition, Transition::Crash(_)) {
                steps += 1;
            }
            system.apply(&mut state, transition)?;
            path.push(transition);
        }
        let oracle_fine = oracle_ok(state.objects.oracle.as_ref());
        ctx.leaf(&mut tally, Snapshot::of_async(inputs, &state, stuck), oracle_fine, || {
            let path: Vec<Move> = path.iter().copied().map(Move::new).collect();
            let (schedule, responses) = to_schedule(&path);
            ctx.run_config(inputs, Adversary::Schedule(schedule), responses)
        })?;
    }
    Ok(tally)
}

type SyncLocal = <SyncAlgorithm as crate::sync::SyncBehavior>::State;

/// Adversary choices taken so far in the synchronous search.
#[derive(Default, Clone)]
struct SyncPath {
    responses: Vec<ValueId>,
    pattern: CrashPattern,
}

struct SyncSearch<'a, 'b> {
    ctx: &'a Ctx<'a>,
    system: SyncSystem<'b, SyncAlgorithm>,
    inputs: &'a [ValueId],
    visited: FxHashSet<u128>,
    tally: Tally,
}

impl SyncSearch<'_, '_> {
    fn finish(&mut self, state: &SyncState<SyncLocal>, path: &SyncPath) -> Result<(), ExploreError> {
        let (ctx, inputs) = (self.ctx, self.inputs);
        ctx.leaf(&mut self.tally, Snapshot::of_sync(inputs, state), oracle_ok(state.oracle.as_ref()), || {
            ctx.run_config(inputs, Adversary::Pattern(path.pattern.clone()), path.responses.clone())
        })
    }

    fn oracle_phase(&mut self, state: SyncState<SyncLocal>, path: &mut SyncPath) -> Result<(), ExploreError> {
        let Some((pid, value)) = self.system.pending_oracle(&state) else {
            return self.rounds(state, 1, path);
        };
        let answers = state
            .oracle
            .as_ref()
            .expect("pending access implies an oracle")
            .admissible_responses(pid, value)?;
        for r in answers {
            let mut next = state.clone();
            self.system.oracle_step(&mut next, pid, value, Some(r))?;
            path.responses.push(r);
            self.oracle_phase(next, path)?;
            path.responses.pop();
        }
        Ok(())
    }

    fn rounds(&mut self, state: SyncState<SyncLocal>, round: u32, path: &mut SyncPath) -> Result<(), ExploreError> {
        if !self.tally.complete {
            return Ok(());
        }
        if !self.visited.insert(fingerprint(&(round, &state))) {
            return Ok(());
        }
        self.tally.states += 1;
        if self.tally.states as usize >= self.ctx.config.budget.max_states {
            self.tally.complete = false;
            return Ok(());
        }
        if round > self.system.rounds {
            return self.finish(&state, path);
        }
        let live: Vec<Pid> = state.live().collect();
        let room = self.system.crash_budget.saturating_sub(state.crashes).min(live.len());
        for j in 0..=room {
            for chosen in combinations(live.len(), j) {
                let victims: Vec<Pid> = chosen.iter().map(|&i| live[i]).collect();
                let others: Vec<Pid> = live.iter().copied().filter(|p| !victims.contains(p)).collect();
                let radix = 1usize << others.len();
                let mut digits = vec![0usize; j];
                loop {
                    let mut crashing = BTreeMap::new();
                    for (&v, &d) in victims.iter().zip(&digits) {
                        let reached: BTreeSet<Pid> = (0..others.len()).filter(|i| d >> i & 1 == 1).map(|i| others[i]).collect();
                        crashing.insert(v, reached);
                    }
                    let mut next = state.clone();
                    self.system.round(&mut next, round, &crashing)?;
                    for (&v, reached) in &crashing {
                        path.pattern = std::mem::take(&mut path.pattern).with_crash(v, round, reached.iter().copied());
                    }
                    self.rounds(next, round + 1, path)?;
                    for v in crashing.keys() {
                        path.pattern.victims.remove(v);
                    }
                    if !bump(&mut digits, radix) {
                        break;
                    }
                }
            }
        }
        Ok(())
    }
}

fn bump(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

fn sync_exhaustive(ctx: &Ctx, behavior: &SyncAlgorithm, rounds: u32, inputs: &[ValueId]) -> Result<Tally, ExploreError> {
    let mut search = SyncSearch {
        ctx,
        system: SyncSystem::new(behavior, inputs.to_vec(), rounds, ctx.instance.crash_budget),
        inputs,
        visited: FxHashSet::default(),
        tally: Tally::new(),
    };
    let root = search.system.initial(&OracleStrategy::default());
    search.oracle_phase(root, &mut SyncPath::default())?;
    Ok(search.tally)
}

fn random_pattern(n: usize, budget: usize, rounds: u32, rng: &mut ChaCha8Rng) -> CrashPattern {
    let crashes = rng.gen_range(0..=budget.min(n));
    let mut pids: Vec<Pid> = (0..n).collect();
    pids.shuffle(rng);
    let mut pattern = CrashPattern::none();
    for &p in &pids[..crashes] {
        let round = rng.gen_range(1..=rounds);
        let reached: Vec<Pid> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        pattern = pattern.with_crash(p, round, reached);
    }
    pattern
}

fn sync_sampled(
    ctx: &Ctx,
    behavior: &SyncAlgorithm,
    rounds: u32,
    inputs: &[ValueId],
    runs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Tally, ExploreError> {
    let system = SyncSystem::new(behavior, inputs.to_vec(), rounds, ctx.instance.crash_budget);
    let mut search = SyncSearch {
        ctx,
        system,
        inputs,
        visited: FxHashSet::default(),
        tally: Tally::new(),
    };
    for _ in 0..runs {
        let mut state = search.system.initial(&OracleStrategy::default());
        let mut path = SyncPath::default();
        while let Some((pid, value)) = search.system.pending_oracle(&state) {
            let answers = state.oracle.as_ref().expect("oracle").admissible_responses(pid, value)?;
            let r = *answers.choose(rng).ok_or(ModelError::OracleExhausted { pid })?;
            search.system.oracle_step(&mut state, pid, value, Some(r))?;
            path.responses.push(r);
        }
        path.pattern = random_pattern(inputs.len(), search.system.crash_budget, rounds, rng);
        for round in 1..=rounds {
            search
                .system
                .round(&mut state, round, &crate::sync::victims_of(&path.pattern, round))?;
        }
        search.finish(&state, &path)?;
    }
    Ok(search.tally)
}

fn explore_one(ctx: &Ctx, index: usize, inputs: &[ValueId]) -> Result<Tally, ExploreError> {
    match (ctx.instance.executable, ctx.config.search) {
        (Executable::Async(b), SearchMode::Exhaustive) => async_exhaustive(ctx, &b, inputs),
        (Executable::Sync { behavior, rounds }, SearchMode::Exhaustive) => sync_exhaustive(ctx, &behavior, rounds, inputs),
        (executable, SearchMode::Sampled { runs, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            match executable {
                Executable::Async(b) => async_sampled(ctx, &b, inputs, runs, &mut rng),
                Executable::Sync { behavior, rounds } => sync_sampled(ctx, &behavior, rounds, inputs, runs, &mut rng),
            }
        }
    }
}

/// Runs every configured input assignment against every adversary choice
/// (or a seeded sample of them) and aggregates the verdicts.
pub fn explore(config: &ExploreConfig) -> Result<ExplorationReport, ExploreError> {
    let spec = &config.spec;
    let instance = instantiate(config.algorithm, spec, &config.params)?;
    let assignments = match &config.inputs {
        InputsMode::All => {
            if config.search == SearchMode::Exhaustive && spec.n > config.budget.exhaustive_n {
                return Err(ExploreError::TooLarge {
                    n: spec.n,
                    cap: config.budget.exhaustive_n,
                });
            }
            all_assignments(spec.n, spec.m)
        }
        InputsMode::Fixed { assignments } => {
            for a in assignments {
                spec.check_inputs(a)?;
            }
            assignments.clone()
        }
    };
    let ctx = Ctx {
        config,
        instance: &instance,
        outcomes: None,
    };
    let parts: Vec<Tally> = assignments
        .par_iter()
        .enumerate()
        .map(|(i, a)| explore_one(&ctx, i, a))
        .collect::<Result<_, _>>()?;
    let cap = config.budget.max_recorded;
    let tally = parts.into_iter().fold(Tally::new(), |acc, t| acc.merge(t, cap));
    Ok(ExplorationReport::build(config, &instance, assignments.len(), tally))
}

/// Smallest plurality over the explored executions in which every process
/// decided.
pub fn measure_empirical_k(config: &ExploreConfig) -> Result<Option<usize>, ExploreError> {
    Ok(explore(config)?.empirical_k)
}

/// Convenience for a single algorithm at its default parameters.
pub fn explore_default(algorithm: AlgorithmId, spec: ProblemSpec, params: AlgorithmParams) -> Result<ExplorationReport, ExploreError> {
    explore(&ExploreConfig::new(algorithm, spec).with_params(params))
}

/// Every distinct final configuration the explorer reaches from `inputs`,
/// each with the replay encoding of one execution producing it.
pub fn reachable_outcomes(config: &ExploreConfig, inputs: &[ValueId]) -> Result<BTreeMap<Snapshot, String>, ExploreError> {
    config.spec.check_inputs(inputs)?;
    let instance = instantiate(config.algorithm, &config.spec, &config.params)?;
    let ctx = Ctx {
        config,
        instance: &instance,
        outcomes: Some(Mutex::new(BTreeMap::new())),
    };
    explore_one(&ctx, 0, inputs)?;
    Ok(ctx.outcomes.expect("collecting").into_inner().expect("outcome map"))
}
