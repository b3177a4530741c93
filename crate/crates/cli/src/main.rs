//! `pagree`: bound tables, single runs, exhaustive exploration and reduction
//! checks for partial agreement.
//!
//! Exit codes: 0 pass, 1 violation or execution error, 2 budget-incomplete or
//! sampled exploration, 64 usage error.

mod render;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partial_agreement::objects::OracleStrategy;
use partial_agreement::shmem::AsyncSchedule;
use partial_agreement::sync::CrashPattern;
use partial_agreement::verify::{
    execute, reachable_outcomes, Adversary, Budget, ExploreError, Replay, RunConfig, SearchMode,
};
use partial_agreement::{
    evaluate_bounds, explore, instantiate, AlgorithmId, AlgorithmParams, ExploreConfig, Model, ModelError, Pid,
    ProblemSpec, QuorumPolicy, SpecError, Validity, ValueId,
};

const EXIT_VIOLATION: u8 = 1;
const EXIT_INCOMPLETE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "pagree", version, about = "Partial agreement bounds, simulation and exhaustive checking")]
struct Cli {
    /// Output format; `csv` applies to bounds and table, `jsonl` to run.
    #[arg(long, value_enum, global = true, default_value = "text")]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Jsonl,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form thresholds of every applicable row for one spec.
    Bounds(SpecArgs),
    /// Sweep n and emit one CSV line per applicable row.
    Table(TableArgs),
    /// Execute one run and judge it.
    Run(RunArgs),
    /// Explore every adversary (or a seeded sample) and report violations.
    Explore(ExploreArgs),
    /// Explore a reduction against every compliant oracle.
    Reduce(ExploreArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    AsyncRw,
    SyncMp,
    SmG,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ValidityArg {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuorumArg {
    Exact,
    Eager,
}

#[derive(Debug, Clone, Args)]
struct SpecArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Value domain size (default: 2, or one past the largest input).
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    t: Option<usize>,
    /// Agreement threshold (default: the algorithm's guarantee, or n).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ell: Option<u32>,
    /// Consensus object size; implies the sm-g model.
    #[arg(long)]
    g: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, value_enum)]
    validity: Option<ValidityArg>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Debug, Clone, Args)]
struct AlgArgs {
    #[arg(long = "alg", value_parser = parse_algorithm)]
    algorithm: Option<AlgorithmId>,
    /// Read quorum of max-wait.
    #[arg(long)]
    q: Option<usize>,
    /// Rounds of min-flood.
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long, value_enum)]
    quorum: Option<QuorumArg>,
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    alg: AlgArgs,
    /// Comma-separated inputs, one per process.
    #[arg(long)]
    inputs: Option<String>,
    /// Seeded random adversary.
    #[arg(long, conflicts_with_all = ["schedule", "crash", "no_crash"])]
    seed: Option<u64>,
    /// Comma-separated zero-based pids to step before round-robin takes over.
    #[arg(long)]
    schedule: Option<String>,
    /// `PID@POS` (asynchronous) or `PID@ROUND[:DST,..]` (synchronous).
    #[arg(long, conflicts_with = "no_crash")]
    crash: Vec<String>,
    /// Run without crashes (the default without --seed).
    #[arg(long)]
    no_crash: bool,
    /// worst-case-split, plurality-exact-k or honest-full-agreement.
    #[arg(long, value_parser = parse_oracle)]
    oracle: Option<OracleStrategy>,
    /// Re-execute an encoded run; all other run flags are ignored.
    #[arg(long)]
    replay: Option<String>,
}

#[derive(Debug, Args)]
struct ExploreArgs {
    #[command(flatten)]
    alg: AlgArgs,
    /// `all`, or one comma-separated assignment (repeatable).
    #[arg(long)]
    inputs: Vec<String>,
    /// Sample this many random adversaries per assignment instead of exploring.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "sample")]
    seed: u64,
    /// Distinct states per assignment before giving up on it.
    #[arg(long, env = "PAGREE_MAX_STATES")]
    max_states: Option<usize>,
    /// Largest n explored over all inputs.
    #[arg(long)]
    exhaustive_n: Option<usize>,
    #[arg(long)]
    max_recorded: Option<usize>,
    /// Re-run an encoded exploration; all other flags are ignored.
    #[arg(long)]
    replay: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::usage(e)
    }
}

impl From<ExploreError> for Failure {
    fn from(e: ExploreError) -> Self {
        let code = match e {
            ExploreError::Spec(_) => EXIT_USAGE,
            ExploreError::TooLarge { .. } => EXIT_INCOMPLETE,
            ExploreError::Model(_) => EXIT_VIOLATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Rendered output plus the exit code it implies.
struct Output {
    body: String,
    code: u8,
}

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|e: SpecError| {
        let known: Vec<&str> = AlgorithmId::ALL.iter().map(|a| a.as_str()).collect();
        format!("{e}; known: {}", known.join(", "))
    })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("not a number: {x:?}")))
        .collect()
}

fn parse_values(s: &str) -> Result<Vec<ValueId>, String> {
    Ok(parse_list::<u32>(s)?.into_iter().map(ValueId).collect())
}

fn parse_pids(s: &str) -> Result<Vec<Pid>, String> {
    parse_list(s)
}

fn parse_oracle(s: &str) -> Result<OracleStrategy, String> {
    OracleStrategy::parse(s).ok_or_else(|| format!("unknown oracle strategy {s:?}"))
}

fn is_sync(algorithm: AlgorithmId) -> bool {
    matches!(algorithm, AlgorithmId::MinFlood | AlgorithmId::ReduceSync)
}

impl SpecArgs {
    fn model(&self, algorithm: Option<AlgorithmId>) -> Result<Model, Failure> {
        Ok(match (self.model, self.g) {
            (Some(ModelKind::SmG), Some(g)) | (None, Some(g)) => Model::SmG { g },
            (Some(ModelKind::SmG), None) => return Err(Failure::usage("--model sm-g needs --g")),
            (Some(_), Some(_)) => return Err(Failure::usage("--g only applies to the sm-g model")),
            (Some(ModelKind::AsyncRw), None) => Model::AsyncRw,
            (Some(ModelKind::SyncMp), None) => Model::SyncMp,
            (None, None) if algorithm.is_some_and(is_sync) => Model::SyncMp,
            (None, None) => Model::AsyncRw,
        })
    }

    fn n(&self) -> Result<usize, Failure> {
        self.n.ok_or_else(|| Failure::usage("--n is required"))
    }

    /// The spec with every unset threshold at `n`.
    fn base(&self, algorithm: Option<AlgorithmId>, inputs: &[ValueId]) -> Result<ProblemSpec, Failure> {
        let n = self.n()?;
        let widest = inputs.iter().map(|v| v.0 + 1).max().unwrap_or(0);
        let m = self.m.unwrap_or(widest.max(2));
        let default_t = if algorithm == Some(AlgorithmId::SmgComp) { n } else { 1 };
        let mut spec = ProblemSpec::new(n, m, self.t.unwrap_or(default_t), self.k.unwrap_or(n))
            .with_model(self.model(algorithm)?);
        if let Some(ell) = self.ell {
            spec = spec.with_ell(ell);
        }
        if let Some(v) = self.validity {
            spec = spec.with_validity(match v {
                ValidityArg::Weak => Validity::Weak,
                ValidityArg::Strong => Validity::Strong,
            });
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl AlgArgs {
    fn algorithm(&self) -> Result<AlgorithmId, Failure> {
        self.algorithm.ok_or_else(|| Failure::usage("--alg is required"))
    }

    fn params(&self) -> AlgorithmParams {
        AlgorithmParams {
            q: self.q,
            rounds: self.rounds,
            g: self.spec.g,
            quorum: match self.quorum {
                Some(QuorumArg::Eager) => QuorumPolicy::Eager,
                _ => QuorumPolicy::Exact,
            },
        }
    }

    /// The spec to judge against: explicit flags, else the algorithm's claim.
    fn spec(&self, inputs: &[ValueId]) -> Result<(AlgorithmId, AlgorithmParams, ProblemSpec), Failure> {
        let algorithm = self.algorithm()?;
        let params = self.params();
        let base = self.spec.base(Some(algorithm), inputs)?;
        let claimed = instantiate(algorithm, &base, &params)?.claimed;
        let mut spec = base;
        if self.spec.k.is_none() {
            spec.k = claimed.k;
        }
        if self.spec.ell.is_none() {
            spec.ell = claimed.ell;
        }
        if self.spec.validity.is_none() {
            spec.validity = claimed.validity;
        }
        spec.validate()?;
        Ok((algorithm, params, spec))
    }
}

fn cmd_bounds(args: &SpecArgs, format: Format) -> Result<Output, Failure> {
    let spec = args.base(None, &[])?;
    let reports = evaluate_bounds(&spec)?;
    let body = match format {
        Format::Text => render::bounds(&spec, &reports),
        Format::Json => serde_json::to_string_pretty(&reports).expect("bounds serialize") + "\n",
        Format::Csv => render::bounds_csv(&[(spec, reports)]),
        Format::Jsonl => return Err(Failure::usage("jsonl applies to run traces")),
    };
    Ok(Output { body, code: 0 })
}

fn cmd_table(args: &TableArgs, format: Format) -> Result<Output, Failure> {
    if !matches!(format, Format::Text | Format::Csv) {
        return Err(Failure::usage("table emits csv"));
    }
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(Failure::usage("need 2 <= --n-min <= --n-max"));
    }
    let mut sweep = Vec::new();
    for n in args.n_min..=args.n_max {
        let mut with_n = args.spec.clone();
        with_n.n = Some(n);
        // hypotheses such as t <= n or g <= n fail for small n
        if let Ok(spec) = with_n.base(None, &[]) {
            sweep.push((spec, evaluate_bounds(&spec)?));
        }
    }
    Ok(Output {
        body: render::bounds_csv(&sweep),
        code: 0,
    })
}

fn parse_crash(raw: &str) -> Result<(Pid, u32, Option<Vec<Pid>>), Failure> {
    let bad = || Failure::usage(format!("crash {raw:?}: expected PID@POS or PID@ROUND[:DST,..]"));
    let (pid, rest) = raw.split_once('@').ok_or_else(bad)?;
    let (at, reached) = match rest.split_once(':') {
        Some((at, "")) => (at, Some(Vec::new())),
        Some((at, list)) => (at, Some(parse_pids(list).map_err(|_| bad())?)),
        None => (rest, None),
    };
    Ok((pid.parse().map_err(|_| bad())?, at.parse().map_err(|_| bad())?, reached))
}

fn adversary(args: &RunArgs, algorithm: AlgorithmId) -> Result<Adversary, Failure> {
    let crashes = args.crash.iter().map(|c| parse_crash(c)).collect::<Result<Vec<_>, _>>()?;
    if is_sync(algorithm) {
        if args.schedule.is_some() {
            return Err(Failure::usage("--schedule applies to asynchronous algorithms"));
        }
        let pattern = crashes.into_iter().fold(CrashPattern::none(), |p, (pid, round, reached)| {
            p.with_crash(pid, round, reached.unwrap_or_default())
        });
        return Ok(Adversary::Pattern(pattern));
    }
    let steps = args.schedule.as_deref().map(parse_pids).transpose().map_err(Failure::usage)?;
    let mut schedule = AsyncSchedule::new(steps.unwrap_or_default());
    for (pid, position, reached) in crashes {
        if reached.is_some() {
            return Err(Failure::usage("delivery lists apply to synchronous crashes"));
        }
        schedule = schedule.with_crash(pid, position as usize);
    }
    Ok(Adversary::Schedule(schedule))
}

fn cmd_run(args: &RunArgs, format: Format) -> Result<Output, Failure> {
    let config = match &args.replay {
        Some(encoding) => match Replay::decode(encoding).map_err(Failure::usage)? {
            Replay::Run(config) => config,
            Replay::Explore(_) => return Err(Failure::usage("an exploration replay; use explore --replay")),
        },
        None => {
            let raw = args.inputs.as_deref().ok_or_else(|| Failure::usage("--inputs is required"))?;
            let inputs = parse_values(raw).map_err(Failure::usage)?;
            let (algorithm, params, spec) = args.alg.spec(&inputs)?;
            match args.seed {
                Some(seed) => {
                    let sampled = ExploreConfig::new(algorithm, spec).with_params(params).sampled(1, seed);
                    let outcomes = reachable_outcomes(&sampled, &inputs)?;
                    let encoding = outcomes.values().next().expect("one sampled execution");
                    let Ok(Replay::Run(mut config)) = Replay::decode(encoding) else {
                        unreachable!("sampled executions replay as runs")
                    };
                    // scripted answers are already fixed for oracle algorithms
                    if let (Some(strategy), false) = (&args.oracle, matches!(config.oracle, OracleStrategy::Scripted { .. })) {
                        config.oracle = strategy.clone();
                    }
                    config
                }
                None => RunConfig {
                    algorithm,
                    params,
                    spec,
                    inputs,
                    adversary: adversary(args, algorithm)?,
                    oracle: args.oracle.clone().unwrap_or_default(),
                },
            }
        }
    };
    let result = match execute(&config) {
        Ok(result) => result,
        Err(ExploreError::Model(e)) => return Err(model_failure(e, &config)),
        Err(e) => return Err(e.into()),
    };
    let code = if result.verdict.passed() { 0 } else { EXIT_VIOLATION };
    let body = match format {
        Format::Text => render::run(&result),
        Format::Json => serde_json::to_string_pretty(&result).expect("result serializes") + "\n",
        Format::Jsonl => result.trace.to_json_lines(),
        Format::Csv => return Err(Failure::usage("csv applies to bounds and table")),
    };
    Ok(Output { body, code })
}

fn model_failure(e: ModelError, config: &RunConfig) -> Failure {
    Failure {
        code: EXIT_VIOLATION,
        message: format!("{e}\nreplay: {}", Replay::Run(config.clone()).encode()),
    }
}

fn explore_config(args: &ExploreArgs) -> Result<ExploreConfig, Failure> {
    if let Some(encoding) = &args.replay {
        return match Replay::decode(encoding).map_err(Failure::usage)? {
            Replay::Explore(config) => Ok(config),
            Replay::Run(_) => Err(Failure::usage("a single-run replay; use run --replay")),
        };
    }
    let fixed: Vec<Vec<ValueId>> = args
        .inputs
        .iter()
        .filter(|s| s.as_str() != "all")
        .map(|s| parse_values(s).map_err(Failure::usage))
        .collect::<Result<_, _>>()?;
    if !fixed.is_empty() && fixed.len() != args.inputs.len() {
        return Err(Failure::usage("--inputs all cannot be combined with explicit assignments"));
    }
    let widest: Vec<ValueId> = fixed.iter().flatten().copied().collect();
    let (algorithm, params, spec) = args.alg.spec(&widest)?;
    let defaults = Budget::default();
    let budget = Budget {
        max_states: args.max_states.unwrap_or(defaults.max_states),
        exhaustive_n: args.exhaustive_n.unwrap_or(defaults.exhaustive_n),
        max_recorded: args.max_recorded.unwrap_or(defaults.max_recorded),
    };
    let mut config = ExploreConfig::new(algorithm, spec).with_params(params).with_budget(budget);
    if !fixed.is_empty() {
        config = config.with_inputs(fixed);
    }
    if let Some(runs) = args.sample {
        config = config.sampled(runs, args.seed);
    }
    Ok(config)
}

fn cmd_explore(args: &ExploreArgs, format: Format, reductions_only: bool) -> Result<Output, Failure> {
    let config = explore_config(args)?;
    if reductions_only && !config.algorithm.is_reduction() {
        return Err(Failure::usage(format!("{} is not a reduction", config.algorithm)));
    }
    let report = explore(&config)?;
    let exhaustive = report.search == SearchMode::Exhaustive;
    let code = if report.violations_total > 0 {
        EXIT_VIOLATION
    } else if !report.complete || !exhaustive {
        EXIT_INCOMPLETE
    } else {
        0
    };
    let body = match format {
        Format::Text => render::report(&report),
        Format::Json => report.to_json() + "\n",
        _ => return Err(Failure::usage("explore emits text or json")),
    };
    Ok(Output { body, code })
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Bounds(args) => cmd_bounds(args, cli.format),
        Command::Table(args) => cmd_table(args, cli.format),
        Command::Run(args) => cmd_run(args, cli.format),
        Command::Explore(args) => cmd_explore(args, cli.format, false),
        Command::Reduce(args) => cmd_explore(args, cli.format, true),
    }
}

fn emit(cli: &Cli, body: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out.body) {
                eprintln!("pagree: cannot write output: {e}");
                return ExitCode::from(EXIT_VIOLATION);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("pagree: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
