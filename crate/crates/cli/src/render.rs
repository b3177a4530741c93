//! Text and CSV rendering.

use std::fmt::Write;

use partial_agreement::bounds::{overall_necessary, overall_sufficient};
use partial_agreement::verify::{ExplorationReport, RunResult, SearchMode, Verdict};
use partial_agreement::{pid_label, BoundReport, ProblemSpec, ValueId};

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn value_list(values: &[ValueId]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn bounds(spec: &ProblemSpec, reports: &[BoundReport]) -> String {
    let mut out = String::new();
    writeln!(out, "spec: {spec}").unwrap();
    writeln!(out, "{:<5} {:>10} {:>10} {:>8} {:>7}  assumptions", "row", "sufficient", "necessary", "refined", "rounds").unwrap();
    for r in reports {
        let rounds = match (r.rounds_lower, r.rounds_upper) {
            (None, None) => "-".to_string(),
            (Some(lo), None) => format!(">={lo}"),
            (None, Some(hi)) => format!("<={hi}"),
            (Some(lo), Some(hi)) => format!("{lo}..{hi}"),
        };
        writeln!(
            out,
            "{:<5} {:>10} {:>10} {:>8} {:>7}  {}",
            r.row.to_string(),
            opt(r.sufficient_k),
            opt(r.necessary_k),
            opt(r.refined_necessary_k),
            rounds,
            r.assumptions.join("; ")
        )
        .unwrap();
    }
    for r in reports {
        match (r.sufficient_k, r.best_necessary()) {
            (Some(s), Some(n)) if s == n => writeln!(out, "row {}: k ≤ {s} (tight)", r.row),
            (Some(s), Some(n)) => writeln!(out, "row {}: solvable for k ≤ {s}, unsolvable for k > {n}", r.row),
            (Some(s), None) => writeln!(out, "row {}: solvable for k ≤ {s}", r.row),
            (None, Some(n)) => writeln!(out, "row {}: unsolvable for k > {n}", r.row),
            (None, None) => Ok(()),
        }
        .unwrap();
    }
    writeln!(out, "overall: sufficient {}, necessary {}", opt(overall_sufficient(reports)), opt(overall_necessary(reports))).unwrap();
    out
}

pub const CSV_HEADER: [&str; 14] = [
    "n",
    "m",
    "t",
    "k",
    "ell",
    "model",
    "row",
    "sufficient_k",
    "necessary_k",
    "refined_necessary_k",
    "rounds_lower",
    "rounds_upper",
    "strong_validity",
    "assumptions",
];

pub fn bounds_csv(sweep: &[(ProblemSpec, Vec<BoundReport>)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).unwrap();
    let cell = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for (spec, reports) in sweep {
        for r in reports {
            let strong = r.assumptions.iter().any(|a| a == partial_agreement::bounds::STRONG_VALIDITY_REQUIRED);
            w.write_record([
                spec.n.to_string(),
                spec.m.to_string(),
                spec.t.to_string(),
                spec.k.to_string(),
                spec.ell.to_string(),
                spec.model.to_string(),
                r.row.to_string(),
                cell(r.sufficient_k),
                cell(r.necessary_k),
                cell(r.refined_necessary_k),
                cell(r.rounds_lower),
                cell(r.rounds_upper),
                strong.to_string(),
                r.assumptions.join("; "),
            ])
            .unwrap();
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn verdict_line(v: &Verdict, spec: &ProblemSpec) -> String {
    let status = if v.passed() { "PASS" } else { "FAIL" };
    let mut failed = Vec::new();
    if !v.agreement_ok {
        failed.push(format!("{} offenders > n-k = {}", v.offenders, spec.n - spec.k));
    }
    if !v.validity_ok {
        failed.push("validity".to_string());
    }
    if !v.resiliency_ok {
        failed.push("a correct process never decided".to_string());
    }
    if !v.soundness_ok {
        failed.push("fallback decision".to_string());
    }
    let detail = if failed.is_empty() {
        format!("witness {{{}}}, {} offenders", value_list(&v.witness_set), v.offenders)
    } else {
        failed.join("; ")
    };
    format!("{status} ({detail})")
}

pub fn run(result: &RunResult) -> String {
    let mut out = String::new();
    let trace = &result.trace;
    let decisions = trace.decisions();
    let labels: Vec<String> = decisions
        .iter()
        .enumerate()
        .map(|(p, d)| match d {
            Some(v) => format!("{}={v}", pid_label(p)),
            None => format!("{}=-", pid_label(p)),
        })
        .collect();
    let (inputs, crashed) = match trace {
        partial_agreement::verify::Trace::Async(t) => (&t.inputs, &t.crashed),
        partial_agreement::verify::Trace::Sync(t) => (&t.inputs, &t.crashed),
    };
    writeln!(out, "algorithm  {}", result.algorithm).unwrap();
    writeln!(out, "spec       {}", result.spec).unwrap();
    writeln!(out, "inputs     {}", value_list(inputs)).unwrap();
    writeln!(out, "decisions  {}", labels.join(" ")).unwrap();
    let crashed: Vec<String> = crashed.iter().map(|&p| pid_label(p)).collect();
    writeln!(out, "crashed    {}", if crashed.is_empty() { "-".into() } else { crashed.join(" ") }).unwrap();
    writeln!(out, "plurality  {}", result.verdict.plurality()).unwrap();
    writeln!(out, "verdict    {}", verdict_line(&result.verdict, &result.spec)).unwrap();
    writeln!(out, "replay     {}", result.replay).unwrap();
    out
}

pub fn report(r: &ExplorationReport) -> String {
    let mut out = String::new();
    let search = match r.search {
        SearchMode::Exhaustive => "exhaustive".to_string(),
        SearchMode::Sampled { runs, seed } => format!("sampled, {runs} runs per assignment, seed {seed}"),
    };
    writeln!(out, "algorithm       {}", r.algorithm).unwrap();
    writeln!(out, "spec            {}", r.spec).unwrap();
    writeln!(out, "claimed         {}", r.claimed).unwrap();
    writeln!(out, "search          {search}; {} input assignments; crash budget {}", r.input_assignments, r.crash_budget).unwrap();
    writeln!(out, "complete        {}", r.complete).unwrap();
    writeln!(out, "executions      {} ({} states)", r.executions_checked, r.states_visited).unwrap();
    writeln!(out, "violations      {}", r.violations_total).unwrap();
    writeln!(out, "empirical k     {} (with undecided {})", opt(r.empirical_k), opt(r.empirical_k_with_undecided)).unwrap();
    writeln!(out, "empirical ell   {}", r.empirical_ell).unwrap();
    writeln!(
        out,
        "flags           {} unsound, {} stuck, {} oracle non-compliant",
        r.soundness_violations, r.resiliency_violations, r.oracle_noncompliant
    )
    .unwrap();
    for note in &r.notes {
        writeln!(out, "note            {note}").unwrap();
    }
    for v in &r.violations {
        writeln!(out, "violation       inputs {}: {}", value_list(&v.inputs), verdict_line(&v.verdict, &r.spec)).unwrap();
        writeln!(out, "  replay        {}", v.replay).unwrap();
    }
    writeln!(out, "replay          {}", r.replay).unwrap();
    let status = if r.violations_total > 0 {
        "FAIL"
    } else if !r.complete {
        "INCOMPLETE"
    } else if r.search != SearchMode::Exhaustive {
        "PASS (sampled)"
    } else {
        "PASS"
    };
    writeln!(out, "result          {status}").unwrap();
    out
}
