//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary so the lines always reach the output.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use partial_agreement::bounds::Row;
use partial_agreement::verify::{all_assignments, check_agreement, explore, Budget, ExplorationReport, ExploreConfig, Replay, Snapshot};
use partial_agreement::{evaluate_bounds, AlgorithmId, AlgorithmParams, Model, ProblemSpec, Validity, ValueId};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cdiv(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

fn budget(exhaustive_n: usize) -> Budget {
    Budget {
        exhaustive_n,
        max_states: 50_000_000,
        ..Budget::default()
    }
}

fn run(config: ExploreConfig) -> Result<ExplorationReport, String> {
    explore(&config).map_err(|e| format!("{}: {e}", config.algorithm))
}

fn exhaustive(algorithm: AlgorithmId, spec: ProblemSpec) -> Result<ExplorationReport, String> {
    let report = run(ExploreConfig::new(algorithm, spec).with_budget(budget(spec.n)))?;
    ensure!(report.complete, "{algorithm} {spec:?}: state budget exhausted");
    Ok(report)
}

// ---------------------------------------------------------------------------
// 1. bound calculator against a re-derivation of every row

/// `(sufficient, necessary, refined necessary, rounds lower, rounds upper)`
type Thresholds = (Option<usize>, Option<usize>, Option<usize>, Option<usize>, Option<usize>);

fn expected_rows(spec: &ProblemSpec) -> BTreeMap<Row, Thresholds> {
    let (n, m, t, k) = (spec.n, spec.m as usize, spec.t, spec.k);
    let d = if t + 1 < m { t + 1 } else { m };
    let mut rows = BTreeMap::new();
    let nec = |x: usize| if t >= 1 { Some(x) } else { None };
    match spec.model {
        Model::AsyncRw => {
            let majority = n - n / 2;
            if m == 2 {
                rows.insert(Row::R1, (Some(majority), nec(majority), None, None, None));
            }
            if t == 1 {
                rows.insert(Row::R2, (Some(majority), Some(majority), None, None, None));
            }
            if t >= 1 {
                rows.insert(Row::R3, (None, Some(majority), None, None, None));
            }
            if n % d == 0 {
                rows.insert(Row::R4, (Some(n / d), nec(n / d), None, None, None));
            }
            let refined = if t >= 1 {
                (2..=d).map(|l| n / l + n % l).min()
            } else {
                None
            };
            rows.insert(Row::R5, (Some(cdiv(n, d)), nec(n / d + n % d), refined, None, None));
        }
        Model::SyncMp => {
            if t >= 1 && t <= n - 2 && k >= cdiv(n + t + 1, 2) {
                rows.insert(Row::R6, (None, None, None, Some(t), None));
            }
            let ell = spec.ell as usize;
            rows.insert(Row::R7, (Some(cdiv(n, ell)), None, None, None, Some(t / ell + 1)));
        }
        Model::SmG { g } => {
            if t >= 1 && g == t && t < n {
                rows.insert(Row::R8, (None, Some(cdiv(n + t - 1, 2)), None, None, None));
            }
            if n >= 4 {
                let g_hat = if g < n / 2 { g } else { n / 2 };
                let composed = std::cmp::max(g, 3 * (g_hat / 2));
                rows.insert(Row::R9, (Some(std::cmp::max(composed, cdiv(n, d))), None, None, None, None));
            }
            if n % 4 == 0 && 2 * g == n && 2 * t == n {
                rows.insert(Row::R10, (Some(3 * n / 4), Some(3 * n / 4), None, None, None));
            }
        }
    }
    rows
}

fn criterion_1() -> Outcome {
    let mut specs = 0;
    for n in 2..=12usize {
        for m in 2..=4u32 {
            for t in 1..=4usize.min(n) {
                let mut models = vec![Model::AsyncRw, Model::SyncMp];
                models.extend((1..=6usize.min(n)).map(|g| Model::SmG { g }));
                for model in models {
                    for ell in 1..=m {
                        for k in [1, cdiv(n + t + 1, 2).min(n), n] {
                            let spec = ProblemSpec::new(n, m, t, k).with_ell(ell).with_model(model);
                            let got: BTreeMap<Row, Thresholds> = evaluate_bounds(&spec)
                                .map_err(|e| format!("{spec:?}: {e}"))?
                                .into_iter()
                                .map(|r| (r.row, (r.sufficient_k, r.necessary_k, r.refined_necessary_k, r.rounds_lower, r.rounds_upper)))
                                .collect();
                            let want = expected_rows(&spec);
                            ensure!(got == want, "{spec:?}: got {got:?}, want {want:?}");
                            specs += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{specs} specs match"))
}

// ---------------------------------------------------------------------------
// 2-4. read/write algorithms

fn criterion_2() -> Outcome {
    let mut detail = Vec::new();
    for n in 2..=6usize {
        let k = cdiv(n, 2);
        let ok = exhaustive(AlgorithmId::NoComm, ProblemSpec::new(n, 2, 1, k))?;
        ensure!(ok.violations_total == 0, "n={n} k={k}: {} violations", ok.violations_total);
        if k < n {
            let bad = exhaustive(AlgorithmId::NoComm, ProblemSpec::new(n, 2, 1, k + 1))?;
            ensure!(bad.violations_total > 0, "n={n} k={}: no counterexample", k + 1);
        }
        detail.push(format!("n={n}:{}", ok.executions_checked));
    }
    Ok(format!("executions {}", detail.join(" ")))
}

fn criterion_3() -> Outcome {
    let mut executions = 0;
    for n in [3usize, 4] {
        for m in [3u32, 4] {
            let k = cdiv(n, 2);
            let spec = ProblemSpec::new(n, m, 1, k);
            let params = AlgorithmParams {
                q: Some(n - 1),
                ..AlgorithmParams::default()
            };
            let r = run(ExploreConfig::new(AlgorithmId::MaxWait, spec).with_params(params))?;
            ensure!(r.complete, "n={n} m={m}: incomplete");
            ensure!(r.violations_total == 0, "n={n} m={m}: {} violations", r.violations_total);
            ensure!(r.empirical_ell <= 2, "n={n} m={m}: {} distinct decisions", r.empirical_ell);
            executions += r.executions_checked;
        }
    }
    Ok(format!("{executions} executions, at most 2 values decided"))
}

fn criterion_4() -> Outcome {
    let mut executions = 0;
    for t in 1..=3usize {
        let k = cdiv(4, t + 1);
        let r = exhaustive(AlgorithmId::MaxWait, ProblemSpec::new(4, 4, t, k))?;
        ensure!(r.violations_total == 0, "t={t} k={k}: {} violations", r.violations_total);
        ensure!(r.empirical_ell <= t + 1, "t={t}: {} distinct decisions", r.empirical_ell);
        executions += r.executions_checked;
    }
    let r = exhaustive(AlgorithmId::NoComm, ProblemSpec::new(6, 3, 3, 2))?;
    ensure!(r.empirical_k == Some(2), "no-comm n=6 m=3: empirical_k {:?}", r.empirical_k);
    Ok(format!("{executions} max-wait executions; no-comm empirical_k = 2"))
}

// ---------------------------------------------------------------------------
// 5. synchronous round bound

fn flood(n: usize, t: usize, ell: u32, rounds: u32) -> Result<ExplorationReport, String> {
    let m = n as u32;
    let spec = ProblemSpec::new(n, m, t, n).with_ell(ell).with_model(Model::SyncMp);
    let params = AlgorithmParams {
        rounds: Some(rounds),
        ..AlgorithmParams::default()
    };
    let r = run(ExploreConfig::new(AlgorithmId::MinFlood, spec).with_params(params).with_budget(budget(n)))?;
    ensure!(r.complete, "n={n} t={t}: incomplete");
    Ok(r)
}

fn criterion_5() -> Outcome {
    let mut configs = 0;
    for n in [3usize, 4] {
        for t in 1..=3usize {
            for ell in [1u32, 2] {
                let rounds = t as u32 / ell + 1;
                let r = flood(n, t, ell, rounds)?;
                ensure!(
                    r.violations_total == 0 && r.empirical_ell <= ell as usize,
                    "n={n} t={t} ell={ell}: {} distinct, {} violations",
                    r.empirical_ell,
                    r.violations_total
                );
                configs += 1;
            }
        }
    }
    let control = flood(3, 1, 1, 1)?;
    ensure!(control.empirical_ell > 1, "negative control found no disagreement");
    Ok(format!("{configs} configurations within ell; control exceeds ell with one round short"))
}

// ---------------------------------------------------------------------------
// 6. consensus-object composition

/// Inputs up to permutations of pids that share a role: each pair
/// `{2i, 2i+1}` plays one role for `n = 8, g = 4`.
fn role_representatives() -> Vec<Vec<ValueId>> {
    all_assignments(8, 2)
        .into_iter()
        .filter(|a| a.chunks(2).all(|pair| pair[0] <= pair[1]))
        .collect()
}

fn criterion_6() -> Outcome {
    let spec = ProblemSpec::new(8, 2, 8, 6).with_model(Model::SmG { g: 4 });
    let inputs = role_representatives();
    let classes = inputs.len();
    let config = ExploreConfig::new(AlgorithmId::SmgComp, spec)
        .with_inputs(inputs)
        .with_budget(budget(8));
    let r = run(config)?;
    ensure!(r.complete, "n=8: incomplete");
    ensure!(r.violations_total == 0, "n=8: {} violations", r.violations_total);
    ensure!(
        r.empirical_k_with_undecided.is_some_and(|k| k >= 6),
        "n=8: plurality with undecided {:?}",
        r.empirical_k_with_undecided
    );
    let small = exhaustive(AlgorithmId::SmgComp, ProblemSpec::new(4, 2, 4, 4).with_model(Model::SmG { g: 4 }))?;
    ensure!(
        small.violations_total == 0 && small.empirical_ell <= 1,
        "n=4 g=4: {} violations, {} values",
        small.violations_total,
        small.empirical_ell
    );
    Ok(format!(
        "{} executions over {classes} input classes, min plurality with undecided {}",
        r.executions_checked,
        r.empirical_k_with_undecided.unwrap_or(0)
    ))
}

// ---------------------------------------------------------------------------
// 7. reductions against every compliant oracle

/// One input vector per rotation class. Every async reduction scans
/// cyclically from its own pid and the oracle contract ignores pids.
fn necklaces(n: usize, m: u32) -> Vec<Vec<ValueId>> {
    all_assignments(n, m)
        .into_iter()
        .filter(|a| {
            (1..n).all(|r| {
                let rotated: Vec<ValueId> = a[r..].iter().chain(&a[..r]).copied().collect();
                *a <= rotated
            })
        })
        .collect()
}

fn full_agreement(r: &ExplorationReport, what: &str) -> Result<(), String> {
    ensure!(r.complete, "{what}: incomplete");
    ensure!(r.violations_total == 0, "{what}: {} violations", r.violations_total);
    ensure!(r.soundness_violations == 0, "{what}: {} soundness flags", r.soundness_violations);
    ensure!(r.oracle_noncompliant == 0, "{what}: non-compliant oracle path");
    ensure!(r.empirical_ell <= 1, "{what}: {} values decided", r.empirical_ell);
    Ok(())
}

fn reduction(algorithm: AlgorithmId, n: usize, t: usize, executions: &mut u64) -> Result<(), String> {
    let spec = ProblemSpec::new(n, 2, t, n);
    let mut config = ExploreConfig::new(algorithm, spec).with_budget(budget(n));
    if n >= 5 && algorithm != AlgorithmId::ReduceSync {
        config = config.with_inputs(necklaces(n, 2));
    }
    let r = run(config)?;
    full_agreement(&r, &format!("{algorithm} n={n} t={t}"))?;
    *executions += r.executions_checked;
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut executions = 0;
    for n in 2..=5usize {
        reduction(AlgorithmId::ReduceBinary, n, 1, &mut executions)?;
        for t in 1..n {
            reduction(AlgorithmId::ReduceSmg, n, t, &mut executions)?;
            reduction(AlgorithmId::ReduceSync, n, t, &mut executions)?;
        }
    }
    let set_spec = |n: usize, m: u32| {
        ProblemSpec::new(n, m, m as usize - 1, n)
            .with_ell(m - 1)
            .with_validity(Validity::Strong)
    };
    let r = exhaustive(AlgorithmId::ReduceSet, set_spec(4, 2))?;
    ensure!(
        r.violations_total == 0 && r.soundness_violations == 0 && r.empirical_ell <= 1,
        "reduce-set n=4 m=2: {} violations, {} values",
        r.violations_total,
        r.empirical_ell
    );
    executions += r.executions_checked;
    for (m, runs) in [(2u32, 200), (3, 40)] {
        let r = run(ExploreConfig::new(AlgorithmId::ReduceSet, set_spec(6, m)).sampled(runs, 7))?;
        ensure!(
            r.violations_total == 0 && r.soundness_violations == 0 && r.empirical_ell < m as usize,
            "reduce-set n=6 m={m}: {} violations, {} values",
            r.violations_total,
            r.empirical_ell
        );
        executions += r.executions_checked;
    }
    Ok(format!("{executions} executions, zero soundness flags"))
}

// ---------------------------------------------------------------------------
// 8. witness selection against brute force

fn brute_offenders(decisions: &[Option<ValueId>], proposed: &[bool], ell: usize) -> usize {
    let m = proposed.len();
    (0u32..1 << m)
        .filter(|set| set.count_ones() as usize <= ell && (0..m).all(|v| set >> v & 1 == 0 || proposed[v]))
        .map(|set| decisions.iter().flatten().filter(|v| set >> v.0 & 1 == 0).count())
        .min()
        .expect("the empty set qualifies")
}

fn criterion_8() -> Outcome {
    let mut cases = 0u64;
    for n in 2..=5usize {
        for m in 2..=4u32 {
            // one input vector per nonempty proposed set
            let proposals: Vec<Vec<ValueId>> = (1u32..1 << m)
                .filter(|set| set.count_ones() as usize <= n)
                .map(|set| {
                    let present: Vec<ValueId> = (0..m).filter(|v| set >> v & 1 == 1).map(ValueId).collect();
                    (0..n).map(|p| present[p % present.len()]).collect()
                })
                .collect();
            for decided in all_assignments(n, m + 1) {
                let decisions: Vec<Option<ValueId>> =
                    decided.iter().map(|v| if v.0 == m { None } else { Some(*v) }).collect();
                let crashed: Vec<usize> = (0..n).filter(|&p| decisions[p].is_none()).collect();
                for inputs in &proposals {
                    let proposed: Vec<bool> = (0..m).map(|v| inputs.contains(&ValueId(v))).collect();
                    for ell in 1..=m {
                        let best = brute_offenders(&decisions, &proposed, ell as usize);
                        for k in 1..=n {
                            let spec = ProblemSpec::new(n, m, n, k).with_ell(ell);
                            let snap = Snapshot {
                                inputs: inputs.clone(),
                                decisions: decisions.clone(),
                                crashed: crashed.clone(),
                                unsound: Vec::new(),
                                stuck: false,
                            };
                            let v = check_agreement(&snap, &spec).map_err(|e| e.to_string())?;
                            let set_offenders = decisions.iter().flatten().filter(|d| !v.witness_set.contains(d)).count();
                            ensure!(
                                v.offenders == best
                                    && set_offenders == best
                                    && v.witness_set.len() <= ell as usize
                                    && v.witness_set.iter().all(|w| proposed[w.index()])
                                    && v.agreement_ok == (best <= n - k),
                                "decisions {decisions:?} inputs {inputs:?} ell={ell} k={k}: {v:?}, brute {best}"
                            );
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} cases"))
}

// ---------------------------------------------------------------------------
// 9. deterministic replay

fn criterion_9() -> Outcome {
    let catalog: [(AlgorithmId, ProblemSpec); 6] = [
        (AlgorithmId::NoComm, ProblemSpec::new(5, 2, 1, 3)),
        (AlgorithmId::MaxWait, ProblemSpec::new(4, 3, 1, 2)),
        (AlgorithmId::MinFlood, ProblemSpec::new(4, 3, 2, 4).with_model(Model::SyncMp)),
        (AlgorithmId::SmgComp, ProblemSpec::new(6, 2, 6, 4).with_model(Model::SmG { g: 3 })),
        (AlgorithmId::ReduceBinary, ProblemSpec::new(4, 2, 1, 4)),
        (AlgorithmId::ReduceSync, ProblemSpec::new(4, 2, 2, 4)),
    ];
    for seed in 0..100u64 {
        let (algorithm, spec) = catalog[seed as usize % catalog.len()];
        let first = run(ExploreConfig::new(algorithm, spec).sampled(5, seed))?;
        let Replay::Explore(config) = Replay::decode(&first.replay).map_err(|e| e.to_string())? else {
            return Err(format!("seed {seed}: report replay is not an exploration"));
        };
        let again = run(config)?;
        ensure!(first.to_json() == again.to_json(), "seed {seed} ({algorithm}): reports differ");
    }
    Ok("100 reports reproduced byte for byte".into())
}

fn main() -> ExitCode {
    let criteria: [(u8, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id}: PASS ({detail}; {secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL ({why}; {secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
