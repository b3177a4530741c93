use proptest::prelude::*;

use partial_agreement::algorithms::{MaxWait, MinFlood, NoComm, QuorumPolicy, SmgComposition, TwoPhase};
use partial_agreement::bounds::{find, overall_necessary};
use partial_agreement::objects::{is_compliant, OracleSpec, OracleStrategy, PartialAgreementOracle};
use partial_agreement::shmem::{run_async, AsyncSchedule, RunOptions};
use partial_agreement::sync::{run_sync, CrashPattern};
use partial_agreement::verify::{Replay, Snapshot};
use partial_agreement::{
    check_agreement, evaluate_bounds, explore, AlgorithmId, ExploreConfig, Model, ProblemSpec, Row, Validity, ValueId,
};

fn spec_strategy() -> impl Strategy<Value = ProblemSpec> {
    (2usize..=16, 2u32..=6)
        .prop_flat_map(|(n, m)| (Just(n), Just(m), 0..=n, 1..=n, 1..=m))
        .prop_map(|(n, m, t, k, ell)| ProblemSpec::new(n, m, t, k).with_ell(ell))
}

fn inputs_strategy(n: usize, m: u32) -> impl Strategy<Value = Vec<ValueId>> {
    proptest::collection::vec((0..m).prop_map(ValueId), n)
}

/// A schedule prefix plus at most `t` crash placements.
fn schedule_strategy(n: usize, t: usize) -> impl Strategy<Value = AsyncSchedule> {
    (
        proptest::collection::vec(0..n, 0..6 * n * n),
        proptest::collection::vec((0..n, 0..6 * n * n), 0..=t),
    )
        .prop_map(|(steps, crashes)| {
            let mut schedule = AsyncSchedule::new(steps);
            for (pid, position) in crashes {
                if schedule.crash_position(pid).is_none() {
                    schedule.steps = schedule
                        .steps
                        .iter()
                        .enumerate()
                        .filter(|&(i, &p)| p != pid || i < position)
                        .map(|(_, &p)| p)
                        .collect();
                    let at = position.min(schedule.steps.len());
                    schedule = schedule.with_crash(pid, at);
                }
            }
            schedule
        })
}

proptest! {
    #[test]
    fn bounds_are_pure_and_consistent(spec in spec_strategy()) {
        let rows = evaluate_bounds(&spec).unwrap();
        prop_assert_eq!(&rows, &evaluate_bounds(&spec).unwrap());
        let d = spec.effective_values();
        if spec.t >= 1 {
            if spec.n % d == 0 {
                let r4 = find(&rows, Row::R4).unwrap();
                prop_assert_eq!(r4.sufficient_k, Some(spec.n / d));
                prop_assert_eq!(r4.necessary_k, Some(spec.n / d));
            }
            let r5 = find(&rows, Row::R5).unwrap();
            let (suff, nec) = (r5.sufficient_k.unwrap(), r5.necessary_k.unwrap());
            let gap = spec.n % d - usize::from(spec.n % d != 0);
            prop_assert_eq!(nec - suff, gap);
            prop_assert_eq!(nec == suff, spec.n % d <= 1);
            if spec.m == 2 {
                prop_assert!(find(&rows, Row::R3).unwrap().necessary_k.unwrap() <= nec);
            }
            let least = rows.iter().filter_map(|r| r.best_necessary()).min();
            prop_assert_eq!(overall_necessary(&rows), least);
        } else {
            prop_assert!(rows.iter().all(|r| r.necessary_k.is_none()));
        }
    }

    #[test]
    fn sm_g_rows_match_their_models(n in 2usize..=12, t_raw in 0usize..=12, g_raw in 1usize..=12) {
        let (t, g) = (t_raw.min(n), g_raw.min(n));
        let spec = ProblemSpec::new(n, 2, t, 1).with_model(Model::SmG { g });
        let rows = evaluate_bounds(&spec).unwrap();
        prop_assert!(rows.iter().all(|r| matches!(r.row, Row::R8 | Row::R9 | Row::R10)));
        if let Some(r10) = find(&rows, Row::R10) {
            prop_assert_eq!(r10.sufficient_k, Some(3 * n / 4));
            prop_assert!(2 * g == n && 2 * t == n && n % 4 == 0);
        }
    }

    #[test]
    fn verdicts_are_monotone_in_k(
        (n, m, decisions, inputs) in (2usize..=7, 2u32..=4).prop_flat_map(|(n, m)| (
            Just(n),
            Just(m),
            proptest::collection::vec(proptest::option::of((0..m).prop_map(ValueId)), n),
            inputs_strategy(n, m),
        )),
        ell in 1u32..=4,
    ) {
        let ell = ell.min(m);
        let snap = Snapshot {
            crashed: (0..n).filter(|&p| decisions[p].is_none()).collect(),
            inputs,
            decisions,
            unsound: Vec::new(),
            stuck: false,
        };
        let mut passed_before = true;
        for k in 1..=n {
            let v = check_agreement(&snap, &ProblemSpec::new(n, m, n, k).with_ell(ell)).unwrap();
            prop_assert!(passed_before || !v.agreement_ok, "passes at k={} after failing below", k);
            passed_before = v.agreement_ok;
            prop_assert!(v.witness_set.len() <= ell as usize);
            prop_assert_eq!(v.decision_counts.iter().sum::<usize>() + v.undecided, n);
        }
    }

    #[test]
    fn async_runs_are_deterministic_and_model_faithful(
        (n, inputs, schedule) in (2usize..=5).prop_flat_map(|n| (Just(n), inputs_strategy(n, 3), schedule_strategy(n, 1))),
    ) {
        let options = RunOptions::new(1);
        let max_wait = MaxWait::new(n, n - 1);
        let a = run_async(&max_wait, &inputs, &schedule, &options).unwrap();
        prop_assert_eq!(&a, &run_async(&max_wait, &inputs, &schedule, &options).unwrap());
        prop_assert!(a.single_writer_holds());
        prop_assert!(a.crash_silent());
        prop_assert!(a.decisions.iter().flatten().all(|d| inputs.contains(d)));
        prop_assert!(!a.resiliency_violation);

        let local = run_async(&NoComm, &inputs, &schedule, &options).unwrap();
        for (decision, &input) in local.decisions.iter().zip(&inputs) {
            prop_assert!(decision.is_none_or(|d| d == input));
        }
    }

    #[test]
    fn consensus_objects_linearize(
        (n, g, inputs, schedule) in (2usize..=6).prop_flat_map(|n| (Just(n), 1..=n, inputs_strategy(n, 2), schedule_strategy(n, n))),
    ) {
        let trace = run_async(&SmgComposition::new(n, g), &inputs, &schedule, &RunOptions::new(n)).unwrap();
        prop_assert!(trace.linearizable());
        prop_assert!(!trace.resiliency_violation, "wait-free survivors always decide");
    }

    #[test]
    fn reduction_oracles_stay_compliant(
        (n, inputs, schedule, strategy) in (2usize..=5).prop_flat_map(|n| (
            Just(n),
            inputs_strategy(n, 2),
            schedule_strategy(n, 1),
            prop_oneof![
                Just(OracleStrategy::WorstCaseSplit),
                Just(OracleStrategy::PluralityExactK),
                Just(OracleStrategy::HonestFullAgreement),
            ],
        )),
    ) {
        let behavior = TwoPhase::binary(n, QuorumPolicy::Exact);
        let trace = run_async(&behavior, &inputs, &schedule, &RunOptions::new(1).with_oracle(strategy)).unwrap();
        let answers = trace.oracle_decisions.clone().unwrap();
        prop_assert!(is_compliant(&behavior.oracle, &inputs, &answers));
        let verdict = check_agreement(&trace, &ProblemSpec::new(n, 2, 1, n)).unwrap();
        prop_assert!(verdict.agreement_ok && verdict.soundness_ok);
    }

    #[test]
    fn oracle_strategies_are_compliant(
        (n, m, proposals) in (2usize..=7, 2u32..=4).prop_flat_map(|(n, m)| (Just(n), Just(m), inputs_strategy(n, m))),
        k_raw in 1usize..=7,
        ell_raw in 1u32..=4,
        strong in any::<bool>(),
    ) {
        let spec = OracleSpec {
            n,
            m,
            k: k_raw.min(n),
            ell: ell_raw.min(m),
            validity: if strong { Validity::Strong } else { Validity::Weak },
        };
        for strategy in [OracleStrategy::WorstCaseSplit, OracleStrategy::PluralityExactK, OracleStrategy::HonestFullAgreement] {
            let mut oracle = PartialAgreementOracle::new(spec, strategy);
            let answers: Vec<Option<ValueId>> = proposals.iter().enumerate().map(|(p, &v)| oracle.propose(p, v).ok()).collect();
            prop_assert!(answers.iter().all(Option::is_some));
            prop_assert!(is_compliant(&spec, &proposals, &answers));
        }
    }

    #[test]
    fn min_flood_preferences_never_increase(
        (n, inputs, victims) in (2usize..=6).prop_flat_map(|n| (
            Just(n),
            inputs_strategy(n, 4),
            proptest::collection::vec((0..n, 1u32..=3, proptest::collection::vec(0..n, 0..n)), 0..n),
        )),
    ) {
        let rounds = 3;
        let mut pattern = CrashPattern::none();
        for (pid, round, reached) in victims.into_iter().take(n - 1) {
            pattern = pattern.with_crash(pid, round, reached);
        }
        let t = n - 1;
        let trace = run_sync(&MinFlood::new(n, rounds), &inputs, &pattern, rounds, t, &OracleStrategy::default()).unwrap();
        let mut previous: Vec<Option<ValueId>> = inputs.iter().copied().map(Some).collect();
        for record in &trace.rounds {
            for (&before, &after) in previous.iter().zip(&record.preferences) {
                if let (Some(before), Some(after)) = (before, after) {
                    prop_assert!(after <= before);
                }
            }
            previous = record.preferences.clone();
        }
        if trace.crashed.is_empty() {
            let min = *inputs.iter().min().unwrap();
            prop_assert!(trace.rounds[0].preferences.iter().all(|&v| v == Some(min)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seeded_explorations_replay(seed in any::<u64>(), pick in 0usize..4) {
        let (algorithm, spec) = [
            (AlgorithmId::MaxWait, ProblemSpec::new(4, 3, 1, 2)),
            (AlgorithmId::ReduceSet, ProblemSpec::new(4, 3, 2, 4).with_ell(2).with_validity(Validity::Strong)),
            (AlgorithmId::ReduceSync, ProblemSpec::new(4, 2, 1, 4).with_model(Model::SyncMp)),
            (AlgorithmId::SmgComp, ProblemSpec::new(5, 2, 5, 3).with_model(Model::SmG { g: 2 })),
        ][pick];
        let first = explore(&ExploreConfig::new(algorithm, spec).sampled(3, seed)).unwrap();
        let Replay::Explore(config) = Replay::decode(&first.replay).unwrap() else {
            panic!("exploration replay expected");
        };
        prop_assert_eq!(first.to_json(), explore(&config).unwrap().to_json());
    }
}
