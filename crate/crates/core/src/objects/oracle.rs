//! Spec-compliant stand-ins for the hypothetical partial-agreement algorithm
//! that the reductions consume as a black box.
//!
//! An oracle answers each `propose` immediately. Every answer is checked
//! against the `(n, k, ell)` agreement contract: after it, there must still
//! be a witness set of at most `ell` proposed values with at most `n - k`
//! decided processes outside it. Later proposers can always be handed a
//! witness value, and processes that never propose count toward `k`, so a
//! run that respects this check is compliant on every completion.

use smallvec::{smallvec, SmallVec};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::types::{Pid, Validity, ValueId};
use crate::witness::{best_witness, mask, tally};

/// The contract an oracle honours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleSpec {
    pub n: usize,
    pub m: u32,
    pub k: usize,
    pub ell: u32,
    pub validity: Validity,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum OracleStrategy {
    /// Maximise disagreement: spread decisions as evenly as the contract
    /// allows.
    #[default]
    WorstCaseSplit,
    /// Exactly `k` processes get the most proposed value when proposals are
    /// known up front; otherwise keep each process's own proposal when
    /// allowed.
    PluralityExactK,
    /// Everybody gets the first proposal.
    HonestFullAgreement,
    /// The i-th access gets `responses[i]`.
    Scripted { responses: Vec<ValueId> },
}

impl OracleStrategy {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "worst-case-split" => Some(OracleStrategy::WorstCaseSplit),
            "plurality-exact-k" => Some(OracleStrategy::PluralityExactK),
            "honest-full-agreement" | "honest" => Some(OracleStrategy::HonestFullAgreement),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialAgreementOracle {
    spec: OracleSpec,
    strategy: OracleStrategy,
    proposals: SmallVec<[Option<ValueId>; 8]>,
    decisions: SmallVec<[Option<ValueId>; 8]>,
    plan: Option<Vec<ValueId>>,
    accesses: usize,
}

impl PartialAgreementOracle {
    pub fn new(spec: OracleSpec, strategy: OracleStrategy) -> Self {
        PartialAgreementOracle {
            spec,
            strategy,
            proposals: smallvec![None; spec.n],
            decisions: smallvec![None; spec.n],
            plan: None,
            accesses: 0,
        }
    }

    /// Lets the oracle plan its assignment from the full proposal vector.
    /// A planned answer is only used while it remains admissible.
    pub fn with_known_proposals(mut self, proposals: &[ValueId]) -> Self {
        self.plan = match self.strategy {
            OracleStrategy::WorstCaseSplit => Some(worst_case_plan(&self.spec, proposals)),
            OracleStrategy::PluralityExactK => Some(plurality_plan(&self.spec, proposals)),
            _ => None,
        };
        self
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn strategy(&self) -> &OracleStrategy {
        &self.strategy
    }

    pub fn decisions(&self) -> &[Option<ValueId>] {
        &self.decisions
    }

    pub fn proposals(&self) -> &[Option<ValueId>] {
        &self.proposals
    }

    pub fn accesses(&self) -> usize {
        self.accesses
    }

    fn check_fresh(&self, pid: Pid) -> Result<(), ModelError> {
        if pid >= self.spec.n {
            return Err(ModelError::UnknownProcess { pid, n: self.spec.n });
        }
        if self.proposals[pid].is_some() {
            return Err(ModelError::DoublePropose {
                object: "oracle".into(),
                pid,
            });
        }
        Ok(())
    }

    fn admits(&self, pid: Pid, value: ValueId, response: ValueId) -> bool {
        let m = self.spec.m as usize;
        if response.0 >= self.spec.m {
            return false;
        }
        let proposed = mask(
            m,
            self.proposals.iter().flatten().copied().chain([value]),
        );
        if self.spec.validity == Validity::Strong && !proposed[response.index()] {
            return false;
        }
        let decided = self
            .decisions
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != pid)
            .filter_map(|(_, d)| *d)
            .chain([response]);
        let counts = tally(m, decided);
        best_witness(&counts, &proposed, self.spec.ell as usize).offenders <= self.spec.n - self.spec.k
    }

    /// Every answer the contract allows for `pid` proposing `value` now.
    pub fn admissible_responses(&self, pid: Pid, value: ValueId) -> Result<Vec<ValueId>, ModelError> {
        self.check_fresh(pid)?;
        Ok((0..self.spec.m)
            .map(ValueId)
            .filter(|&r| self.admits(pid, value, r))
            .collect())
    }

    /// Records `pid`'s proposal with a caller-chosen answer.
    pub fn commit(&mut self, pid: Pid, value: ValueId, response: ValueId) -> Result<ValueId, ModelError> {
        self.check_fresh(pid)?;
        if !self.admits(pid, value, response) {
            return Err(ModelError::OracleNonCompliant {
                pid,
                response: response.0,
            });
        }
        self.proposals[pid] = Some(value);
        self.decisions[pid] = Some(response);
        self.accesses += 1;
        Ok(response)
    }

    /// Answers according to the configured strategy.
    pub fn propose(&mut self, pid: Pid, value: ValueId) -> Result<ValueId, ModelError> {
        let response = self.choose(pid, value)?;
        self.commit(pid, value, response)
    }

    fn choose(&self, pid: Pid, value: ValueId) -> Result<ValueId, ModelError> {
        if let OracleStrategy::Scripted { responses } = &self.strategy {
            return responses
                .get(self.accesses)
                .copied()
                .ok_or(ModelError::OracleExhausted { pid });
        }
        let admissible = self.admissible_responses(pid, value)?;
        let first = *admissible.first().ok_or(ModelError::OracleExhausted { pid })?;
        let allowed = |v: ValueId| admissible.contains(&v);
        if let Some(plan) = &self.plan {
            if allowed(plan[pid]) {
                return Ok(plan[pid]);
            }
        }
        let m = self.spec.m as usize;
        let proposed: Vec<ValueId> = self.proposals.iter().flatten().copied().chain([value]).collect();
        Ok(match self.strategy {
            OracleStrategy::HonestFullAgreement => {
                let winner = self.winner().unwrap_or(value);
                if allowed(winner) {
                    winner
                } else {
                    first
                }
            }
            OracleStrategy::WorstCaseSplit => {
                let counts = tally(m, self.decisions.iter().flatten().copied());
                let proposed = mask(m, proposed);
                admissible
                    .iter()
                    .copied()
                    .filter(|v| proposed[v.index()])
                    .min_by_key(|v| (counts[v.index()], *v))
                    .unwrap_or(first)
            }
            OracleStrategy::PluralityExactK => {
                if allowed(value) {
                    value
                } else {
                    let p = plurality(m, &proposed);
                    if allowed(p) {
                        p
                    } else {
                        first
                    }
                }
            }
            OracleStrategy::Scripted { .. } => unreachable!(),
        })
    }

    /// Every honest answer equals the first one, so any recorded answer is
    /// the winner.
    fn winner(&self) -> Option<ValueId> {
        self.decisions.iter().flatten().next().copied()
    }
}

fn plurality(m: usize, values: &[ValueId]) -> ValueId {
    let counts = tally(m, values.iter().copied());
    (0..m)
        .max_by_key(|&v| (counts[v], std::cmp::Reverse(v)))
        .map(|v| ValueId(v as u32))
        .unwrap_or_default()
}

fn distinct_sorted(values: &[ValueId]) -> Vec<ValueId> {
    let mut d = values.to_vec();
    d.sort();
    d.dedup();
    d
}

fn subsets_of_size<T: Copy>(items: &[T], size: usize) -> Vec<Vec<T>> {
    fn go<T: Copy>(items: &[T], size: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Exactly `k` processes decide inside a witness set `W` and the remaining
/// `n - k` are spread evenly over the other proposed values. Among candidate
/// sets, the one needing the fewest processes to abandon their own proposal
/// wins; ties go to the lexicographically smallest set.
fn worst_case_plan(spec: &OracleSpec, proposals: &[ValueId]) -> Vec<ValueId> {
    let distinct = distinct_sorted(proposals);
    let ell = spec.ell as usize;
    if distinct.len() <= ell {
        return proposals.to_vec();
    }
    let outside_total = spec.n - spec.k;
    let mut best: Option<(usize, Vec<ValueId>)> = None;
    for witness in subsets_of_size(&distinct, ell) {
        let others: Vec<ValueId> = distinct.iter().copied().filter(|v| !witness.contains(v)).collect();
        let mut quota: Vec<usize> = (0..others.len())
            .map(|i| outside_total / others.len() + usize::from(i < outside_total % others.len()))
            .collect();
        let mut plan: Vec<Option<ValueId>> = vec![None; proposals.len()];
        for (pid, v) in proposals.iter().enumerate() {
            if let Some(i) = others.iter().position(|o| o == v) {
                if quota[i] > 0 {
                    quota[i] -= 1;
                    plan[pid] = Some(*v);
                }
            }
        }
        // fill remaining outside slots from processes proposing witness values,
        // highest pid first so low pids keep the witness
        for (i, q) in quota.iter_mut().enumerate() {
            for pid in (0..proposals.len()).rev() {
                if *q == 0 {
                    break;
                }
                if plan[pid].is_none() {
                    plan[pid] = Some(others[i]);
                    *q -= 1;
                }
            }
        }
        let plan: Vec<ValueId> = plan
            .into_iter()
            .zip(proposals)
            .map(|(p, own)| p.unwrap_or(if witness.contains(own) { *own } else { witness[0] }))
            .collect();
        let changes = plan.iter().zip(proposals).filter(|(a, b)| a != b).count();
        if best.as_ref().is_none_or(|(c, _)| changes < *c) {
            best = Some((changes, plan));
        }
    }
    best.map(|(_, p)| p).unwrap_or_else(|| proposals.to_vec())
}

/// The most proposed value goes to exactly `k` processes (its own proposers
/// first); everyone else keeps their proposal, or takes the smallest other
/// proposed value when their own is the plurality value.
fn plurality_plan(spec: &OracleSpec, proposals: &[ValueId]) -> Vec<ValueId> {
    let m = spec.m as usize;
    let winner = plurality(m, proposals);
    let other = distinct_sorted(proposals).into_iter().find(|&v| v != winner);
    let mut plan: Vec<Option<ValueId>> = vec![None; proposals.len()];
    let mut assigned = 0;
    for (pid, &v) in proposals.iter().enumerate() {
        if v == winner && assigned < spec.k {
            plan[pid] = Some(winner);
            assigned += 1;
        }
    }
    for slot in plan.iter_mut() {
        if assigned >= spec.k {
            break;
        }
        if slot.is_none() {
            *slot = Some(winner);
            assigned += 1;
        }
    }
    plan.into_iter()
        .zip(proposals)
        .map(|(p, &own)| p.unwrap_or(if own == winner { other.unwrap_or(winner) } else { own }))
        .collect()
}

/// Whether a complete assignment satisfies the contract for the given
/// proposals.
pub fn is_compliant(spec: &OracleSpec, proposals: &[ValueId], decisions: &[Option<ValueId>]) -> bool {
    let m = spec.m as usize;
    let proposed = mask(m, proposals.iter().copied());
    let decided = decisions.iter().flatten().copied();
    if spec.validity == Validity::Strong && decisions.iter().flatten().any(|v| !proposed[v.index()]) {
        return false;
    }
    best_witness(&tally(m, decided), &proposed, spec.ell as usize).offenders <= spec.n - spec.k
}

/// Brute force over `m^n` assignments, with processes accessing the oracle
/// in pid order. An answer can only lean on values proposed so far, so every
/// prefix of the assignment must be compliant for the prefix of proposals.
pub fn compliant_assignments(spec: &OracleSpec, proposals: &[ValueId]) -> Vec<Vec<ValueId>> {
    let n = proposals.len();
    let m = spec.m as usize;
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let v = ValueId((code % m) as u32);
                    code /= m;
                    v
                })
                .collect::<Vec<_>>()
        })
        .filter(|a| {
            (1..=n).all(|len| {
                let d: Vec<Option<ValueId>> = a[..len].iter().copied().map(Some).collect();
                is_compliant(spec, &proposals[..len], &d)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::values;

    fn spec(n: usize, m: u32, k: usize) -> OracleSpec {
        OracleSpec {
            n,
            m,
            k,
            ell: 1,
            validity: Validity::Strong,
        }
    }

    fn run(oracle: &mut PartialAgreementOracle, proposals: &[ValueId]) -> Vec<ValueId> {
        proposals
            .iter()
            .enumerate()
            .map(|(pid, &v)| oracle.propose(pid, v).unwrap())
            .collect()
    }

    fn counts(decisions: &[ValueId], m: usize) -> Vec<usize> {
        tally(m, decisions.iter().copied())
    }

    #[test]
    fn worst_case_split_gives_exactly_k_the_witness() {
        let proposals = values(&[0, 0, 1, 1]);
        for known in [false, true] {
            let mut o = PartialAgreementOracle::new(spec(4, 2, 3), OracleStrategy::WorstCaseSplit);
            if known {
                o = o.with_known_proposals(&proposals);
            }
            let d = run(&mut o, &proposals);
            let mut c = counts(&d, 2);
            c.sort();
            assert_eq!(c, vec![1, 3], "known={known} {d:?}");
        }
    }

    #[test]
    fn worst_case_split_counting_distribution() {
        // k = floor(5/2) + 5 mod 2 + 1 = 3
        let proposals = values(&[0, 0, 0, 1, 1]);
        let mut o = PartialAgreementOracle::new(spec(5, 2, 3), OracleStrategy::WorstCaseSplit)
            .with_known_proposals(&proposals);
        let d = run(&mut o, &proposals);
        assert_eq!(counts(&d, 2), vec![3, 2]);
    }

    #[test]
    fn honest_oracle_is_full_agreement() {
        let proposals = values(&[1, 0, 0]);
        let mut o = PartialAgreementOracle::new(spec(3, 2, 3), OracleStrategy::HonestFullAgreement);
        assert_eq!(run(&mut o, &proposals), values(&[1, 1, 1]));
    }

    #[test]
    fn double_propose_rejected() {
        let mut o = PartialAgreementOracle::new(spec(3, 2, 2), OracleStrategy::WorstCaseSplit);
        o.propose(0, ValueId(0)).unwrap();
        assert!(matches!(
            o.propose(0, ValueId(1)),
            Err(ModelError::DoublePropose { .. })
        ));
    }

    #[test]
    fn scripted_responses_are_checked() {
        let strategy = OracleStrategy::Scripted {
            responses: values(&[1, 1]),
        };
        let mut o = PartialAgreementOracle::new(spec(3, 2, 3), strategy);
        // strong validity: 1 has not been proposed yet
        assert!(matches!(
            o.propose(0, ValueId(0)),
            Err(ModelError::OracleNonCompliant { .. })
        ));
    }

    #[test]
    fn strong_answers_only_proposed_values() {
        let o = PartialAgreementOracle::new(spec(3, 3, 1), OracleStrategy::WorstCaseSplit);
        assert_eq!(o.admissible_responses(0, ValueId(2)).unwrap(), values(&[2]));
        let weak = OracleSpec {
            validity: Validity::Weak,
            ..spec(3, 3, 1)
        };
        let o = PartialAgreementOracle::new(weak, OracleStrategy::WorstCaseSplit);
        assert_eq!(o.admissible_responses(0, ValueId(2)).unwrap().len(), 3);
    }

    /// Online branching over admissible answers reaches exactly the compliant
    /// complete assignments.
    #[test]
    fn online_branching_matches_brute_force() {
        fn branch(o: &PartialAgreementOracle, proposals: &[ValueId], pid: usize, out: &mut Vec<Vec<ValueId>>) {
            if pid == proposals.len() {
                out.push(o.decisions().iter().map(|d| d.unwrap()).collect());
                return;
            }
            for r in o.admissible_responses(pid, proposals[pid]).unwrap() {
                let mut next = o.clone();
                next.commit(pid, proposals[pid], r).unwrap();
                branch(&next, proposals, pid + 1, out);
            }
        }
        for (n, m, k, raw) in [
            (4, 2, 3, vec![0, 1, 0, 1]),
            (4, 3, 2, vec![2, 0, 1, 1]),
            (5, 2, 4, vec![1, 1, 0, 0, 1]),
        ] {
            for validity in [Validity::Weak, Validity::Strong] {
                let s = OracleSpec { validity, ..spec(n, m, k) };
                let proposals = values(&raw);
                let mut online = Vec::new();
                branch(&PartialAgreementOracle::new(s, OracleStrategy::WorstCaseSplit), &proposals, 0, &mut online);
                online.sort();
                let mut brute = compliant_assignments(&s, &proposals);
                brute.sort();
                assert_eq!(online, brute, "{s:?}");
            }
        }
    }

    #[test]
    fn plurality_plan_exact_k() {
        let proposals = values(&[0, 2, 1, 1, 1]);
        let s = OracleSpec { m: 3, ..spec(5, 3, 2) };
        let mut o = PartialAgreementOracle::new(s, OracleStrategy::PluralityExactK).with_known_proposals(&proposals);
        let d = run(&mut o, &proposals);
        assert_eq!(counts(&d, 3)[1], 2, "{d:?}");
    }
}
