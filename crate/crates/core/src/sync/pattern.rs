use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{BudgetError, ModelError};
use crate::shmem::combinations;
use crate::types::Pid;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CrashPoint {
    /// 1-based round in which the victim crashes.
    pub round: u32,
    /// Recipients of the victim's last-round messages.
    pub reached: BTreeSet<Pid>,
}

/// Synchronous adversary: who crashes, when, and whom the last sends reach.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CrashPattern {
    #[serde(with = "victim_list")]
    pub victims: BTreeMap<Pid, CrashPoint>,
}

/// Victims as a list of `{pid, round, reached}`; integer map keys do not
/// survive tagged enums.
mod victim_list {
    use std::collections::{BTreeMap, BTreeSet};

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CrashPoint;
    use crate::types::Pid;

    #[derive(Serialize, Deserialize)]
    struct Victim {
        pid: Pid,
        round: u32,
        reached: BTreeSet<Pid>,
    }

    pub fn serialize<S: Serializer>(victims: &BTreeMap<Pid, CrashPoint>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Victim> = victims
            .iter()
            .map(|(&pid, c)| Victim {
                pid,
                round: c.round,
                reached: c.reached.clone(),
            })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Pid, CrashPoint>, D::Error> {
        let list = Vec::<Victim>::deserialize(d)?;
        Ok(list
            .into_iter()
            .map(|v| {
                (
                    v.pid,
                    CrashPoint {
                        round: v.round,
                        reached: v.reached,
                    },
                )
            })
            .collect())
    }
}

impl CrashPattern {
    pub fn none() -> Self {
        CrashPattern::default()
    }

    pub fn with_crash(mut self, pid: Pid, round: u32, reached: impl IntoIterator<Item = Pid>) -> Self {
        self.victims.insert(
            pid,
            CrashPoint {
                round,
                reached: reached.into_iter().collect(),
            },
        );
        self
    }

    pub fn validate(&self, n: usize, t: usize, rounds: u32) -> Result<(), ModelError> {
        if self.victims.len() > t {
            return Err(ModelError::CrashBudget {
                crashes: self.victims.len(),
                t,
            });
        }
        for (&pid, point) in &self.victims {
            if pid >= n {
                return Err(ModelError::UnknownProcess { pid, n });
            }
            if point.round == 0 || point.round > rounds {
                return Err(ModelError::CrashRound {
                    round: point.round,
                    rounds,
                });
            }
            if let Some(&dst) = point.reached.iter().find(|&&d| d >= n) {
                return Err(ModelError::UnknownProcess { pid: dst, n });
            }
        }
        Ok(())
    }

    /// Victims crashing in `round`, with their recipients.
    pub fn crashing_in(&self, round: u32) -> impl Iterator<Item = (Pid, &BTreeSet<Pid>)> {
        self.victims
            .iter()
            .filter(move |(_, c)| c.round == round)
            .map(|(&p, c)| (p, &c.reached))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `sum_{j <= min(t, n)} C(n, j) * (rounds * 2^n)^j`, saturating.
pub fn crash_pattern_count(n: usize, t: usize, rounds: u32) -> u128 {
    let per_victim = (rounds as u128).saturating_mul(1u128.checked_shl(n as u32).unwrap_or(u128::MAX));
    (0..=t.min(n))
        .map(|j| binomial(n, j).saturating_mul(per_victim.saturating_pow(j as u32)))
        .fold(0u128, u128::saturating_add)
}

/// Every pattern with at most `min(t, n)` victims, each crashing in a round
/// of `1..=rounds` and reaching any subset of processes. Ordered by victim
/// count, then victim set, then round and subset choices.
pub fn enumerate_crash_patterns(n: usize, t: usize, rounds: u32, cap: u128) -> Result<Vec<CrashPattern>, BudgetError> {
    let total = crash_pattern_count(n, t, rounds);
    if total > cap {
        return Err(BudgetError { cap, reached: total });
    }
    let per_victim = rounds as usize * (1usize << n);
    let mut out = Vec::with_capacity(total as usize);
    for j in 0..=t.min(n) {
        for victims in combinations(n, j) {
            let mut digits = vec![0usize; j];
            loop {
                let mut pattern = CrashPattern::none();
                for (&pid, &d) in victims.iter().zip(&digits) {
                    let round = (d / (1 << n)) as u32 + 1;
                    let subset = d % (1 << n);
                    pattern = pattern.with_crash(pid, round, (0..n).filter(|q| subset >> q & 1 == 1));
                }
                out.push(pattern);
                if !increment(&mut digits, per_victim) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn increment(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(crash_pattern_count(2, 1, 1), 9);
        assert_eq!(enumerate_crash_patterns(2, 1, 1, 100).unwrap().len(), 9);
        assert_eq!(enumerate_crash_patterns(3, 0, 5, 100).unwrap(), vec![CrashPattern::none()]);
        let all = enumerate_crash_patterns(3, 2, 2, 10_000).unwrap();
        assert_eq!(all.len() as u128, crash_pattern_count(3, 2, 2));
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn all_crash_pattern_included() {
        let all = enumerate_crash_patterns(2, 2, 1, 100).unwrap();
        assert!(all.iter().any(|p| p.victims.len() == 2));
    }

    #[test]
    fn budget() {
        let err = enumerate_crash_patterns(4, 3, 3, 1000).unwrap_err();
        assert_eq!(err.reached, crash_pattern_count(4, 3, 3));
    }

    #[test]
    fn validation() {
        let p = CrashPattern::none().with_crash(0, 3, [1]);
        assert!(matches!(p.validate(2, 1, 2), Err(ModelError::CrashRound { round: 3, .. })));
        assert!(p.validate(2, 0, 3).is_err());
        p.validate(2, 1, 3).unwrap();
    }
}
