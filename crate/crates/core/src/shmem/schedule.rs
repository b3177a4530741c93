use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{BudgetError, ModelError};
use crate::types::Pid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CrashAt {
    pub pid: Pid,
    /// The process takes no step at or after this index of `steps`.
    pub position: usize,
}

/// An asynchronous adversary: a step interleaving plus crash placements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AsyncSchedule {
    pub steps: Vec<Pid>,
    /// Sorted by pid, at most one entry per pid.
    pub crashes: Vec<CrashAt>,
}

impl AsyncSchedule {
    pub fn new(steps: Vec<Pid>) -> Self {
        AsyncSchedule {
            steps,
            crashes: Vec::new(),
        }
    }

    pub fn with_crash(mut self, pid: Pid, position: usize) -> Self {
        self.crashes.retain(|c| c.pid != pid);
        self.crashes.push(CrashAt { pid, position });
        self.crashes.sort();
        self
    }

    /// Round-robin over `n` processes for `rounds` passes.
    pub fn round_robin(n: usize, rounds: usize) -> Self {
        AsyncSchedule::new((0..rounds).flat_map(|_| 0..n).collect())
    }

    pub fn crash_position(&self, pid: Pid) -> Option<usize> {
        self.crashes.iter().find(|c| c.pid == pid).map(|c| c.position)
    }

    pub fn validate(&self, n: usize, t: usize) -> Result<(), ModelError> {
        if let Some(&pid) = self.steps.iter().find(|&&p| p >= n) {
            return Err(ModelError::UnknownProcess { pid, n });
        }
        let mut seen = HashSet::new();
        for c in &self.crashes {
            if c.pid >= n {
                return Err(ModelError::UnknownProcess { pid: c.pid, n });
            }
            if !seen.insert(c.pid) {
                return Err(ModelError::Config(format!("p{} crashes twice", c.pid + 1)));
            }
            if let Some(offset) = self.steps.iter().skip(c.position).position(|&p| p == c.pid) {
                return Err(ModelError::StepAfterCrash {
                    pid: c.pid,
                    position: c.position + offset,
                });
            }
        }
        if self.crashes.len() > t {
            return Err(ModelError::CrashBudget {
                crashes: self.crashes.len(),
                t,
            });
        }
        Ok(())
    }

    /// Drops every victim step at or after its crash and moves each crash
    /// right behind the victim's last remaining step.
    fn canonical(steps: &[Pid], crashes: &[CrashAt]) -> Self {
        let kept: Vec<Pid> = steps
            .iter()
            .enumerate()
            .filter(|&(i, p)| crashes.iter().all(|c| c.pid != *p || i < c.position))
            .map(|(_, &p)| p)
            .collect();
        let mut crashes: Vec<CrashAt> = crashes
            .iter()
            .map(|c| CrashAt {
                pid: c.pid,
                position: kept.iter().rposition(|&p| p == c.pid).map_or(0, |i| i + 1),
            })
            .collect();
        crashes.sort();
        AsyncSchedule { steps: kept, crashes }
    }
}

/// Every schedule of `max_steps` steps in which each process steps at least
/// once, combined with every placement of at most `min(t, n)` crashes, after
/// merging placements that leave the same steps and crash points.
pub fn enumerate_async_schedules(n: usize, t: usize, max_steps: usize, cap: u128) -> Result<Vec<AsyncSchedule>, BudgetError> {
    enumerate_async_schedules_with(n, t, max_steps, cap, |_| false)
}

/// Like [`enumerate_async_schedules`]; `prune(prefix)` returning true skips
/// every interleaving that extends `prefix`.
pub fn enumerate_async_schedules_with(
    n: usize,
    t: usize,
    max_steps: usize,
    cap: u128,
    mut prune: impl FnMut(&[Pid]) -> bool,
) -> Result<Vec<AsyncSchedule>, BudgetError> {
    let mut words = Vec::new();
    let mut prefix = Vec::with_capacity(max_steps);
    base_words(n, max_steps, &mut prefix, &mut words, &mut prune);

    let max_crashes = t.min(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |s: AsyncSchedule, out: &mut Vec<AsyncSchedule>| -> Result<(), BudgetError> {
        if seen.insert(s.clone()) {
            if out.len() as u128 >= cap {
                return Err(BudgetError {
                    cap,
                    reached: out.len() as u128 + 1,
                });
            }
            out.push(s);
        }
        Ok(())
    };
    for word in &words {
        push(AsyncSchedule::new(word.clone()), &mut out)?;
    }
    for j in 1..=max_crashes {
        for victims in combinations(n, j) {
            for word in &words {
                let mut positions = vec![0; j];
                loop {
                    let crashes: Vec<CrashAt> = victims
                        .iter()
                        .zip(&positions)
                        .map(|(&pid, &position)| CrashAt { pid, position })
                        .collect();
                    push(AsyncSchedule::canonical(word, &crashes), &mut out)?;
                    if !advance(&mut positions, max_steps) {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn base_words(n: usize, len: usize, prefix: &mut Vec<Pid>, out: &mut Vec<Vec<Pid>>, prune: &mut impl FnMut(&[Pid]) -> bool) {
    if !prefix.is_empty() && prune(prefix) {
        return;
    }
    let missing = (0..n).filter(|p| !prefix.contains(p)).count();
    if missing > len - prefix.len() {
        return;
    }
    if prefix.len() == len {
        out.push(prefix.clone());
        return;
    }
    for p in 0..n {
        prefix.push(p);
        base_words(n, len, prefix, out, prune);
        prefix.pop();
    }
}

/// Ascending `j`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(j);
    fn go(start: usize, n: usize, j: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == j {
            out.push(current.clone());
            return;
        }
        for x in start..n {
            current.push(x);
            go(x + 1, n, j, current, out);
            current.pop();
        }
    }
    go(0, n, j, &mut current, &mut out);
    out
}

/// Mixed-radix increment with every digit below `radix`.
fn advance(digits: &mut [usize], radix: usize) -> bool {
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
    fn two_processes_fault_free() {
        let all = enumerate_async_schedules(2, 0, 2, 100).unwrap();
        assert_eq!(all, vec![AsyncSchedule::new(vec![0, 1]), AsyncSchedule::new(vec![1, 0])]);
    }

    #[test]
    fn two_processes_one_crash() {
        let all = enumerate_async_schedules(2, 1, 2, 100).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.contains(&AsyncSchedule::new(vec![1]).with_crash(0, 0)));
        assert!(all.contains(&AsyncSchedule::new(vec![0, 1]).with_crash(0, 1)));
        for s in &all {
            s.validate(2, 1).unwrap();
        }
    }

    #[test]
    fn crashes_capped_at_n() {
        let all = enumerate_async_schedules(3, 3, 3, 100_000).unwrap();
        assert!(all.iter().all(|s| s.crashes.len() <= 3));
        assert!(all.iter().any(|s| s.crashes.len() == 3 && s.steps.is_empty()));
        let again = enumerate_async_schedules(3, 3, 3, 100_000).unwrap();
        assert_eq!(all, again);
    }

    #[test]
    fn budget_reports_count() {
        let err = enumerate_async_schedules(2, 1, 2, 3).unwrap_err();
        assert_eq!(err, BudgetError { cap: 3, reached: 4 });
    }

    #[test]
    fn prune_hook_cuts_prefixes() {
        let all = enumerate_async_schedules_with(2, 0, 3, 100, |prefix| prefix[0] == 1).unwrap();
        assert!(all.iter().all(|s| s.steps[0] == 0));
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn validate_rejects_steps_after_crash() {
        let s = AsyncSchedule::new(vec![0, 1, 0]).with_crash(0, 1);
        assert!(matches!(s.validate(2, 1), Err(ModelError::StepAfterCrash { pid: 0, position: 2 })));
        assert!(matches!(
            AsyncSchedule::new(vec![]).with_crash(0, 0).with_crash(1, 0).validate(2, 1),
            Err(ModelError::CrashBudget { .. })
        ));
    }
}
