//! Witness-set selection shared by the verifier and the oracles.

use crate::types::ValueId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Sorted ascending.
    pub set: Vec<ValueId>,
    /// Decided processes whose value is outside `set`.
    pub offenders: usize,
}

/// Picks the `ell` most-decided proposed values (ties by smaller value).
///
/// `counts[v]` is the number of processes that decided `v`; `proposed[v]`
/// tells whether `v` was proposed. Values outside `proposed` always count as
/// offenders.
pub fn best_witness(counts: &[usize], proposed: &[bool], ell: usize) -> Witness {
    let mut candidates: Vec<usize> = (0..counts.len()).filter(|&v| proposed[v]).collect();
    candidates.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    candidates.truncate(ell);
    let covered: usize = candidates.iter().map(|&v| counts[v]).sum();
    let total: usize = counts.iter().sum();
    let mut set: Vec<ValueId> = candidates.into_iter().map(|v| ValueId(v as u32)).collect();
    set.sort();
    Witness {
        set,
        offenders: total - covered,
    }
}

pub(crate) fn tally(m: usize, decided: impl IntoIterator<Item = ValueId>) -> Vec<usize> {
    let mut counts = vec![0; m];
    for v in decided {
        counts[v.index()] += 1;
    }
    counts
}

pub(crate) fn mask(m: usize, present: impl IntoIterator<Item = ValueId>) -> Vec<bool> {
    let mut mask = vec![false; m];
    for v in present {
        mask[v.index()] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_most_decided_then_smallest() {
        let w = best_witness(&[2, 2, 1], &[true, true, true], 1);
        assert_eq!(w.set, vec![ValueId(0)]);
        assert_eq!(w.offenders, 3);
        let w = best_witness(&[2, 2, 1], &[true, true, true], 2);
        assert_eq!(w.set, vec![ValueId(0), ValueId(1)]);
        assert_eq!(w.offenders, 1);
    }

    #[test]
    fn unproposed_values_are_offenders() {
        let w = best_witness(&[0, 0, 3], &[true, true, false], 1);
        assert_eq!(w.set, vec![ValueId(0)]);
        assert_eq!(w.offenders, 3);
    }
}
