//! Closed-form solvability thresholds for every row of the results table.
//!
//! [`evaluate_bounds`] returns one [`BoundReport`] per row whose hypotheses
//! hold for the given spec. Rows are filtered by model: R1-R5 describe the
//! asynchronous read/write (and message passing) model, R6-R7 the synchronous
//! model, R8-R10 the `SM(g)` model.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::types::{ceil_div, Model, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Row {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub const STRONG_VALIDITY_REQUIRED: &str = "strong validity required";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub row: Row,
    /// Largest k known to be solvable.
    pub sufficient_k: Option<usize>,
    /// Largest k not ruled out.
    pub necessary_k: Option<usize>,
    /// Sharper necessary threshold obtained by minimising over every smaller
    /// value domain (only reported on R5).
    pub refined_necessary_k: Option<usize>,
    pub rounds_lower: Option<usize>,
    pub rounds_upper: Option<usize>,
    pub assumptions: Vec<String>,
}

impl BoundReport {
    fn new(row: Row) -> Self {
        BoundReport {
            row,
            sufficient_k: None,
            necessary_k: None,
            refined_necessary_k: None,
            rounds_lower: None,
            rounds_upper: None,
            assumptions: Vec::new(),
        }
    }

    fn sufficient(mut self, k: usize) -> Self {
        self.sufficient_k = Some(k);
        self
    }

    fn necessary(mut self, k: usize) -> Self {
        self.necessary_k = Some(k);
        self
    }

    fn assume(mut self, note: impl Into<String>) -> Self {
        self.assumptions.push(note.into());
        self
    }

    /// The tightest necessary threshold this row reports.
    pub fn best_necessary(&self) -> Option<usize> {
        match (self.necessary_k, self.refined_necessary_k) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// `floor(n/d) + (n mod d)`.
pub fn floor_plus_remainder(n: usize, d: usize) -> usize {
    n / d + n % d
}

/// `min over 2 <= l <= d of floor(n/l) + (n mod l)`; `None` when `d < 2`.
pub fn min_floor_plus_remainder(n: usize, d: usize) -> Option<usize> {
    (2..=d).map(|l| floor_plus_remainder(n, l)).min()
}

/// Guarantee of the two-level consensus-object composition:
/// `max(g, 3 * floor(min(floor(n/2), g) / 2))`.
pub fn composition_guarantee(n: usize, g: usize) -> usize {
    let g_hat = (n / 2).min(g);
    g.max(3 * (g_hat / 2))
}

pub fn evaluate_bounds(spec: &ProblemSpec) -> Result<Vec<BoundReport>, SpecError> {
    spec.validate()?;
    let n = spec.n;
    let m = spec.m as usize;
    let t = spec.t;
    let faulty = t >= 1;
    let half = ceil_div(n, 2);
    let d = spec.effective_values();
    let mut rows = Vec::new();
    let fault_free = |r: BoundReport| r.assume("t = 0: necessary side omitted");

    match spec.model {
        Model::AsyncRw => {
            if m == 2 {
                let r = BoundReport::new(Row::R1).sufficient(half);
                rows.push(if faulty { r.necessary(half) } else { fault_free(r) });
            }
            if t == 1 {
                rows.push(BoundReport::new(Row::R2).sufficient(half).necessary(half));
            }
            if faulty {
                rows.push(BoundReport::new(Row::R3).necessary(half));
            }
            if n.is_multiple_of(d) {
                let r = BoundReport::new(Row::R4)
                    .sufficient(n / d)
                    .assume("min(m,t+1) divides n");
                rows.push(if faulty {
                    r.necessary(n / d).assume(STRONG_VALIDITY_REQUIRED)
                } else {
                    fault_free(r)
                });
            }
            let r = BoundReport::new(Row::R5).sufficient(ceil_div(n, d));
            rows.push(if faulty {
                let mut r = r
                    .necessary(floor_plus_remainder(n, d))
                    .assume(STRONG_VALIDITY_REQUIRED);
                r.refined_necessary_k = min_floor_plus_remainder(n, d);
                r
            } else {
                fault_free(r)
            });
        }
        Model::SyncMp => {
            let threshold = ceil_div(n + t + 1, 2);
            if faulty && t + 2 <= n && spec.k >= threshold {
                let mut r = BoundReport::new(Row::R6)
                    .assume(format!("k >= ceil((n+t+1)/2) = {threshold}"))
                    .assume("1 <= t <= n-2");
                r.rounds_lower = Some(t);
                rows.push(r);
            }
            let ell = spec.ell as usize;
            let mut r = BoundReport::new(Row::R7)
                .sufficient(ceil_div(n, ell))
                .assume(format!("ell = {ell}"));
            r.rounds_upper = Some(t / ell + 1);
            rows.push(r);
        }
        Model::SmG { g } => {
            if faulty && g == t && n > t {
                rows.push(
                    BoundReport::new(Row::R8)
                        .necessary(ceil_div(n + t - 1, 2))
                        .assume("g = t"),
                );
            }
            if n >= 4 {
                let k = ceil_div(n, d).max(composition_guarantee(n, g));
                rows.push(BoundReport::new(Row::R9).sufficient(k));
            }
            if n.is_multiple_of(4) && g == n / 2 && t == n / 2 {
                let k = 3 * n / 4;
                rows.push(
                    BoundReport::new(Row::R10)
                        .sufficient(k)
                        .necessary(k)
                        .assume("4 divides n")
                        .assume("g = t = n/2"),
                );
            }
        }
    }
    Ok(rows)
}

/// The overall necessary threshold: the minimum over every row that reports
/// one.
pub fn overall_necessary(reports: &[BoundReport]) -> Option<usize> {
    reports.iter().filter_map(BoundReport::best_necessary).min()
}

/// The overall sufficient threshold: the maximum over every row that
/// reports one.
pub fn overall_sufficient(reports: &[BoundReport]) -> Option<usize> {
    reports.iter().filter_map(|r| r.sufficient_k).max()
}

pub fn find(reports: &[BoundReport], row: Row) -> Option<&BoundReport> {
    reports.iter().find(|r| r.row == row)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(spec: ProblemSpec) -> Vec<BoundReport> {
        evaluate_bounds(&spec).unwrap()
    }

    #[test]
    fn multivalue_example() {
        let r = rows(ProblemSpec::new(7, 3, 5, 1));
        let r5 = find(&r, Row::R5).unwrap();
        assert_eq!(r5.sufficient_k, Some(3));
        assert_eq!(r5.necessary_k, Some(3));
        assert!(r5.assumptions.iter().any(|a| a == STRONG_VALIDITY_REQUIRED));
    }

    #[test]
    fn strong_objects_tight() {
        let r = rows(ProblemSpec::new(8, 2, 4, 1).with_model(Model::SmG { g: 4 }));
        let r10 = find(&r, Row::R10).unwrap();
        assert_eq!((r10.sufficient_k, r10.necessary_k), (Some(6), Some(6)));
        assert_eq!(find(&r, Row::R8).unwrap().necessary_k, Some(6));
        assert_eq!(find(&r, Row::R9).unwrap().sufficient_k, Some(6));
    }

    #[test]
    fn smallest_binary_instance() {
        let r = rows(ProblemSpec::new(2, 2, 1, 1));
        let r1 = find(&r, Row::R1).unwrap();
        assert_eq!((r1.sufficient_k, r1.necessary_k), (Some(1), Some(1)));
    }

    #[test]
    fn refined_necessary_over_smaller_domains() {
        let r = rows(ProblemSpec::new(10, 4, 3, 1));
        let r5 = find(&r, Row::R5).unwrap();
        assert_eq!(r5.sufficient_k, Some(3));
        assert_eq!(r5.refined_necessary_k, Some(4));
        // n = 7, d = 4: the theorem gives 1 + 3 = 4, l = 3 gives 2 + 1 = 3.
        let r = rows(ProblemSpec::new(7, 4, 3, 1));
        let r5 = find(&r, Row::R5).unwrap();
        assert_eq!(r5.necessary_k, Some(4));
        assert_eq!(r5.refined_necessary_k, Some(3));
        assert_eq!(overall_necessary(&r), Some(3));
    }

    #[test]
    fn round_lower_bound_row() {
        let spec = ProblemSpec::new(6, 2, 2, 5).with_model(Model::SyncMp);
        let r = rows(spec);
        assert_eq!(find(&r, Row::R6).unwrap().rounds_lower, Some(2));
        // k below the threshold drops the row
        let r = rows(spec.with_k(4));
        assert!(find(&r, Row::R6).is_none());
        assert_eq!(find(&r, Row::R7).unwrap().rounds_upper, Some(3));
    }

    #[test]
    fn fault_free_drops_necessary_rows() {
        let r = rows(ProblemSpec::new(6, 3, 0, 1));
        assert!(find(&r, Row::R3).is_none());
        assert!(r.iter().all(|b| b.necessary_k.is_none()));
        assert_eq!(find(&r, Row::R5).unwrap().sufficient_k, Some(6));
    }

    #[test]
    fn invalid_spec_is_reported() {
        assert!(evaluate_bounds(&ProblemSpec::new(4, 2, 1, 9)).is_err());
    }

    #[test]
    fn composition_cases() {
        assert_eq!(composition_guarantee(8, 4), 6);
        assert_eq!(composition_guarantee(9, 3), 3);
        assert_eq!(composition_guarantee(4, 4), 4);
        assert_eq!(composition_guarantee(10, 1), 1);
    }
}
