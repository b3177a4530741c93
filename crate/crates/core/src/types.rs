//! Domain types shared by every module: process ids, values and the problem
//! tuple a run is judged against.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SpecError;

/// Zero-based process identifier. Rendered one-based (`p1`, `p2`, ...).
pub type Pid = usize;

/// Formats a pid the way traces and reports show it.
pub fn pid_label(pid: Pid) -> String {
    format!("p{}", pid + 1)
}

/// A value from the totally ordered domain `0..m`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ValueId(pub u32);

impl ValueId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ValueId {
    fn from(v: u32) -> Self {
        ValueId(v)
    }
}

/// Converts a slice of raw integers into values.
pub fn values(raw: &[u32]) -> Vec<ValueId> {
    raw.iter().copied().map(ValueId).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Validity {
    /// The witness value(s) must have been proposed.
    #[default]
    Weak,
    /// Every decided value must have been proposed.
    Strong,
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Weak => f.write_str("weak"),
            Validity::Strong => f.write_str("strong"),
        }
    }
}

/// Computation model a spec is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    /// Asynchronous read/write shared memory (and, via register-array
    /// simulation, asynchronous message passing).
    #[default]
    AsyncRw,
    /// Synchronous lockstep message passing.
    SyncMp,
    /// Asynchronous shared memory plus wait-free consensus objects for `g`
    /// processes.
    SmG { g: usize },
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::AsyncRw => f.write_str("async-rw"),
            Model::SyncMp => f.write_str("sync-mp"),
            Model::SmG { g } => write!(f, "sm-g({g})"),
        }
    }
}

/// The tuple `(n, m, t, k, ell, validity, model)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub m: u32,
    pub t: usize,
    pub k: usize,
    pub ell: u32,
    pub validity: Validity,
    pub model: Model,
}

impl ProblemSpec {
    /// Spec with `ell = 1`, weak validity and the asynchronous RW model.
    pub fn new(n: usize, m: u32, t: usize, k: usize) -> Self {
        ProblemSpec {
            n,
            m,
            t,
            k,
            ell: 1,
            validity: Validity::Weak,
            model: Model::AsyncRw,
        }
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = ell;
        self
    }

    pub fn with_validity(mut self, validity: Validity) -> Self {
        self.validity = validity;
        self
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.n < 2 {
            return Err(SpecError::TooFewProcesses(self.n));
        }
        if self.m < 2 {
            return Err(SpecError::TooFewValues(self.m));
        }
        if self.k < 1 || self.k > self.n {
            return Err(SpecError::ThresholdOutOfRange { k: self.k, n: self.n });
        }
        if self.ell < 1 || self.ell > self.m {
            return Err(SpecError::SetBoundOutOfRange { ell: self.ell, m: self.m });
        }
        if self.t > self.n {
            return Err(SpecError::TooManyCrashes { t: self.t, n: self.n });
        }
        if let Model::SmG { g } = self.model {
            if g < 1 || g > self.n {
                return Err(SpecError::ObjectSizeOutOfRange { g, n: self.n });
            }
        }
        Ok(())
    }

    /// `min(m, t+1)`, the effective number of values that can survive `t`
    /// crashes.
    pub fn effective_values(&self) -> usize {
        (self.m as usize).min(self.t + 1)
    }

    /// Checks that every input lies in `0..m` and that there are `n` of them.
    pub fn check_inputs(&self, inputs: &[ValueId]) -> Result<(), SpecError> {
        if inputs.len() != self.n {
            return Err(SpecError::InputCount { got: inputs.len(), n: self.n });
        }
        if let Some(v) = inputs.iter().find(|v| v.0 >= self.m) {
            return Err(SpecError::ValueOutOfDomain { value: v.0, m: self.m });
        }
        Ok(())
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m={} t={} k={} ell={} validity={} model={}",
            self.n, self.m, self.t, self.k, self.ell, self.validity, self.model
        )
    }
}

pub(crate) fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_each_invariant() {
        assert!(matches!(
            ProblemSpec::new(1, 2, 0, 1).validate(),
            Err(SpecError::TooFewProcesses(1))
        ));
        assert!(matches!(
            ProblemSpec::new(3, 1, 0, 1).validate(),
            Err(SpecError::TooFewValues(1))
        ));
        assert!(ProblemSpec::new(3, 2, 0, 0).validate().is_err());
        assert!(ProblemSpec::new(3, 2, 0, 4).validate().is_err());
        assert!(ProblemSpec::new(3, 2, 4, 1).validate().is_err());
        assert!(ProblemSpec::new(3, 2, 1, 1).with_ell(3).validate().is_err());
        assert!(ProblemSpec::new(3, 2, 1, 1)
            .with_model(Model::SmG { g: 0 })
            .validate()
            .is_err());
        assert!(ProblemSpec::new(3, 2, 3, 3)
            .with_model(Model::SmG { g: 3 })
            .validate()
            .is_ok());
    }

    #[test]
    fn error_names_the_invariant() {
        let err = ProblemSpec::new(4, 2, 1, 5).validate().unwrap_err();
        assert!(err.to_string().contains("1 <= k <= n"), "{err}");
    }

    #[test]
    fn input_domain() {
        let spec = ProblemSpec::new(3, 2, 1, 2);
        assert!(spec.check_inputs(&values(&[0, 1, 1])).is_ok());
        assert!(spec.check_inputs(&values(&[0, 2, 1])).is_err());
        assert!(spec.check_inputs(&values(&[0, 1])).is_err());
    }
}
