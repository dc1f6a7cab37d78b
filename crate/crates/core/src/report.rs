//! Named residual checks and observations shared by verifiers and reports.

use serde::Serialize;

/// One asserted identity: `pass` iff `residual ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        Self { name: name.into(), residual, tolerance, pass }
    }

    /// A check that passes when `value` is at least `threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let pass = value.is_finite() && value >= threshold;
        Self { name: name.into(), residual: value, tolerance: threshold, pass }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), residual: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok }
    }
}

/// A reported quantity that is not asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

impl Observation {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub fn worst(checks: &[Check]) -> Option<&Check> {
    checks.iter().filter(|c| !c.pass).max_by(|a, b| a.residual.total_cmp(&b.residual))
}
