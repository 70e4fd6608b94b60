use serde::{Deserialize, Serialize};

/// One named invariant check. `value` is the measured quantity (a minimum eigenvalue,
/// a deviation, ...) and `passed` its comparison against the tolerance in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            checks: Vec::new(),
        }
    }

    /// Records `value ≥ −tolerance`.
    pub fn at_least_zero(&mut self, name: impl Into<String>, value: f64) {
        let passed = value >= -self.tolerance;
        self.checks.push(Check {
            name: name.into(),
            value,
            passed,
        });
    }

    /// Records `|value| ≤ tolerance`.
    pub fn near_zero(&mut self, name: impl Into<String>, value: f64) {
        let passed = value.abs() <= self.tolerance;
        self.checks.push(Check {
            name: name.into(),
            value,
            passed,
        });
    }

    /// Records a check decided by the caller.
    pub fn record(&mut self, name: impl Into<String>, value: f64, passed: bool) {
        self.checks.push(Check {
            name: name.into(),
            value,
            passed,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
