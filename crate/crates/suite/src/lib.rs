//! Reporting harness for the acceptance suite in `tests/acceptance.rs`.
//!
//! The suite lives in its own package so that cargo runs it after every other test
//! target: cargo stops at the first failing test binary.

use std::fmt;

/// One checked criterion, or one sub-check of a criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Line {
    pub fn new(id: &'static str, title: &'static str, passed: bool, detail: String) -> Self {
        Self { id, title, passed, detail }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:<3} {status}  {}: {}", self.id, self.title, self.detail)
    }
}

/// Runs each criterion in order, printing its lines as they complete. Returns the
/// number of failing lines.
pub fn run_all(criteria: &[fn() -> Vec<Line>]) -> usize {
    let mut failures = 0;
    for criterion in criteria {
        for line in criterion() {
            println!("{line}");
            failures += usize::from(!line.passed);
        }
    }
    println!("acceptance: {failures} failing line(s)");
    failures
}
