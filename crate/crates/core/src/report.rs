//! Aggregated pass/fail records shared by law checkers and certificate
//! verifiers. A check accumulates the worst violation seen under one name;
//! slack above zero means the named inequality is broken after tolerance.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst violation amount observed; values `<= 0` are margins.
    pub worst_slack: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Record one observation of the named check. The worst slack and its
    /// witness are kept; the check fails once any observation is positive.
    pub fn observe(&mut self, name: &str, slack: f64, witness: impl FnOnce() -> String) {
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => {
                if slack > c.worst_slack {
                    c.worst_slack = slack;
                    c.witness = if slack > 0.0 { Some(witness()) } else { None };
                    c.passed = c.passed && slack <= 0.0;
                }
                if slack > 0.0 {
                    c.passed = false;
                }
            }
            None => self.checks.push(Check {
                name: name.to_string(),
                passed: slack <= 0.0,
                worst_slack: slack,
                witness: if slack > 0.0 { Some(witness()) } else { None },
            }),
        }
    }

    /// Record a boolean condition; failures carry unit slack.
    pub fn require(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        self.observe(name, if ok { -1.0 } else { 1.0 }, witness);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn merge(&mut self, other: Report) {
        for c in other.checks {
            match self.checks.iter_mut().find(|mine| mine.name == c.name) {
                Some(mine) => {
                    if c.worst_slack > mine.worst_slack {
                        mine.worst_slack = c.worst_slack;
                        mine.witness = c.witness;
                    }
                    mine.passed = mine.passed && c.passed;
                }
                None => self.checks.push(c),
            }
        }
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            if c.passed {
                writeln!(f, "ok   {} (worst slack {:.3e})", c.name, c.worst_slack)?;
            } else {
                writeln!(
                    f,
                    "FAIL {} (worst slack {:.3e}) {}",
                    c.name,
                    c.worst_slack,
                    c.witness.as_deref().unwrap_or("")
                )?;
            }
        }
        Ok(())
    }
}
