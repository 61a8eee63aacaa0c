use serde::{Deserialize, Serialize};

/// One named inequality check. `slack` is the bound minus the measured
/// quantity, so it is negative exactly when the check failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// the property of the flow the check tests
    pub anchor: String,
    pub pass: bool,
    pub slack: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedCheck {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
    #[serde(default)]
    pub skipped: Vec<SkippedCheck>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `measured ≤ bound`.
    pub fn check_le(&mut self, name: &str, anchor: &str, measured: f64, bound: f64) -> &mut CheckRecord {
        let slack = bound - measured;
        self.push(name, anchor, slack >= 0.0, slack)
    }

    pub fn push(&mut self, name: &str, anchor: &str, pass: bool, slack: f64) -> &mut CheckRecord {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            pass,
            slack,
            detail: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn skip(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(SkippedCheck {
            name: name.into(),
            reason: reason.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.skipped.extend(other.skipped);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_sign_decides() {
        let mut r = VerificationReport::new();
        r.check_le("a", "x", 1.0, 2.0);
        r.check_le("b", "x", 3.0, 2.0).detail = Some("step 4".into());
        assert!(!r.all_passed());
        assert_eq!(r.passed().count(), 1);
        assert_eq!(r.failed().next().unwrap().name, "b");
        assert_eq!(r.get("b").unwrap().slack, -1.0);
    }
}
