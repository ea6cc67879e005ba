use serde::{Deserialize, Serialize};

/// Measured discrepancy of one identity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Wall-clock seconds.
    pub runtime: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// `|lhs - rhs| / max(|lhs|, 1e-30)`.
pub fn rel_err(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(1e-30)
}

impl VerificationReport {
    pub fn compare(identity: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let err = rel_err(lhs, rhs);
        Self {
            identity: identity.into(),
            lhs,
            rhs,
            rel_err: err,
            tolerance,
            pass: err <= tolerance,
            runtime: 0.0,
            detail: String::new(),
        }
    }

    /// Report for a quantity that is already an error measure.
    pub fn from_error(identity: impl Into<String>, err: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            lhs: err,
            rhs: 0.0,
            rel_err: err,
            tolerance,
            pass: err <= tolerance,
            runtime: 0.0,
            detail: String::new(),
        }
    }

    /// Report for an exact (boolean) check.
    pub fn exact(identity: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Self {
            identity: identity.into(),
            lhs: if holds { 0.0 } else { 1.0 },
            rhs: 0.0,
            rel_err: if holds { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: holds,
            runtime: 0.0,
            detail: detail.into(),
        }
    }

    pub fn with_runtime(mut self, seconds: f64) -> Self {
        self.runtime = seconds;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One fixed-width line, as printed by the test harness and the CLI.
    pub fn line(&self) -> String {
        format!(
            "{} {:<40} rel_err={:.3e} tol={:.1e} lhs={:.12e} rhs={:.12e} t={:.3}s",
            if self.pass { "PASS" } else { "FAIL" },
            self.identity,
            self.rel_err,
            self.tolerance,
            self.lhs,
            self.rhs,
            self.runtime
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(VerificationReport::compare("x", 1.0, 1.0 + 1e-7, 1e-6).pass);
        assert!(!VerificationReport::compare("x", 1.0, 1.1, 1e-6).pass);
        let zero = VerificationReport::compare("x", 0.0, 0.0, 0.0);
        assert!(zero.pass);
        assert!(VerificationReport::exact("e", true, "").pass);
    }
}
