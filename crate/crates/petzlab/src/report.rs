//! One inequality evaluation: lhs, rhs, gap, pass flag, instance descriptor.

use serde::{Deserialize, Serialize};

/// Result of evaluating one inequality instance.
///
/// Sign convention: `gap = lhs - rhs`, and the check passes iff
/// `gap >= -tol`. Infinities propagate; a vacuous pass carries the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tol: f64,
    pub pass: bool,
    pub vacuous: Option<String>,
    pub instance: String,
    pub seed: u64,
}

impl CheckReport {
    pub fn from_sides(
        suite: &str,
        lhs: f64,
        rhs: f64,
        tol: f64,
        instance: impl Into<String>,
        seed: u64,
    ) -> Self {
        let gap = lhs - rhs;
        // NaN gaps (inf - inf) never pass.
        let pass = gap >= -tol;
        Self {
            suite: suite.to_string(),
            lhs,
            rhs,
            gap,
            tol,
            pass,
            vacuous: None,
            instance: instance.into(),
            seed,
        }
    }

    /// Trivially true instance (e.g. lhs = +inf from a support violation).
    pub fn vacuous_pass(
        suite: &str,
        reason: &str,
        lhs: f64,
        rhs: f64,
        instance: impl Into<String>,
        seed: u64,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            lhs,
            rhs,
            gap: lhs - rhs,
            tol: 0.0,
            pass: true,
            vacuous: Some(reason.to_string()),
            instance: instance.into(),
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_gap_above_minus_tol() {
        let r = CheckReport::from_sides("s", 1.0, 1.0 + 5e-7, 1e-6, "i", 0);
        assert!(r.pass && r.gap < 0.0);
        let r = CheckReport::from_sides("s", 1.0, 1.0 + 2e-6, 1e-6, "i", 0);
        assert!(!r.pass);
    }

    #[test]
    fn infinite_lhs_passes() {
        let r = CheckReport::from_sides("s", f64::INFINITY, 3.0, 1e-8, "i", 0);
        assert!(r.pass && r.gap.is_infinite());
    }

    #[test]
    fn nan_gap_fails() {
        let r = CheckReport::from_sides("s", f64::INFINITY, f64::INFINITY, 1e-8, "i", 0);
        assert!(!r.pass);
    }
}
