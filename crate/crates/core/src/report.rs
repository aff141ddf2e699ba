//! Both-sides comparison reports and their batch summaries.

use serde::{Deserialize, Serialize};

use crate::numeric::C64;

/// Below this modulus the right-hand side is treated as zero and the
/// absolute error is compared instead.
pub const RHS_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lhs: C64,
    pub rhs: C64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub params_echo: serde_json::Value,
    pub terms_summed: usize,
}

impl VerificationReport {
    pub fn compare(
        lhs: C64,
        rhs: C64,
        tol: f64,
        params_echo: serde_json::Value,
        terms_summed: usize,
    ) -> Self {
        let abs_err = (lhs - rhs).norm();
        let rel_err = if rhs.norm() < RHS_FLOOR {
            abs_err
        } else {
            abs_err / rhs.norm()
        };
        VerificationReport {
            lhs,
            rhs,
            abs_err,
            rel_err,
            pass: rel_err <= tol,
            params_echo,
            terms_summed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub total: usize,
    pub passed: usize,
    pub max_rel_err: f64,
}

/// A batch of reports with its summary, as written by batch runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub reports: Vec<VerificationReport>,
    pub summary: BatchSummary,
}

impl BatchReport {
    pub fn new(reports: Vec<VerificationReport>) -> Self {
        let summary = BatchSummary {
            total: reports.len(),
            passed: reports.iter().filter(|r| r.pass).count(),
            max_rel_err: reports.iter().map(|r| r.rel_err).fold(0.0, |a, b| {
                if b.is_nan() || a.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            }),
        };
        BatchReport { reports, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.passed == self.summary.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    #[test]
    fn pass_flag_follows_tolerance() {
        let r = VerificationReport::compare(
            c(1.0, 0.0),
            c(1.0 + 1e-9, 0.0),
            1e-8,
            serde_json::Value::Null,
            1,
        );
        assert!(r.pass);
        let r =
            VerificationReport::compare(c(1.0, 0.0), c(1.1, 0.0), 1e-8, serde_json::Value::Null, 1);
        assert!(!r.pass);
    }

    #[test]
    fn tiny_rhs_uses_absolute_error() {
        let r = VerificationReport::compare(
            c(1e-25, 0.0),
            c(0.0, 0.0),
            1e-8,
            serde_json::Value::Null,
            1,
        );
        assert_eq!(r.rel_err, r.abs_err);
        assert!(r.pass);
    }

    #[test]
    fn nan_never_passes() {
        let r = VerificationReport::compare(
            c(f64::NAN, 0.0),
            c(1.0, 0.0),
            1e-8,
            serde_json::Value::Null,
            1,
        );
        assert!(!r.pass);
        let b = BatchReport::new(vec![r]);
        assert!(!b.all_pass());
        assert!(b.summary.max_rel_err.is_nan());
    }
}
