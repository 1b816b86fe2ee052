//! Check records and the verification report written by the suites.

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

/// Which side of the tolerance a passing residual sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// The identity or bound the check exercises, or `"plumbing"`.
    pub anchor: String,
    pub status: Status,
    /// `None` when the check could not produce a number.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    fn build(
        id: &str,
        anchor: &str,
        residual: Option<f64>,
        tolerance: f64,
        criterion: Criterion,
        status: Status,
    ) -> Self {
        CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status,
            residual: residual.filter(|r| r.is_finite()),
            tolerance,
            criterion,
            wall_time_s: 0.0,
            detail: None,
        }
    }

    /// Passes iff `residual <= tolerance`.
    pub fn at_most(id: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self::build(
            id,
            anchor,
            Some(residual),
            tolerance,
            Criterion::AtMost,
            status,
        )
    }

    /// Passes iff `value >= threshold`.
    pub fn at_least(id: &str, anchor: &str, value: f64, threshold: f64) -> Self {
        let status = if value >= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Self::build(
            id,
            anchor,
            Some(value),
            threshold,
            Criterion::AtLeast,
            status,
        )
    }

    pub fn vacuous(id: &str, anchor: &str, tolerance: f64, criterion: Criterion) -> Self {
        Self::build(id, anchor, None, tolerance, criterion, Status::Vacuous)
    }

    /// A check that errored before producing a residual.
    pub fn errored(id: &str, anchor: &str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self::build(id, anchor, None, tolerance, Criterion::AtMost, Status::Fail)
            .with_detail(err.to_string())
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn failed(mut self) -> Self {
        self.status = Status::Fail;
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Runs `body` and stamps the record with its wall time.
pub fn timed(body: impl FnOnce() -> CheckRecord) -> CheckRecord {
    let start = Instant::now();
    let mut rec = body();
    rec.wall_time_s = start.elapsed().as_secs_f64();
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    /// Sorts the checks by id so the order never depends on scheduling.
    pub fn new(config: serde_json::Value, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
