//! Check reports: ordered lists of named verdicts with residual
//! statistics and witness points, aggregating to an overall status.

use serde::{Deserialize, Serialize};

use crate::zero::ZeroVerdict;

/// Outcome payload of a single check entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CheckOutcome {
    /// A zero decision on an expression, field, or multivector.
    Zero { verdict: ZeroVerdict },
    /// A sampled lower bound that must stay above a threshold
    /// (e.g. non-vanishing of a scaling function).
    MinAbs {
        min: f64,
        threshold: f64,
        at: Vec<f64>,
    },
    /// Pointwise linear-independence diagnostic.
    Rank {
        expected: usize,
        full_rank_everywhere: bool,
        min_relative_pivot: f64,
        worst_point: Vec<f64>,
    },
    /// A relation that holds up to a reported sign.
    SignedZero {
        /// +1 or -1 when one orientation holds, the verdict for it.
        sign: i8,
        verdict: ZeroVerdict,
    },
}

impl CheckOutcome {
    pub fn zero(verdict: ZeroVerdict) -> CheckOutcome {
        CheckOutcome::Zero { verdict }
    }

    pub fn passed(&self) -> bool {
        match self {
            CheckOutcome::Zero { verdict } => verdict.is_zero(),
            CheckOutcome::MinAbs { min, threshold, .. } => min > threshold,
            CheckOutcome::Rank {
                full_rank_everywhere,
                ..
            } => *full_rank_everywhere,
            CheckOutcome::SignedZero { sign, verdict } => *sign != 0 && verdict.is_zero(),
        }
    }

    pub fn verdict(&self) -> Option<&ZeroVerdict> {
        match self {
            CheckOutcome::Zero { verdict } | CheckOutcome::SignedZero { verdict, .. } => {
                Some(verdict)
            }
            _ => None,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.verdict().map(ZeroVerdict::max_residual).unwrap_or(0.0)
    }
}

/// One named verdict inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub label: String,
    pub outcome: CheckOutcome,
    pub passed: bool,
}

impl CheckEntry {
    pub fn new(id: impl Into<String>, label: impl Into<String>, outcome: CheckOutcome) -> Self {
        let passed = outcome.passed();
        CheckEntry {
            id: id.into(),
            label: label.into(),
            outcome,
            passed,
        }
    }

    pub fn zero(id: impl Into<String>, label: impl Into<String>, verdict: ZeroVerdict) -> Self {
        CheckEntry::new(id, label, CheckOutcome::zero(verdict))
    }
}

/// Ordered list of check entries; the overall status is their conjunction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn new() -> CheckReport {
        CheckReport::default()
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: CheckReport) {
        for mut e in other.entries {
            e.id = format!("{prefix}{}", e.id);
            self.entries.push(e);
        }
    }

    pub fn overall_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}
