//! Counter-ambiguity analysis.
//!
//! A state is counter-ambiguous when some input places two tokens with
//! different counter values on it at the same time. Verdicts are reported
//! per repetition instance: an instance is ambiguous when some state of its
//! body is ambiguous on the instance's counter.

mod approx;
mod degree;
mod exact;
mod report;
mod witness;

use std::time::Duration;

use serde::Serialize;

use crate::nca::{StateId, Valuation};
use crate::syntax::InstanceId;

pub use approx::{analyze, approximate_ambiguity, approximate_regex, hybrid_ambiguity, ApproxOutcome};
pub use degree::{degree_at_least, DegreeAnswer};
pub use exact::{exact_ambiguity, explore, ExactOptions, Exploration};
pub use report::{escape_bytes, report_json, unescape_bytes, InstanceRecord, ReportRecord};
pub use witness::{subset_sum_regex, subset_sum_tail, verify_witness, WitnessCheck};

/// Default cap on created token pairs per analysis run.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub input: Vec<u8>,
    pub state: StateId,
    pub valuations: (Valuation, Valuation),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InconclusiveReason {
    Budget,
    Approx,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unambiguous,
    Ambiguous(Witness),
    Inconclusive(InconclusiveReason),
}

impl Verdict {
    pub fn is_unambiguous(&self) -> bool {
        matches!(self, Verdict::Unambiguous)
    }

    pub fn is_ambiguous(&self) -> bool {
        matches!(self, Verdict::Ambiguous(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Ambiguous(w) => Some(w),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Unambiguous => "unambiguous",
            Verdict::Ambiguous(_) => "ambiguous",
            Verdict::Inconclusive(InconclusiveReason::Budget) => "inconclusive-budget",
            Verdict::Inconclusive(InconclusiveReason::Approx) => "inconclusive-approx",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
    Hybrid,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" => Ok(Mode::Approx),
            "hybrid" => Ok(Mode::Hybrid),
            _ => Err(format!("unknown analysis mode {s:?}")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
            Mode::Hybrid => "hybrid",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReport {
    pub id: InstanceId,
    pub min: u32,
    pub max: u32,
    pub verdict: Verdict,
    /// No input ever puts two differently valued tokens of this counter on
    /// body states at once (any states, not only the same one). Implies
    /// unambiguity; required for tracking the instance with one register.
    pub single_valued: bool,
    pub pairs_created: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegexVerdict {
    Unambiguous,
    Ambiguous,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub mode: Mode,
    pub instances: Vec<InstanceReport>,
    /// Token pairs created across all phases of the run.
    pub pairs_created: u64,
    pub elapsed: Duration,
}

impl AmbiguityReport {
    /// Ambiguous if any instance is; otherwise inconclusive if any
    /// instance is; otherwise unambiguous.
    pub fn verdict(&self) -> RegexVerdict {
        if self.instances.iter().any(|i| i.verdict.is_ambiguous()) {
            RegexVerdict::Ambiguous
        } else if self.instances.iter().any(|i| matches!(i.verdict, Verdict::Inconclusive(_))) {
            RegexVerdict::Inconclusive
        } else {
            RegexVerdict::Unambiguous
        }
    }

    pub fn instance(&self, id: InstanceId) -> Option<&InstanceReport> {
        self.instances.iter().find(|i| i.id == id)
    }
}
