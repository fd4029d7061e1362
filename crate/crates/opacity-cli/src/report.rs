//! Machine-readable reports. The JSON schema is stable: parsing an emitted
//! report recovers identical verdicts and witnesses.

use std::collections::BTreeMap;

use opacity::search::{SearchStats, Witness};
use serde::{Deserialize, Serialize};

/// A serialization witness as it appears on the wire: the transaction order
/// plus the chosen fate of each pending commit request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub order: Vec<String>,
    pub commits: BTreeMap<String, String>,
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        WitnessReport {
            order: w.order.iter().map(ToString::to_string).collect(),
            commits: w
                .commits
                .iter()
                .map(|(k, d)| (k.to_string(), d.to_string()))
                .collect(),
        }
    }
}

/// Search effort and wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub nodes: u64,
    pub completions: u64,
    pub ms: u64,
}

impl StatsReport {
    pub fn new(stats: SearchStats, ms: u64) -> Self {
        StatsReport { nodes: stats.nodes, completions: stats.completions, ms }
    }
}

/// The report for one `check`, `verify`, or `prefixes` run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    /// The input as named on the command line: a file path or `corpus:<name>`.
    pub input: String,
    pub criterion: String,
    pub satisfied: bool,
    /// Present whenever the run produced or was given a valid witness.
    pub witness: Option<WitnessReport>,
    /// Prefix lengths that fail; empty for single-history verdicts.
    pub prefix_failures: Vec<usize>,
    pub stats: StatsReport,
}

/// The report for one `fuzz` run: how many histories satisfied each
/// criterion, plus the implication counters. Every counter in
/// `required_zero` is a genuine defect if positive; `tms2_without_du` is
/// tallied without judgement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub count: usize,
    pub satisfied: BTreeMap<String, usize>,
    pub sequential: usize,
    pub unique_writes: usize,
    pub required_zero: BTreeMap<String, usize>,
    /// Opacity without deferred-update opacity: expected strict-containment
    /// witnesses, counted for interest.
    pub opaque_but_not_du: usize,
    pub tms2_without_du: usize,
    pub violation: bool,
}
