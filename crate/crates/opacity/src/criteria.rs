//! The correctness criteria themselves, as history-level deciders.
//!
//! Each decider reduces its criterion to a witness search in one
//! [`SearchMode`](crate::search::SearchMode):
//!
//! - **final-state opacity** — some completion has an equivalent, real-time
//!   respecting, sequentially legal arrangement;
//! - **opacity** — every prefix is final-state opaque;
//! - **deferred-update (du) opacity** — final-state obligations plus each
//!   value-returning read legal in its own local serialization;
//! - **read-commit order (ghs)** and **conflict order (tms2)** —
//!   final-state obligations plus the respective extra order constraints;
//!   both defined for sequential histories only.

use std::collections::BTreeMap;

use crate::history::{Action, History, Phase, TObjectId, TxnId};
use crate::search::{search, SearchError, SearchMode, SearchOutcome, SearchStats, Witness};
use crate::sequential::InitialValues;

/// Errors from criterion evaluation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriteriaError {
    #[error("the read-commit and conflict order criteria apply to sequential histories only")]
    NotSequential,
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Does some completion of `h` have an equivalent, real-time respecting,
/// legal t-sequential arrangement? `budget` caps search nodes.
pub fn final_state_opaque(
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<SearchOutcome, CriteriaError> {
    Ok(search(h, SearchMode::FinalState, init, budget)?)
}

/// Final-state opacity plus local legality of every value-returning read.
pub fn du_opaque(
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<SearchOutcome, CriteriaError> {
    Ok(search(h, SearchMode::DuOpacity, init, budget)?)
}

/// The verdict of [`opaque`]: which prefix lengths fail final-state opacity
/// (none means the history is opaque), the witness for the full history when
/// it has one, and the summed search effort. `budget` applies per prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpacityOutcome {
    pub prefix_failures: Vec<usize>,
    pub full_witness: Option<Witness>,
    pub stats: SearchStats,
}

impl OpacityOutcome {
    #[must_use]
    pub fn is_satisfied(&self) -> bool {
        self.prefix_failures.is_empty()
    }
}

/// Is every prefix of `h` final-state opaque? All prefix lengths from zero
/// to the full history are evaluated — no short-circuit — so a refutation
/// reports every failing prefix, not just the first.
pub fn opaque(
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<OpacityOutcome, CriteriaError> {
    let mut prefix_failures = Vec::new();
    let mut full_witness = None;
    let mut stats = SearchStats::default();
    for i in 0..=h.len() {
        let p = h.prefix(i).expect("prefix lengths in range");
        let outcome = search(&p, SearchMode::FinalState, init, budget)?;
        stats.nodes += outcome.stats().nodes;
        stats.completions += outcome.stats().completions;
        match outcome {
            SearchOutcome::Satisfied(w, _) => {
                if i == h.len() {
                    full_witness = Some(w);
                }
            }
            SearchOutcome::Refuted(_, _) => prefix_failures.push(i),
        }
    }
    Ok(OpacityOutcome { prefix_failures, full_witness, stats })
}

/// Final-state obligations plus the read-commit order constraints. Defined
/// for sequential histories; anything else is [`CriteriaError::NotSequential`].
pub fn ghs_opaque(
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<SearchOutcome, CriteriaError> {
    if !h.is_sequential() {
        return Err(CriteriaError::NotSequential);
    }
    Ok(search(h, SearchMode::Ghs, init, budget)?)
}

/// Final-state obligations plus the conflict order constraints. Unlike the
/// read-commit order criterion, this one is rendered for arbitrary
/// histories: the constraint compares commit-phase event positions, which
/// need no sequentiality to be meaningful.
pub fn tms2_order(
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<SearchOutcome, CriteriaError> {
    Ok(search(h, SearchMode::Tms2, init, budget)?)
}

/// Do the writes of `h` pin serializations down? True when no two distinct
/// transactions write the same value to the same object and no write stores
/// an object's initial value. Under this discipline a read's value
/// identifies the write it observed, and opacity and deferred-update opacity
/// coincide.
#[must_use]
pub fn unique_writes(h: &History, init: &InitialValues) -> bool {
    let mut seen: BTreeMap<(&TObjectId, i64), TxnId> = BTreeMap::new();
    for e in h.events() {
        if e.phase != Phase::Invocation {
            continue;
        }
        let Action::Write(x, v) = &e.action else { continue };
        if *v == init.get(x) {
            return false;
        }
        if let Some(&prev) = seen.get(&(x, *v)) {
            if prev != e.txn {
                return false;
            }
        } else {
            seen.insert((x, *v), e.txn);
        }
    }
    true
}
