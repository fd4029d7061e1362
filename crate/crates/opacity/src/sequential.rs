//! Completions, equivalence, and sequential legality.
//!
//! The correctness criteria all reduce to a question about t-sequential
//! histories: does some completion of the input have an equivalent,
//! legally-readable arrangement of its transactions? This module supplies the
//! building blocks of that question: enumerating completions, comparing
//! histories up to per-transaction projection, checking reads against the
//! sequential write-back semantics, and carving out the per-read local
//! serializations that the deferred-update criterion constrains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::history::{
    Action, Event, History, HistoryError, Phase, TObjectId, TxnId, TxnStatus, Value,
};

/// Initial values of t-objects, as written by the implicit initializing
/// transaction. Objects not explicitly set hold the default (zero unless
/// overridden).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InitialValues {
    overrides: BTreeMap<TObjectId, i64>,
    default: i64,
}

impl InitialValues {
    /// All objects start at zero.
    #[must_use]
    pub fn zero() -> Self {
        InitialValues::default()
    }

    /// All objects start at `default` unless individually overridden.
    #[must_use]
    pub fn with_default(default: i64) -> Self {
        InitialValues {
            overrides: BTreeMap::new(),
            default,
        }
    }

    /// Sets the initial value of one object.
    pub fn set(&mut self, object: TObjectId, value: i64) {
        self.overrides.insert(object, value);
    }

    /// The initial value of `object`.
    #[must_use]
    pub fn get(&self, object: &TObjectId) -> i64 {
        self.overrides.get(object).copied().unwrap_or(self.default)
    }
}

/// How a completion resolves a transaction whose `tryC` is pending: commit it
/// or abort it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommitDecision {
    Commit,
    Abort,
}

impl CommitDecision {
    #[must_use]
    pub fn result(self) -> Value {
        match self {
            CommitDecision::Commit => Value::Commit,
            CommitDecision::Abort => Value::Abort,
        }
    }
}

impl fmt::Display for CommitDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitDecision::Commit => f.write_str("C"),
            CommitDecision::Abort => f.write_str("A"),
        }
    }
}

/// Errors from completion construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompletionError {
    #[error("no commit decision for {0}, whose tryC is pending")]
    MissingDecision(TxnId),
    #[error("commit decision for {0}, whose tryC is not pending")]
    SpuriousDecision(TxnId),
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// Transactions whose `tryC` is pending, ascending by id. These are the only
/// free choices a completion has.
#[must_use]
pub fn commit_pending_txns(h: &History) -> Vec<TxnId> {
    h.txns()
        .into_iter()
        .filter(|&k| h.status(k) == Ok(TxnStatus::CommitPending))
        .collect()
}

/// The canonical completion of `h` under the given commit decisions: for
/// every transaction that is not yet t-complete, closing events are appended
/// after the end of `h`, grouped per transaction in ascending id order. A
/// pending read, write, or tryA receives an abort response; a pending `tryC`
/// receives the decided `C` or `A`; a transaction that never attempted to
/// commit gets `tryC` immediately answered `A`. Appending (rather than
/// splicing) leaves every first event and every t-complete transaction's last
/// event in place, so the completion has exactly the real-time order of `h`.
pub fn complete_history(
    h: &History,
    decisions: &BTreeMap<TxnId, CommitDecision>,
) -> Result<History, CompletionError> {
    let pending: BTreeSet<TxnId> = commit_pending_txns(h).into_iter().collect();
    for &k in decisions.keys() {
        if !pending.contains(&k) {
            return Err(CompletionError::SpuriousDecision(k));
        }
    }
    let mut events = h.events().to_vec();
    for k in h.txns() {
        match h.status(k)? {
            TxnStatus::Committed | TxnStatus::Aborted => {}
            TxnStatus::CommitPending => {
                let d = decisions
                    .get(&k)
                    .copied()
                    .ok_or(CompletionError::MissingDecision(k))?;
                events.push(Event::res(k, Action::TryC, d.result()));
            }
            TxnStatus::CompleteNotTComplete => {
                events.push(Event::inv(k, Action::TryC));
                events.push(Event::res(k, Action::TryC, Value::Abort));
            }
            TxnStatus::OpIncomplete => {
                let last = h
                    .projection(k)
                    .last()
                    .expect("participant has events")
                    .clone();
                events.push(Event::res(k, last.action, Value::Abort));
            }
        }
    }
    Ok(History::from_events_unchecked(events))
}

/// Every canonical completion of `h` with the commit decisions that produced
/// it, one per assignment of decisions to the pending `tryC`s. Ordered by
/// treating the decisions as a binary counter over the pending transactions
/// in ascending id order (abort = 0, commit = 1), counting up from all-abort.
/// The count is exponential in the number of pending `tryC`s.
#[must_use]
pub fn completions(h: &History) -> Vec<(BTreeMap<TxnId, CommitDecision>, History)> {
    let pending = commit_pending_txns(h);
    assert!(pending.len() < 63, "too many pending tryCs to enumerate completions");
    let mut out = Vec::with_capacity(1 << pending.len());
    for mask in 0u64..(1u64 << pending.len()) {
        let decisions = decisions_from_mask(&pending, mask);
        let completed =
            complete_history(h, &decisions).expect("decisions cover exactly the pending set");
        out.push((decisions, completed));
    }
    out
}

/// The decision map encoded by `mask` over `pending` (bit *i* set commits
/// `pending[i]`).
#[must_use]
pub fn decisions_from_mask(pending: &[TxnId], mask: u64) -> BTreeMap<TxnId, CommitDecision> {
    pending
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let d = if mask & (1 << i) != 0 {
                CommitDecision::Commit
            } else {
                CommitDecision::Abort
            };
            (k, d)
        })
        .collect()
}

/// Histories are equivalent when the same transactions participate and each
/// performs the same event sequence in both.
#[must_use]
pub fn equivalent(a: &History, b: &History) -> bool {
    let txns = a.txns();
    txns == b.txns() && txns.iter().all(|&k| a.projection(k) == b.projection(k))
}

/// One read that observed a value the sequential semantics cannot produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IllegalRead {
    pub txn: TxnId,
    pub object: TObjectId,
    pub observed: i64,
    pub expected: i64,
}

impl fmt::Display for IllegalRead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} read {} as {} but the latest write it may observe is {}",
            self.txn, self.object, self.observed, self.expected
        )
    }
}

/// Every illegal read in a t-sequential history, in event order.
///
/// Walks the transactions block by block, maintaining the committed state:
/// a read must return its own transaction's latest preceding write if one
/// exists, otherwise the latest write among committed transactions whose
/// blocks precede it, otherwise the object's initial value. Reads answered
/// `A` carry no obligation. A transaction's writes reach the committed state
/// only when its block ends in `C`; aborted and unfinished blocks keep their
/// writes to themselves.
#[must_use]
pub fn illegal_reads(s: &History, init: &InitialValues) -> Vec<IllegalRead> {
    let mut bad = Vec::new();
    let mut committed: BTreeMap<TObjectId, i64> = BTreeMap::new();
    let mut block: Vec<&Event> = Vec::new();
    let flush = |block: &[&Event], committed: &mut BTreeMap<TObjectId, i64>| {
        let ends_committed = block
            .last()
            .is_some_and(|e| e.phase == Phase::Response && e.result == Some(Value::Commit));
        if ends_committed {
            for e in block {
                if e.phase == Phase::Invocation {
                    if let Action::Write(x, v) = &e.action {
                        committed.insert(x.clone(), *v);
                    }
                }
            }
        }
    };
    for e in s.events() {
        if block.last().is_some_and(|prev| prev.txn != e.txn) {
            flush(&block, &mut committed);
            block.clear();
        }
        if let (Phase::Response, Action::Read(x), Some(Value::Int(observed))) =
            (e.phase, &e.action, e.result)
        {
            let own = block.iter().rev().find_map(|p| match &p.action {
                Action::Write(y, v) if p.phase == Phase::Invocation && y == x => Some(*v),
                _ => None,
            });
            let expected = own
                .or_else(|| committed.get(x).copied())
                .unwrap_or_else(|| init.get(x));
            if observed != expected {
                bad.push(IllegalRead {
                    txn: e.txn,
                    object: x.clone(),
                    observed,
                    expected,
                });
            }
        }
        block.push(e);
    }
    flush(&block, &mut committed);
    bad
}

/// Whether every read in the t-sequential history `s` is legal.
#[must_use]
pub fn is_legal(s: &History, init: &InitialValues) -> bool {
    illegal_reads(s, init).is_empty()
}

/// Errors from local-serialization construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalSerializationError {
    #[error("{txn} has no read of {object} answered with a value")]
    NoSuchRead { txn: TxnId, object: TObjectId },
}

/// The local serialization of `s` for the read of `object` by `txn`, with
/// visibility taken from the original history `h`.
///
/// Truncate `s` just after the read's response, then drop the whole block of
/// every other transaction whose `tryC` invocation does not occur in the
/// prefix of `h` ending at that same response: transactions that had not yet
/// tried to commit when the read returned cannot have been observed by it.
/// The reading transaction's own block always stays, as the read trivially
/// observes its own earlier writes.
pub fn local_serialization(
    s: &History,
    h: &History,
    txn: TxnId,
    object: &TObjectId,
) -> Result<History, LocalSerializationError> {
    let is_the_read = |e: &Event| {
        e.txn == txn
            && e.phase == Phase::Response
            && matches!(&e.action, Action::Read(x) if x == object)
            && matches!(e.result, Some(Value::Int(_)))
    };
    let no_such_read = || LocalSerializationError::NoSuchRead {
        txn,
        object: object.clone(),
    };
    let response_in_h = h
        .events()
        .iter()
        .position(is_the_read)
        .ok_or_else(no_such_read)?;
    let retained: BTreeSet<TxnId> = h.events()[..=response_in_h]
        .iter()
        .filter(|e| e.phase == Phase::Invocation && e.action == Action::TryC)
        .map(|e| e.txn)
        .chain(std::iter::once(txn))
        .collect();
    let response_in_s = s
        .events()
        .iter()
        .position(is_the_read)
        .ok_or_else(no_such_read)?;
    let events = s.events()[..=response_in_s]
        .iter()
        .filter(|e| retained.contains(&e.txn))
        .cloned()
        .collect();
    Ok(History::from_events_unchecked(events))
}
