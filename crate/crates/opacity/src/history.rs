//! Events, histories, and the structural relations every criterion builds on.
//!
//! A [`History`] is a finite interleaved sequence of invocation and response
//! events of transactional operations (`read`, `write`, `tryC`, `tryA`)
//! performed by transactions over named t-objects. [`History::validate`]
//! enforces well-formedness once; everything else is a pure query over the
//! validated sequence, so histories are safe to share freely.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Transaction identifier. Ids start at 1; the implicit initializing
/// transaction (which writes the initial value of every t-object and commits
/// before anything else) is never materialized as events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxnId(pub u32);

impl fmt::Display for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

impl From<u32> for TxnId {
    fn from(id: u32) -> Self {
        TxnId(id)
    }
}

/// Name of a transactional object. Equality is exact (case-sensitive) string
/// match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TObjectId(pub String);

impl TObjectId {
    pub fn new(name: impl Into<String>) -> Self {
        TObjectId(name.into())
    }
}

impl fmt::Display for TObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TObjectId {
    fn from(name: &str) -> Self {
        TObjectId(name.to_owned())
    }
}

/// A response payload: either an integer from the value domain or one of the
/// distinguished markers (`ok` for writes, `C` for commit, `A` for abort).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Ok,
    Commit,
    Abort,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Ok => f.write_str("ok"),
            Value::Commit => f.write_str("C"),
            Value::Abort => f.write_str("A"),
        }
    }
}

/// One of the four transactional operations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Read(TObjectId),
    Write(TObjectId, i64),
    TryC,
    TryA,
}

impl Action {
    /// The t-object this operation touches, if any.
    #[must_use]
    pub fn object(&self) -> Option<&TObjectId> {
        match self {
            Action::Read(x) | Action::Write(x, _) => Some(x),
            Action::TryC | Action::TryA => None,
        }
    }
}

/// Whether an event is the invocation or the response of its operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Invocation,
    Response,
}

/// A single history event: one transaction invoking or completing one
/// operation. `result` is present exactly on responses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub txn: TxnId,
    pub phase: Phase,
    pub action: Action,
    pub result: Option<Value>,
}

impl Event {
    /// An invocation event.
    pub fn inv(txn: TxnId, action: Action) -> Self {
        Event {
            txn,
            phase: Phase::Invocation,
            action,
            result: None,
        }
    }

    /// A response event carrying `result`.
    pub fn res(txn: TxnId, action: Action, result: Value) -> Self {
        Event {
            txn,
            phase: Phase::Response,
            action,
            result: Some(result),
        }
    }

    /// True for a response whose result is the abort marker.
    #[must_use]
    pub fn is_abort_response(&self) -> bool {
        self.phase == Phase::Response && self.result == Some(Value::Abort)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            Phase::Invocation => match &self.action {
                Action::Read(x) => write!(f, "inv {} read {x}", self.txn),
                Action::Write(x, v) => write!(f, "inv {} write {x} {v}", self.txn),
                Action::TryC => write!(f, "inv {} tryc", self.txn),
                Action::TryA => write!(f, "inv {} trya", self.txn),
            },
            Phase::Response => {
                let r = self.result.expect("response carries a result");
                match &self.action {
                    Action::Read(_) => write!(f, "res {} read {r}", self.txn),
                    Action::Write(_, _) => write!(f, "res {} write {r}", self.txn),
                    Action::TryC => write!(f, "res {} tryc {r}", self.txn),
                    Action::TryA => write!(f, "res {} trya {r}", self.txn),
                }
            }
        }
    }
}

/// The completion state of one transaction within a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TxnStatus {
    /// Last event is a response carrying `C`.
    Committed,
    /// Last event is a response carrying `A`.
    Aborted,
    /// `tryC` invoked but not yet responded.
    CommitPending,
    /// Every operation responded, but the transaction never attempted to
    /// commit or abort: complete, yet not t-complete.
    CompleteNotTComplete,
    /// A read, write, or tryA invocation is still awaiting its response.
    OpIncomplete,
}

impl TxnStatus {
    /// Ended with `C` or `A`.
    #[must_use]
    pub fn is_t_complete(self) -> bool {
        matches!(self, TxnStatus::Committed | TxnStatus::Aborted)
    }

    /// Last event is a response (no operation pending).
    #[must_use]
    pub fn is_complete(self) -> bool {
        !matches!(self, TxnStatus::CommitPending | TxnStatus::OpIncomplete)
    }
}

/// A single well-formedness violation found by [`History::validate`],
/// pointing at the offending event index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event {index}: {reason}")]
pub struct Malformed {
    pub index: usize,
    pub reason: String,
}

/// Errors from history queries.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryError {
    #[error("prefix index {index} out of range (history has {len} events)")]
    OutOfRange { index: usize, len: usize },
    #[error("transaction {0} does not participate in the history")]
    UnknownTxn(TxnId),
}

/// A finite, well-formed sequence of events. Construct via
/// [`History::validate`] (or [`History::empty`]); prefixes of well-formed
/// histories stay well-formed and skip revalidation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct History {
    events: Vec<Event>,
}

impl History {
    /// The empty history (vacuously well-formed).
    #[must_use]
    pub fn empty() -> Self {
        History { events: Vec::new() }
    }

    /// Checks every well-formedness rule and returns the history, or every
    /// violation found together with the offending event index:
    /// per-transaction alternation of invocations and matching responses,
    /// nothing after a `C`/`A` response, at most one read per (transaction,
    /// object) pair, result domains per operation, and positive ids.
    pub fn validate(events: Vec<Event>) -> Result<Self, Vec<Malformed>> {
        #[derive(Default)]
        struct TxnState {
            pending: Option<Action>,
            ended: bool,
            read: BTreeSet<TObjectId>,
        }
        let mut violations = Vec::new();
        let mut state: BTreeMap<TxnId, TxnState> = BTreeMap::new();
        for (index, e) in events.iter().enumerate() {
            let mut bad = |reason: String| violations.push(Malformed { index, reason });
            if e.txn.0 == 0 {
                bad("transaction ids start at T1".to_owned());
            }
            let st = state.entry(e.txn).or_default();
            if st.ended {
                bad(format!("event of {} after it already ended with C or A", e.txn));
            }
            match e.phase {
                Phase::Invocation => {
                    if e.result.is_some() {
                        bad("invocation must not carry a result".to_owned());
                    }
                    if let Some(p) = &st.pending {
                        bad(format!("invocation while {p:?} of {} is pending", e.txn));
                    }
                    if let Action::Read(x) = &e.action {
                        if !st.read.insert(x.clone()) {
                            bad(format!("{} reads {x} more than once", e.txn));
                        }
                    }
                    st.pending = Some(e.action.clone());
                }
                Phase::Response => {
                    match st.pending.take() {
                        None => bad(format!("response of {} without a pending invocation", e.txn)),
                        Some(p) if p != e.action => bad(format!(
                            "response action {:?} does not match pending {p:?}",
                            e.action
                        )),
                        Some(_) => {}
                    }
                    match (&e.action, e.result) {
                        (Action::Read(_), Some(Value::Int(_) | Value::Abort))
                        | (Action::Write(_, _), Some(Value::Ok | Value::Abort))
                        | (Action::TryC, Some(Value::Commit | Value::Abort))
                        | (Action::TryA, Some(Value::Abort)) => {}
                        (_, None) => bad("response must carry a result".to_owned()),
                        (_, Some(r)) => bad(format!("result {r} invalid for {:?}", e.action)),
                    }
                    if matches!(e.result, Some(Value::Commit | Value::Abort)) {
                        st.ended = true;
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(History { events })
        } else {
            Err(violations)
        }
    }

    /// Builds a history that is well-formed by construction (prefixes,
    /// completions, block concatenations). Checked in debug builds.
    pub(crate) fn from_events_unchecked(events: Vec<Event>) -> Self {
        debug_assert!(
            History::validate(events.clone()).is_ok(),
            "internally constructed history must be well-formed"
        );
        History { events }
    }

    #[must_use]
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.events.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Participating transactions, ascending by id.
    #[must_use]
    pub fn txns(&self) -> Vec<TxnId> {
        let set: BTreeSet<TxnId> = self.events.iter().map(|e| e.txn).collect();
        set.into_iter().collect()
    }

    #[must_use]
    pub fn participates(&self, k: TxnId) -> bool {
        self.events.iter().any(|e| e.txn == k)
    }

    /// The first `i` events. Prefixes of well-formed histories are
    /// well-formed, so no revalidation happens.
    pub fn prefix(&self, i: usize) -> Result<History, HistoryError> {
        if i > self.events.len() {
            return Err(HistoryError::OutOfRange {
                index: i,
                len: self.events.len(),
            });
        }
        Ok(History {
            events: self.events[..i].to_vec(),
        })
    }

    /// The subsequence of events belonging to `k` (empty if absent).
    #[must_use]
    pub fn projection(&self, k: TxnId) -> Vec<Event> {
        self.events.iter().filter(|e| e.txn == k).cloned().collect()
    }

    /// Index of `k`'s first event.
    #[must_use]
    pub fn first_event_index(&self, k: TxnId) -> Option<usize> {
        self.events.iter().position(|e| e.txn == k)
    }

    /// Index of `k`'s last event.
    #[must_use]
    pub fn last_event_index(&self, k: TxnId) -> Option<usize> {
        self.events.iter().rposition(|e| e.txn == k)
    }

    /// Completion state of `k` in this history.
    pub fn status(&self, k: TxnId) -> Result<TxnStatus, HistoryError> {
        let last = self
            .events
            .iter()
            .rev()
            .find(|e| e.txn == k)
            .ok_or(HistoryError::UnknownTxn(k))?;
        Ok(match (last.phase, &last.action, last.result) {
            (Phase::Response, _, Some(Value::Commit)) => TxnStatus::Committed,
            (Phase::Response, _, Some(Value::Abort)) => TxnStatus::Aborted,
            (Phase::Response, _, _) => TxnStatus::CompleteNotTComplete,
            (Phase::Invocation, Action::TryC, _) => TxnStatus::CommitPending,
            (Phase::Invocation, _, _) => TxnStatus::OpIncomplete,
        })
    }

    /// Statuses of every participating transaction in one pass.
    #[must_use]
    pub fn statuses(&self) -> BTreeMap<TxnId, TxnStatus> {
        self.txns()
            .into_iter()
            .map(|k| (k, self.status(k).expect("txns() yields participants")))
            .collect()
    }

    /// Real-time precedence: `k` is t-complete and its last event precedes
    /// `m`'s first event.
    pub fn real_time_precedes(&self, k: TxnId, m: TxnId) -> Result<bool, HistoryError> {
        let last_k = self
            .last_event_index(k)
            .ok_or(HistoryError::UnknownTxn(k))?;
        let first_m = self
            .first_event_index(m)
            .ok_or(HistoryError::UnknownTxn(m))?;
        Ok(self.status(k)?.is_t_complete() && last_k < first_m)
    }

    /// Neither transaction real-time-precedes the other.
    pub fn overlaps(&self, k: TxnId, m: TxnId) -> Result<bool, HistoryError> {
        Ok(!self.real_time_precedes(k, m)? && !self.real_time_precedes(m, k)?)
    }

    /// Read and write sets of `k`, by invocation (a pending operation still
    /// counts: completions abort it, and the sets feed conflict and
    /// uniqueness predicates only).
    pub fn read_write_sets(
        &self,
        k: TxnId,
    ) -> Result<(BTreeSet<TObjectId>, BTreeSet<TObjectId>), HistoryError> {
        if !self.participates(k) {
            return Err(HistoryError::UnknownTxn(k));
        }
        let mut rset = BTreeSet::new();
        let mut wset = BTreeSet::new();
        for e in self.events.iter().filter(|e| e.txn == k) {
            if e.phase == Phase::Invocation {
                match &e.action {
                    Action::Read(x) => {
                        rset.insert(x.clone());
                    }
                    Action::Write(x, _) => {
                        wset.insert(x.clone());
                    }
                    Action::TryC | Action::TryA => {}
                }
            }
        }
        Ok((rset, wset))
    }

    /// The live set of `k`: every transaction (including `k`) whose event
    /// span neither lies wholly before nor wholly after `k`'s span.
    pub fn live_set(&self, k: TxnId) -> Result<BTreeSet<TxnId>, HistoryError> {
        let first_k = self
            .first_event_index(k)
            .ok_or(HistoryError::UnknownTxn(k))?;
        let last_k = self.last_event_index(k).expect("participant has a last event");
        Ok(self
            .txns()
            .into_iter()
            .filter(|&m| {
                let first_m = self.first_event_index(m).expect("participant");
                let last_m = self.last_event_index(m).expect("participant");
                last_m >= first_k && first_m <= last_k
            })
            .collect())
    }

    /// Live-set precedence: every member of `k`'s live set is complete and
    /// ends before `m`'s first event.
    pub fn ls_precedes(&self, k: TxnId, m: TxnId) -> Result<bool, HistoryError> {
        let first_m = self
            .first_event_index(m)
            .ok_or(HistoryError::UnknownTxn(m))?;
        let lset = self.live_set(k)?;
        Ok(lset.into_iter().all(|t| {
            self.status(t).expect("live-set member participates").is_complete()
                && self.last_event_index(t).expect("participant") < first_m
        }))
    }

    /// Every invocation is immediately followed by its matching response
    /// (operation-atomic interleaving).
    #[must_use]
    pub fn is_sequential(&self) -> bool {
        let mut i = 0;
        while i < self.events.len() {
            let e = &self.events[i];
            if e.phase == Phase::Invocation {
                match self.events.get(i + 1) {
                    Some(r) if r.phase == Phase::Response && r.txn == e.txn => i += 2,
                    _ => return false,
                }
            } else {
                i += 1;
            }
        }
        true
    }

    /// For every read response with a non-abort result, the set of
    /// transactions whose `tryC` invocation occurs strictly before that
    /// response. These are the only transactions whose blocks survive into
    /// the read's local serialization (plus the reader itself, which is
    /// always retained).
    #[must_use]
    pub fn visible_writers(&self) -> BTreeMap<(TxnId, TObjectId), BTreeSet<TxnId>> {
        let mut invoked: BTreeSet<TxnId> = BTreeSet::new();
        let mut map = BTreeMap::new();
        for e in &self.events {
            match (e.phase, &e.action) {
                (Phase::Invocation, Action::TryC) => {
                    invoked.insert(e.txn);
                }
                (Phase::Response, Action::Read(x)) if e.result != Some(Value::Abort) => {
                    map.insert((e.txn, x.clone()), invoked.clone());
                }
                _ => {}
            }
        }
        map
    }
}

impl fmt::Display for History {
    /// One event per line, in the textual history format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
