//! Serialization witnesses: finding them, verifying them, and transforming
//! them.
//!
//! A [`Witness`] names a commit decision for every pending `tryC` and a total
//! order over the participating transactions. [`verify_witness`] replays the
//! witness constructively — complete the history, concatenate the blocks,
//! check every constraint from scratch — and reports all violations.
//! [`search`] explores completions and orders with a pruned depth-first
//! search; [`naive_search`] does the same by brute force over all
//! permutations, sharing no pruning logic, so the two can cross-check each
//! other. Both are deterministic and return the same first witness:
//! completions are tried in ascending binary-counter order and orders in
//! ascending lexicographic order, and the pruning only discards prefixes that
//! no extension can repair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::history::{
    Action, History, HistoryError, Phase, TObjectId, TxnId, TxnStatus, Value,
};
use crate::sequential::{
    commit_pending_txns, complete_history, decisions_from_mask, equivalent, illegal_reads,
    local_serialization, CommitDecision, IllegalRead, InitialValues,
};

/// Which obligations a serialization must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    /// Real-time order and sequential legality.
    FinalState,
    /// Final-state obligations plus per-read local legality (deferred
    /// update).
    DuOpacity,
    /// Final-state obligations plus the read-commit order: a transaction
    /// that read before a writer entered its commit phase stays before it.
    Ghs,
    /// Final-state obligations plus the conflict order: a committed writer
    /// whose commit finished before a conflicting reader entered its commit
    /// phase stays before it.
    Tms2,
}

/// A proposed serialization: how to resolve each pending `tryC`, and the
/// order in which to arrange the transactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub order: Vec<TxnId>,
    pub commits: BTreeMap<TxnId, CommitDecision>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self.order.iter().map(ToString::to_string).join(",");
        if self.commits.is_empty() {
            write!(f, "{order}")
        } else {
            let commits = self
                .commits
                .iter()
                .map(|(k, d)| format!("{k}:{d}"))
                .join(",");
            write!(f, "{order} with {commits}")
        }
    }
}

/// The order constraints beyond real time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    ReadCommit,
    Conflict,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintKind::ReadCommit => f.write_str("read-commit order"),
            ConstraintKind::Conflict => f.write_str("conflict order"),
        }
    }
}

/// One broken obligation found while verifying a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `before` is t-complete before `after` begins, yet the order reverses
    /// them.
    RealTime { before: TxnId, after: TxnId },
    /// A read-commit or conflict constraint is reversed.
    OrderConstraint {
        kind: ConstraintKind,
        before: TxnId,
        after: TxnId,
    },
    /// A read is illegal in the serialization itself.
    IllegalRead(IllegalRead),
    /// A read is illegal in its own local serialization.
    IllegalLocalRead(IllegalRead),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RealTime { before, after } => {
                write!(f, "{before} finishes before {after} starts, but the order reverses them")
            }
            Violation::OrderConstraint { kind, before, after } => {
                write!(f, "{kind} places {before} before {after}, but the order reverses them")
            }
            Violation::IllegalRead(ir) => write!(f, "{ir}"),
            Violation::IllegalLocalRead(ir) => write!(f, "in its local serialization, {ir}"),
        }
    }
}

/// Errors from witness search, verification, and transformation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("history has {txns} transactions, beyond the brute-force bound of {bound}")]
    TooLarge { txns: usize, bound: usize },
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("witness violates {} obligation(s)", .0.len())]
    InvalidWitness(Vec<Violation>),
    #[error("live-set hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// Search effort counters. `nodes` counts depth-first states visited;
/// `completions` counts commit-decision assignments tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub completions: u64,
}

/// Why an unplaced transaction could not be appended to a partial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockReason {
    /// An order constraint demands this other transaction first.
    PredecessorUnplaced(TxnId),
    /// One of its reads would be illegal in the serialization.
    IllegalRead(IllegalRead),
    /// One of its reads would be illegal in its local serialization.
    IllegalLocalRead(IllegalRead),
}

impl fmt::Display for BlockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockReason::PredecessorUnplaced(p) => write!(f, "{p} must come first"),
            BlockReason::IllegalRead(ir) => write!(f, "{ir}"),
            BlockReason::IllegalLocalRead(ir) => write!(f, "in its local serialization, {ir}"),
        }
    }
}

/// How far one completion got before every extension was blocked: the
/// deepest placed prefix reached, and why each remaining transaction could
/// not follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionFailure {
    pub commits: BTreeMap<TxnId, CommitDecision>,
    pub deepest: Vec<TxnId>,
    pub blocked: Vec<(TxnId, BlockReason)>,
}

/// Evidence that no witness exists: one failure report per completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    pub failures: Vec<CompletionFailure>,
}

/// The result of a witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Satisfied(Witness, SearchStats),
    Refuted(Refutation, SearchStats),
}

impl SearchOutcome {
    #[must_use]
    pub fn is_satisfied(&self) -> bool {
        matches!(self, SearchOutcome::Satisfied(_, _))
    }

    #[must_use]
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SearchOutcome::Satisfied(w, _) => Some(w),
            SearchOutcome::Refuted(_, _) => None,
        }
    }

    #[must_use]
    pub fn stats(&self) -> SearchStats {
        match self {
            SearchOutcome::Satisfied(_, s) | SearchOutcome::Refuted(_, s) => *s,
        }
    }
}

/// All real-time precedence pairs of `h`.
#[must_use]
pub fn rt_pairs(h: &History) -> Vec<(TxnId, TxnId)> {
    let txns = h.txns();
    let mut out = Vec::new();
    for &k in &txns {
        for &m in &txns {
            if k != m && h.real_time_precedes(k, m).expect("participants") {
                out.push((k, m));
            }
        }
    }
    out
}

/// Read-commit order pairs: `(k, m)` whenever some read of `k` on an object
/// `m` writes received its response before `m`, a committed transaction,
/// invoked `tryC`.
#[must_use]
pub fn ghs_pairs(h: &History) -> Vec<(TxnId, TxnId)> {
    let txns = h.txns();
    let committed_writers: Vec<(TxnId, BTreeSet<TObjectId>, usize)> = txns
        .iter()
        .filter(|&&m| h.status(m) == Ok(TxnStatus::Committed))
        .map(|&m| {
            let (_, wset) = h.read_write_sets(m).expect("participant");
            let inv_tryc = h
                .events()
                .iter()
                .position(|e| e.txn == m && e.phase == Phase::Invocation && e.action == Action::TryC)
                .expect("committed transaction invoked tryC");
            (m, wset, inv_tryc)
        })
        .collect();
    let mut out = BTreeSet::new();
    for (i, e) in h.events().iter().enumerate() {
        if e.phase != Phase::Response {
            continue;
        }
        let Action::Read(x) = &e.action else { continue };
        for (m, wset, inv_tryc) in &committed_writers {
            if *m != e.txn && wset.contains(x) && i < *inv_tryc {
                out.insert((e.txn, *m));
            }
        }
    }
    out.into_iter().collect()
}

/// Conflict order pairs: `(a, b)` whenever committed `a` wrote an object `b`
/// reads and `a`'s commit response precedes `b`'s `tryC` invocation.
#[must_use]
pub fn tms2_pairs(h: &History) -> Vec<(TxnId, TxnId)> {
    let txns = h.txns();
    let tryc_inv: BTreeMap<TxnId, usize> = txns
        .iter()
        .filter_map(|&k| {
            h.events()
                .iter()
                .position(|e| e.txn == k && e.phase == Phase::Invocation && e.action == Action::TryC)
                .map(|i| (k, i))
        })
        .collect();
    let mut out = Vec::new();
    for &a in &txns {
        if h.status(a) != Ok(TxnStatus::Committed) {
            continue;
        }
        let res_tryc = h
            .events()
            .iter()
            .position(|e| e.txn == a && e.phase == Phase::Response && e.action == Action::TryC)
            .expect("committed transaction has a tryC response");
        let (_, wset_a) = h.read_write_sets(a).expect("participant");
        for &b in &txns {
            if a == b {
                continue;
            }
            let Some(&inv_b) = tryc_inv.get(&b) else { continue };
            if res_tryc < inv_b {
                let (rset_b, _) = h.read_write_sets(b).expect("participant");
                if wset_a.intersection(&rset_b).next().is_some() {
                    out.push((a, b));
                }
            }
        }
    }
    out
}

fn mode_pairs(h: &History, mode: SearchMode) -> Vec<(ConstraintKind, TxnId, TxnId)> {
    match mode {
        SearchMode::FinalState | SearchMode::DuOpacity => Vec::new(),
        SearchMode::Ghs => ghs_pairs(h)
            .into_iter()
            .map(|(a, b)| (ConstraintKind::ReadCommit, a, b))
            .collect(),
        SearchMode::Tms2 => tms2_pairs(h)
            .into_iter()
            .map(|(a, b)| (ConstraintKind::Conflict, a, b))
            .collect(),
    }
}

/// Concatenates the transactions' blocks of `completed` in the given order.
#[must_use]
pub fn build_serialization(completed: &History, order: &[TxnId]) -> History {
    let mut events = Vec::with_capacity(completed.len());
    for &k in order {
        events.extend(completed.projection(k));
    }
    History::from_events_unchecked(events)
}

fn validate_shape(h: &History, w: &Witness) -> Result<(), SearchError> {
    let mut sorted = w.order.clone();
    sorted.sort_unstable();
    if sorted != h.txns() {
        return Err(SearchError::MalformedWitness(
            "order is not a permutation of the participating transactions".to_owned(),
        ));
    }
    let keys: Vec<TxnId> = w.commits.keys().copied().collect();
    if keys != commit_pending_txns(h) {
        return Err(SearchError::MalformedWitness(
            "commit decisions must cover exactly the transactions with a pending tryC".to_owned(),
        ));
    }
    Ok(())
}

/// Replays `w` against `h` from first principles and reports every broken
/// obligation: completes the history with the witness's decisions, builds
/// the serialization by block concatenation, and checks real-time pairs,
/// mode-specific order pairs, sequential legality, and (for deferred update)
/// each read against its own local serialization. Independent of the pruned
/// search: it shares none of its incremental state.
pub fn verify_witness(
    h: &History,
    mode: SearchMode,
    w: &Witness,
    init: &InitialValues,
) -> Result<(), SearchError> {
    validate_shape(h, w)?;
    let completed = complete_history(h, &w.commits).expect("shape-checked decisions");
    let s = build_serialization(&completed, &w.order);
    debug_assert!(equivalent(&s, &completed), "block concatenation preserves projections");
    let pos: BTreeMap<TxnId, usize> = w.order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut violations = Vec::new();
    for (before, after) in rt_pairs(h) {
        if pos[&before] > pos[&after] {
            violations.push(Violation::RealTime { before, after });
        }
    }
    for (kind, before, after) in mode_pairs(h, mode) {
        if pos[&before] > pos[&after] {
            violations.push(Violation::OrderConstraint { kind, before, after });
        }
    }
    violations.extend(illegal_reads(&s, init).into_iter().map(Violation::IllegalRead));
    if mode == SearchMode::DuOpacity {
        for e in completed.events() {
            let Action::Read(x) = &e.action else { continue };
            if e.phase != Phase::Response || !matches!(e.result, Some(Value::Int(_))) {
                continue;
            }
            let ls = local_serialization(&s, h, e.txn, x)
                .expect("value-returning reads of the completion occur in the original history");
            violations.extend(
                illegal_reads(&ls, init)
                    .into_iter()
                    .filter(|ir| ir.txn == e.txn && &ir.object == x)
                    .map(Violation::IllegalLocalRead),
            );
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SearchError::InvalidWitness(violations))
    }
}

/// One read obligation of a transaction, precomputed for the search: the
/// observed value, the transaction's own latest preceding write if any, and
/// the writers visible to the read (those whose `tryC` invocation preceded
/// the read's response).
struct ReadOb {
    object: TObjectId,
    observed: i64,
    own: Option<i64>,
    visible: BTreeSet<TxnId>,
}

/// Per-transaction read obligations and final written values.
type Obligations = (BTreeMap<TxnId, Vec<ReadOb>>, BTreeMap<TxnId, BTreeMap<TObjectId, i64>>);

fn obligations(h: &History) -> Obligations {
    let vis = h.visible_writers();
    let mut reads = BTreeMap::new();
    let mut writes = BTreeMap::new();
    for k in h.txns() {
        let mut own: BTreeMap<TObjectId, i64> = BTreeMap::new();
        let mut obs = Vec::new();
        for e in h.projection(k) {
            match (e.phase, &e.action, e.result) {
                (Phase::Invocation, Action::Write(x, v), _) => {
                    own.insert(x.clone(), *v);
                }
                (Phase::Response, Action::Read(x), Some(Value::Int(observed))) => {
                    obs.push(ReadOb {
                        object: x.clone(),
                        observed,
                        own: own.get(x).copied(),
                        visible: vis.get(&(k, x.clone())).cloned().unwrap_or_default(),
                    });
                }
                _ => {}
            }
        }
        reads.insert(k, obs);
        writes.insert(k, own);
    }
    (reads, writes)
}

struct Engine<'a> {
    txns: &'a [TxnId],
    preds: &'a BTreeMap<TxnId, Vec<TxnId>>,
    reads: &'a BTreeMap<TxnId, Vec<ReadOb>>,
    last_writes: &'a BTreeMap<TxnId, BTreeMap<TObjectId, i64>>,
    committed: BTreeSet<TxnId>,
    du: bool,
    init: &'a InitialValues,
    budget: Option<u64>,
    nodes: &'a mut u64,
    placed: Vec<TxnId>,
    placed_set: BTreeSet<TxnId>,
    state: BTreeMap<TObjectId, i64>,
    deepest: Option<DeepestFailure>,
}

/// The longest prefix reached in one completion's search, with what blocked
/// each unplaced transaction there.
type DeepestFailure = (Vec<TxnId>, Vec<(TxnId, BlockReason)>);

impl Engine<'_> {
    /// Why `k` cannot be appended to the current prefix, if its reads say so.
    /// A read's legality depends only on the blocks placed before it, so a
    /// rejection here can never be repaired by placing more transactions
    /// later — pruning on it keeps the search exhaustive.
    fn read_block_reason(&self, k: TxnId) -> Option<BlockReason> {
        for ob in &self.reads[&k] {
            let expected = ob
                .own
                .or_else(|| self.state.get(&ob.object).copied())
                .unwrap_or_else(|| self.init.get(&ob.object));
            if ob.observed != expected {
                return Some(BlockReason::IllegalRead(IllegalRead {
                    txn: k,
                    object: ob.object.clone(),
                    observed: ob.observed,
                    expected,
                }));
            }
            if self.du {
                let mut latest = None;
                for m in &self.placed {
                    if self.committed.contains(m) && ob.visible.contains(m) {
                        if let Some(&v) = self.last_writes[m].get(&ob.object) {
                            latest = Some(v);
                        }
                    }
                }
                let expected = ob.own.or(latest).unwrap_or_else(|| self.init.get(&ob.object));
                if ob.observed != expected {
                    return Some(BlockReason::IllegalLocalRead(IllegalRead {
                        txn: k,
                        object: ob.object.clone(),
                        observed: ob.observed,
                        expected,
                    }));
                }
            }
        }
        None
    }

    fn dfs(&mut self) -> Result<bool, SearchError> {
        *self.nodes += 1;
        if let Some(b) = self.budget {
            if *self.nodes > b {
                return Err(SearchError::BudgetExceeded { nodes: *self.nodes });
            }
        }
        if self.placed.len() == self.txns.len() {
            return Ok(true);
        }
        let mut blocked = Vec::new();
        let candidates: Vec<TxnId> = self
            .txns
            .iter()
            .copied()
            .filter(|k| !self.placed_set.contains(k))
            .collect();
        for k in candidates {
            if let Some(&p) = self.preds[&k].iter().find(|p| !self.placed_set.contains(p)) {
                blocked.push((k, BlockReason::PredecessorUnplaced(p)));
                continue;
            }
            if let Some(reason) = self.read_block_reason(k) {
                blocked.push((k, reason));
                continue;
            }
            self.placed.push(k);
            self.placed_set.insert(k);
            let undo: Vec<(TObjectId, Option<i64>)> = if self.committed.contains(&k) {
                self.last_writes[&k]
                    .iter()
                    .map(|(x, &v)| (x.clone(), self.state.insert(x.clone(), v)))
                    .collect()
            } else {
                Vec::new()
            };
            if self.dfs()? {
                return Ok(true);
            }
            for (x, old) in undo.into_iter().rev() {
                match old {
                    Some(v) => self.state.insert(x, v),
                    None => self.state.remove(&x),
                };
            }
            self.placed_set.remove(&k);
            self.placed.pop();
        }
        if self.deepest.as_ref().is_none_or(|(d, _)| self.placed.len() > d.len()) {
            self.deepest = Some((self.placed.clone(), blocked));
        }
        Ok(false)
    }
}

/// Searches for a witness: completions in ascending binary-counter order
/// (abort = 0, commit = 1 over the pending `tryC`s in ascending id order),
/// and within each completion a depth-first search over orders that places
/// transactions in ascending id order and prunes a candidate only when an
/// order constraint or a read obligation already rules out every extension.
/// The first witness found is therefore the lexicographically least valid
/// one, matching [`naive_search`] exactly. On refutation, reports the
/// deepest prefix reached per completion. `budget` caps total search nodes.
pub fn search(
    h: &History,
    mode: SearchMode,
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<SearchOutcome, SearchError> {
    let txns = h.txns();
    let pending = commit_pending_txns(h);
    assert!(pending.len() < 63, "too many pending tryCs to enumerate completions");
    let mut preds: BTreeMap<TxnId, Vec<TxnId>> =
        txns.iter().map(|&k| (k, Vec::new())).collect();
    let constraints: Vec<(TxnId, TxnId)> = rt_pairs(h)
        .into_iter()
        .chain(mode_pairs(h, mode).into_iter().map(|(_, a, b)| (a, b)))
        .collect();
    for (a, b) in constraints {
        let v = preds.get_mut(&b).expect("constraint endpoints participate");
        if !v.contains(&a) {
            v.push(a);
        }
    }
    let (reads, last_writes) = obligations(h);
    let committed_in_h: BTreeSet<TxnId> = txns
        .iter()
        .copied()
        .filter(|&k| h.status(k) == Ok(TxnStatus::Committed))
        .collect();
    let mut nodes = 0u64;
    let mut failures = Vec::new();
    for mask in 0u64..(1u64 << pending.len()) {
        let decisions = decisions_from_mask(&pending, mask);
        let mut committed = committed_in_h.clone();
        committed.extend(
            decisions
                .iter()
                .filter(|&(_, &d)| d == CommitDecision::Commit)
                .map(|(&k, _)| k),
        );
        let mut engine = Engine {
            txns: &txns,
            preds: &preds,
            reads: &reads,
            last_writes: &last_writes,
            committed,
            du: mode == SearchMode::DuOpacity,
            init,
            budget,
            nodes: &mut nodes,
            placed: Vec::with_capacity(txns.len()),
            placed_set: BTreeSet::new(),
            state: BTreeMap::new(),
            deepest: None,
        };
        if engine.dfs()? {
            let order = engine.placed.clone();
            return Ok(SearchOutcome::Satisfied(
                Witness { order, commits: decisions },
                SearchStats { nodes, completions: mask + 1 },
            ));
        }
        let (deepest, blocked) = engine.deepest.unwrap_or_default();
        failures.push(CompletionFailure { commits: decisions, deepest, blocked });
    }
    let completions = 1u64 << pending.len();
    Ok(SearchOutcome::Refuted(
        Refutation { failures },
        SearchStats { nodes, completions },
    ))
}

/// Largest transaction count [`naive_search`] accepts: beyond this the
/// factorial enumeration stops being a practical oracle.
pub const NAIVE_TXN_BOUND: usize = 7;

/// Brute-force reference search: every completion in the same ascending
/// order as [`search`], and within each, every permutation of the
/// transactions in lexicographic order, each candidate checked from scratch
/// by [`verify_witness`]. Exponential and factorial — histories beyond
/// [`NAIVE_TXN_BOUND`] transactions are rejected as
/// [`SearchError::TooLarge`]. Meant for small histories and for
/// cross-checking the pruned search.
pub fn naive_search(
    h: &History,
    mode: SearchMode,
    init: &InitialValues,
) -> Result<SearchOutcome, SearchError> {
    let txns = h.txns();
    if txns.len() > NAIVE_TXN_BOUND {
        return Err(SearchError::TooLarge { txns: txns.len(), bound: NAIVE_TXN_BOUND });
    }
    let pending = commit_pending_txns(h);
    let mut orders_tried = 0u64;
    for mask in 0u64..(1u64 << pending.len()) {
        let decisions = decisions_from_mask(&pending, mask);
        for order in txns.iter().copied().permutations(txns.len()) {
            orders_tried += 1;
            let w = Witness { order, commits: decisions.clone() };
            if verify_witness(h, mode, &w, init).is_ok() {
                return Ok(SearchOutcome::Satisfied(
                    w,
                    SearchStats { nodes: orders_tried, completions: mask + 1 },
                ));
            }
        }
    }
    Ok(SearchOutcome::Refuted(
        Refutation { failures: Vec::new() },
        SearchStats { nodes: orders_tried, completions: 1u64 << pending.len() },
    ))
}

/// Restricts a valid deferred-update witness for `h` to the prefix of its
/// first `i` events.
///
/// The order keeps its relative arrangement, dropping transactions absent
/// from the prefix. A transaction whose `tryC` is pending within the prefix
/// takes the fate the witness's serialization already assigned it: commit if
/// it committed in `h` (or the witness decided to commit it), abort if it
/// aborted (or the witness decided so). The result is a witness for the
/// prefix; it is constructed, not searched for.
pub fn project_witness(
    h: &History,
    w: &Witness,
    i: usize,
    init: &InitialValues,
) -> Result<Witness, SearchError> {
    verify_witness(h, SearchMode::DuOpacity, w, init)?;
    let prefix = h.prefix(i)?;
    let keep: BTreeSet<TxnId> = prefix.txns().into_iter().collect();
    let order: Vec<TxnId> = w.order.iter().copied().filter(|k| keep.contains(k)).collect();
    let mut commits = BTreeMap::new();
    for k in commit_pending_txns(&prefix) {
        // Once tryC is invoked, only its response can follow, so in the full
        // history this transaction is committed, aborted, or still pending.
        let fate = match h.status(k)? {
            TxnStatus::Committed => CommitDecision::Commit,
            TxnStatus::Aborted => CommitDecision::Abort,
            TxnStatus::CommitPending => w.commits[&k],
            s => unreachable!("pending tryC cannot become {s:?} later"),
        };
        commits.insert(k, fate);
    }
    Ok(Witness { order, commits })
}

/// Reorders a deferred-update witness until it also respects live-set
/// precedence, provided the history satisfies the hypothesis that whenever
/// one transaction's whole live set ends before another begins, every member
/// of that live set is complete.
///
/// Repeatedly takes the first transaction (in order position) that has a
/// live-set successor placed before it and moves it to immediately precede
/// the earliest such successor. Each moved transaction is necessarily not
/// t-complete in the history — a t-complete one would already be forced
/// ahead by real time — so its block is aborted in the completion and the
/// move cannot disturb any other transaction's reads. The result is verified
/// before being returned.
pub fn live_set_normalize(
    h: &History,
    w: &Witness,
    init: &InitialValues,
) -> Result<Witness, SearchError> {
    verify_witness(h, SearchMode::DuOpacity, w, init)?;
    let txns = h.txns();
    // Hypothesis: positional live-set precedence never involves an
    // incomplete member.
    for &k in &txns {
        let lset = h.live_set(k)?;
        for &m in &txns {
            if m == k {
                continue;
            }
            let first_m = h.first_event_index(m).expect("participant");
            let positional = lset
                .iter()
                .all(|&t| h.last_event_index(t).expect("participant") < first_m);
            if positional {
                if let Some(&t) = lset.iter().find(|&&t| {
                    !h.status(t).expect("participant").is_complete()
                }) {
                    return Err(SearchError::HypothesisViolated(format!(
                        "the live set of {k} ends before {m} starts, but its member {t} is incomplete"
                    )));
                }
            }
        }
    }
    let ls: BTreeSet<(TxnId, TxnId)> = {
        let mut set = BTreeSet::new();
        for &k in &txns {
            for &m in &txns {
                if k != m && h.ls_precedes(k, m)? {
                    set.insert((k, m));
                }
            }
        }
        set
    };
    let mut order = w.order.clone();
    let max_moves = order.len() * (order.len() + 1) + 1;
    for _ in 0..=max_moves {
        let pos: BTreeMap<TxnId, usize> =
            order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        // The first out-of-place transaction by current position, and the
        // earliest of its live-set successors sitting before it.
        let mv = order
            .iter()
            .enumerate()
            .find_map(|(i, &k)| {
                ls.iter()
                    .filter(|&&(a, _)| a == k)
                    .map(|&(_, m)| pos[&m])
                    .min()
                    .filter(|&j| j < i)
                    .map(|j| (i, j))
            });
        match mv {
            Some((from, to)) => {
                let k = order.remove(from);
                order.insert(to, k);
            }
            None => break,
        }
    }
    let pos: BTreeMap<TxnId, usize> = order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    assert!(
        ls.iter().all(|&(k, m)| pos[&k] < pos[&m]),
        "normalization terminates with live-set precedence respected"
    );
    let normalized = Witness { order, commits: w.commits.clone() };
    verify_witness(h, SearchMode::DuOpacity, &normalized, init)?;
    Ok(normalized)
}
