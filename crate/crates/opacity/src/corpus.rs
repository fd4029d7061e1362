//! A corpus of reference histories, generators for fuzzing, and a
//! differential harness over all criteria.
//!
//! The named histories pin down the boundaries between the criteria: each is
//! small enough to check by hand and exercises one separation — opaque but
//! not deferred-update opaque, final-state opaque with a non-opaque prefix,
//! deferred-update opaque while violating an order-based criterion, and so
//! on. The generators produce well-formed histories by construction:
//! [`random_history`] is deterministic in its seed, and [`enumerate_small`]
//! walks every well-formed history within small bounds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{
    du_opaque, final_state_opaque, ghs_opaque, opaque, tms2_order, unique_writes, CriteriaError,
};
use crate::history::{Action, Event, History, Phase, TObjectId, TxnId, Value};
use crate::sequential::InitialValues;

/// Errors from corpus lookups and enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown corpus history name {0:?}")]
    UnknownName(String),
    #[error("enumeration bounds yield at least {at_least} histories, over the cap of {cap}")]
    BoundsTooLarge { at_least: usize, cap: usize },
}

fn inv_read(k: u32, x: &str) -> Event {
    Event::inv(TxnId(k), Action::Read(x.into()))
}

fn res_read(k: u32, x: &str, v: i64) -> Event {
    Event::res(TxnId(k), Action::Read(x.into()), Value::Int(v))
}

fn inv_write(k: u32, x: &str, v: i64) -> Event {
    Event::inv(TxnId(k), Action::Write(x.into(), v))
}

fn res_write(k: u32, x: &str, v: i64) -> Event {
    Event::res(TxnId(k), Action::Write(x.into(), v), Value::Ok)
}

fn inv_tryc(k: u32) -> Event {
    Event::inv(TxnId(k), Action::TryC)
}

fn res_tryc(k: u32, r: Value) -> Event {
    Event::res(TxnId(k), Action::TryC, r)
}

/// Four transactions over one object, with two committed writers racing an
/// interleaved read-then-write transaction and a final reader; deferred-update
/// opaque.
#[must_use]
pub fn fig1() -> History {
    History::from_events_unchecked(vec![
        inv_write(2, "X", 1),
        res_write(2, "X", 1),
        inv_tryc(2),
        res_tryc(2, Value::Commit),
        inv_read(1, "X"),
        inv_write(3, "X", 1),
        res_read(1, "X", 1),
        res_write(3, "X", 1),
        inv_write(1, "X", 2),
        inv_tryc(3),
        res_write(1, "X", 2),
        res_tryc(3, Value::Commit),
        inv_tryc(1),
        res_tryc(1, Value::Commit),
        inv_read(4, "X"),
        res_read(4, "X", 2),
        inv_tryc(4),
        res_tryc(4, Value::Commit),
    ])
}

/// A writer whose `tryC` stays pending, one reader that observed its value,
/// and `readers` later transactions that each observed the initial value.
/// Deferred-update opaque for every `readers`: the pending writer must
/// commit (to explain the first read) and every initial-value reader must be
/// serialized before it.
#[must_use]
pub fn fig2_prefix(readers: usize) -> History {
    let mut events = vec![
        inv_write(1, "X", 1),
        res_write(1, "X", 1),
        inv_tryc(1),
        inv_read(2, "X"),
        res_read(2, "X", 1),
    ];
    for j in 0..readers {
        let k = 3 + j as u32;
        events.push(inv_read(k, "X"));
        events.push(res_read(k, "X", 0));
    }
    History::from_events_unchecked(events)
}

/// A committed writer and a committed reader of its value, where both commit
/// steps happen only after the read. The full history is final-state opaque,
/// but the prefix ending at the read's response is not — so the history is
/// not opaque.
#[must_use]
pub fn fig3_full() -> History {
    History::from_events_unchecked(vec![
        inv_write(1, "X", 1),
        res_write(1, "X", 1),
        inv_read(2, "X"),
        res_read(2, "X", 1),
        inv_tryc(1),
        inv_tryc(2),
        res_tryc(1, Value::Commit),
        res_tryc(2, Value::Commit),
    ])
}

/// The four-event prefix of [`fig3_full`] that fails final-state opacity:
/// the read observes a write whose transaction aborts in every completion.
#[must_use]
pub fn fig3_prefix() -> History {
    fig3_full().prefix(4).expect("static prefix length")
}

/// Opaque — every prefix is final-state opaque — but not deferred-update
/// opaque: when the read returned, the only writer that had entered its
/// commit phase went on to abort, so no local serialization explains the
/// value.
#[must_use]
pub fn fig4() -> History {
    History::from_events_unchecked(vec![
        inv_write(1, "X", 1),
        res_write(1, "X", 1),
        inv_write(3, "X", 1),
        res_write(3, "X", 1),
        inv_tryc(1),
        inv_read(2, "X"),
        res_read(2, "X", 1),
        inv_tryc(3),
        res_tryc(1, Value::Abort),
        res_tryc(3, Value::Commit),
    ])
}

/// Sequential history that is deferred-update opaque but violates the
/// read-commit order: the reader's second read forces it after a writer
/// that entered its commit phase only after the reader's first read.
#[must_use]
pub fn fig5() -> History {
    History::from_events_unchecked(vec![
        inv_write(1, "X", 1),
        res_write(1, "X", 1),
        inv_tryc(1),
        res_tryc(1, Value::Commit),
        inv_read(2, "X"),
        res_read(2, "X", 1),
        inv_write(3, "X", 1),
        res_write(3, "X", 1),
        inv_write(3, "Y", 1),
        res_write(3, "Y", 1),
        inv_tryc(3),
        res_tryc(3, Value::Commit),
        inv_read(2, "Y"),
        res_read(2, "Y", 1),
    ])
}

/// Sequential history that is deferred-update opaque but violates the
/// conflict order: both transactions read the initial value of `X` before
/// writing disjoint objects, so the only legal arrangement reverses their
/// commit order.
#[must_use]
pub fn fig6() -> History {
    History::from_events_unchecked(vec![
        inv_read(1, "X"),
        res_read(1, "X", 0),
        inv_read(2, "X"),
        res_read(2, "X", 0),
        inv_write(1, "X", 1),
        res_write(1, "X", 1),
        inv_write(2, "Y", 1),
        res_write(2, "Y", 1),
        inv_tryc(1),
        res_tryc(1, Value::Commit),
        inv_tryc(2),
        res_tryc(2, Value::Commit),
    ])
}

/// One named corpus history with a short description of what it separates.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub history: History,
    pub note: &'static str,
}

/// Every named corpus history, in canonical order.
#[must_use]
pub fn entries() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "fig1",
            history: fig1(),
            note: "overlapping writers and readers over one object; deferred-update opaque",
        },
        CorpusEntry {
            name: "fig2_3",
            history: fig2_prefix(3),
            note: "pending writer, one reader of its value, three initial-value readers; \
                   deferred-update opaque only by committing the pending writer",
        },
        CorpusEntry {
            name: "fig3_full",
            history: fig3_full(),
            note: "final-state opaque as a whole, but its four-event prefix is not",
        },
        CorpusEntry {
            name: "fig3_prefix",
            history: fig3_prefix(),
            note: "a read of a value whose writer aborts in every completion",
        },
        CorpusEntry {
            name: "fig4",
            history: fig4(),
            note: "opaque in every prefix, yet not deferred-update opaque",
        },
        CorpusEntry {
            name: "fig5",
            history: fig5(),
            note: "deferred-update opaque but violates the read-commit order",
        },
        CorpusEntry {
            name: "fig6",
            history: fig6(),
            note: "deferred-update opaque but violates the conflict order",
        },
    ]
}

/// Names accepted by [`reference_history`], in canonical order. The family
/// `fig2_<n>` is open-ended; the canonical list carries its three-reader
/// instance.
#[must_use]
pub fn names() -> Vec<&'static str> {
    entries().iter().map(|e| e.name).collect()
}

/// Looks up a corpus history by name. `fig2_<n>` builds the pending-writer
/// family instance with `n` initial-value readers.
pub fn reference_history(name: &str) -> Result<History, CorpusError> {
    if let Some(n) = name.strip_prefix("fig2_") {
        if let Ok(readers) = n.parse::<usize>() {
            return Ok(fig2_prefix(readers));
        }
    }
    match name {
        "fig1" => Ok(fig1()),
        "fig3_full" => Ok(fig3_full()),
        "fig3_prefix" => Ok(fig3_prefix()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        _ => Err(CorpusError::UnknownName(name.to_owned())),
    }
}

/// Where write values come from in generated histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueMode {
    /// Small colliding values (1 or 2), so reads often have several
    /// plausible writers.
    FromWrites,
    /// A global counter starting at 1: every write stores a fresh value, so
    /// the generated history satisfies the unique-writes discipline.
    UniqueWrites,
}

/// Shape parameters for [`random_history`].
#[derive(Debug, Clone)]
pub struct HistoryConfig {
    /// Number of transactions.
    pub txn_count: usize,
    /// Number of distinct t-objects ops draw from.
    pub object_count: usize,
    /// Upper bound on reads-plus-writes per transaction (at least one is
    /// always performed).
    pub max_ops_per_txn: usize,
    /// Write-value discipline.
    pub value_mode: ValueMode,
    /// Chance an otherwise complete transaction aborts at a random response.
    pub abort_probability: f64,
    /// Chance a transaction is left incomplete (a pending operation, a
    /// pending `tryC`, or no commit attempt at all, equally likely).
    pub incomplete_probability: f64,
}

impl Default for HistoryConfig {
    fn default() -> Self {
        HistoryConfig {
            txn_count: 4,
            object_count: 2,
            max_ops_per_txn: 3,
            value_mode: ValueMode::FromWrites,
            abort_probability: 0.2,
            incomplete_probability: 0.3,
        }
    }
}

fn object_name(i: usize) -> TObjectId {
    match i {
        0 => "X".into(),
        1 => "Y".into(),
        2 => "Z".into(),
        _ => TObjectId(format!("O{}", i + 1)),
    }
}

/// Generates a well-formed history, deterministically from `seed`.
///
/// Each transaction plans its reads and writes (at most one read per
/// object), then a commit attempt; incompleteness and aborts are applied per
/// the config; the per-transaction event queues are interleaved by a seeded
/// random merge, which preserves per-transaction order and thus
/// well-formedness. Read results are assigned last, drawn from the initial
/// value and every value written to the same object anywhere in the history
/// — plausible enough to be legal sometimes, free enough to violate any
/// criterion.
#[must_use]
pub fn random_history(cfg: &HistoryConfig, seed: u64) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unique_counter = 1i64;
    let mut queues: Vec<VecDeque<Event>> = Vec::new();
    for k in 1..=cfg.txn_count {
        let txn = k as u32;
        let n_ops = rng.gen_range(1..=cfg.max_ops_per_txn.max(1));
        let mut events: Vec<Event> = Vec::new();
        let mut read_objs: BTreeSet<usize> = BTreeSet::new();
        for _ in 0..n_ops {
            let obj = rng.gen_range(0..cfg.object_count.max(1));
            let name = object_name(obj);
            if rng.gen_bool(0.5) && !read_objs.contains(&obj) {
                read_objs.insert(obj);
                events.push(inv_read(txn, &name.0));
                // Placeholder result; assigned after the merge.
                events.push(res_read(txn, &name.0, 0));
            } else {
                let v = match cfg.value_mode {
                    ValueMode::FromWrites => rng.gen_range(1..=2),
                    ValueMode::UniqueWrites => {
                        let v = unique_counter;
                        unique_counter += 1;
                        v
                    }
                };
                events.push(inv_write(txn, &name.0, v));
                events.push(res_write(txn, &name.0, v));
            }
        }
        events.push(inv_tryc(txn));
        events.push(res_tryc(txn, Value::Commit));
        if rng.gen_bool(cfg.incomplete_probability) {
            match rng.gen_range(0..3u8) {
                0 => {
                    // Leave one read or write pending.
                    let invs: Vec<usize> = events
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| {
                            e.phase == Phase::Invocation && e.action != Action::TryC
                        })
                        .map(|(i, _)| i)
                        .collect();
                    let cut = invs[rng.gen_range(0..invs.len())];
                    events.truncate(cut + 1);
                }
                1 => {
                    // Leave the tryC pending.
                    events.pop();
                }
                _ => {
                    // Never attempt to commit.
                    events.pop();
                    events.pop();
                }
            }
        } else if rng.gen_bool(cfg.abort_probability) {
            let responses: Vec<usize> = events
                .iter()
                .enumerate()
                .filter(|(_, e)| e.phase == Phase::Response)
                .map(|(i, _)| i)
                .collect();
            let cut = responses[rng.gen_range(0..responses.len())];
            events[cut].result = Some(Value::Abort);
            events.truncate(cut + 1);
        }
        queues.push(events.into());
    }
    let mut merged: Vec<Event> = Vec::new();
    loop {
        let nonempty: Vec<usize> = queues
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.is_empty())
            .map(|(i, _)| i)
            .collect();
        if nonempty.is_empty() {
            break;
        }
        let pick = nonempty[rng.gen_range(0..nonempty.len())];
        merged.push(queues[pick].pop_front().expect("picked nonempty"));
    }
    let mut written: BTreeMap<TObjectId, BTreeSet<i64>> = BTreeMap::new();
    for e in &merged {
        if e.phase == Phase::Invocation {
            if let Action::Write(x, v) = &e.action {
                written.entry(x.clone()).or_default().insert(*v);
            }
        }
    }
    for e in &mut merged {
        if e.phase == Phase::Response && matches!(e.result, Some(Value::Int(_))) {
            if let Action::Read(x) = &e.action {
                let mut pool = vec![0i64];
                if let Some(vals) = written.get(x) {
                    pool.extend(vals.iter().copied());
                }
                e.result = Some(Value::Int(pool[rng.gen_range(0..pool.len())]));
            }
        }
    }
    History::from_events_unchecked(merged)
}

/// Bounds for [`enumerate_small`].
#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Maximum number of transactions.
    pub txns: usize,
    /// Maximum t-operations per transaction, the commit attempt included.
    pub max_ops: usize,
    /// Number of t-objects.
    pub objects: usize,
    /// Size of the value domain for writes and read results (`0..values`).
    pub values: i64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        // Two transactions of up to two operations each over one object with
        // a two-value domain: the largest bounds whose full prefix-closed
        // event-level enumeration (about thirty thousand histories) still
        // supports exhaustive differential checking in seconds. One more
        // transaction pushes the count past the enumeration cap.
        EnumConfig { txns: 2, max_ops: 2, objects: 1, values: 2 }
    }
}

/// Hard cap on how many histories [`enumerate_small`] will produce.
pub const ENUMERATION_CAP: usize = 500_000;

#[derive(Clone, Default)]
struct EnumTxn {
    pending: Option<Action>,
    ended: bool,
    ops_used: usize,
    read_objs: BTreeSet<usize>,
}

struct Enumerator<'a> {
    cfg: &'a EnumConfig,
    txn_state: Vec<EnumTxn>,
    appeared: usize,
}

enum UndoMove {
    Inv { txn: usize, new_txn: bool, read_obj: Option<usize> },
    Res { txn: usize, pending: Action, had_ended: bool },
}

impl Enumerator<'_> {
    /// Legal next events, in canonical order: transactions ascending (a new
    /// transaction may start only once all lower-numbered ones have
    /// appeared), and per transaction its pending response(s) or otherwise
    /// read invocations by object, write invocations by object and value,
    /// then the commit attempt.
    fn moves(&self) -> Vec<Event> {
        let mut out = Vec::new();
        let visible = self.appeared.min(self.cfg.txns - 1) + 1;
        for t in 0..visible.min(self.cfg.txns) {
            let txn = t as u32 + 1;
            let st = &self.txn_state[t];
            if st.ended {
                continue;
            }
            match &st.pending {
                Some(Action::Read(x)) => {
                    for v in 0..self.cfg.values {
                        out.push(Event::res(TxnId(txn), Action::Read(x.clone()), Value::Int(v)));
                    }
                }
                Some(Action::Write(x, v)) => {
                    out.push(Event::res(TxnId(txn), Action::Write(x.clone(), *v), Value::Ok));
                }
                Some(Action::TryC) => {
                    out.push(res_tryc(txn, Value::Commit));
                    out.push(res_tryc(txn, Value::Abort));
                }
                Some(Action::TryA) => unreachable!("enumeration never invokes tryA"),
                None => {
                    if st.ops_used < self.cfg.max_ops {
                        for obj in 0..self.cfg.objects {
                            if !st.read_objs.contains(&obj) {
                                out.push(Event::inv(TxnId(txn), Action::Read(object_name(obj))));
                            }
                        }
                        for obj in 0..self.cfg.objects {
                            for v in 0..self.cfg.values {
                                out.push(Event::inv(TxnId(txn), Action::Write(object_name(obj), v)));
                            }
                        }
                        out.push(inv_tryc(txn));
                    }
                }
            }
        }
        out
    }

    fn apply(&mut self, e: &Event) -> UndoMove {
        let t = (e.txn.0 - 1) as usize;
        match e.phase {
            Phase::Invocation => {
                let new_txn = t == self.appeared;
                if new_txn {
                    self.appeared += 1;
                }
                let st = &mut self.txn_state[t];
                st.pending = Some(e.action.clone());
                st.ops_used += 1;
                let read_obj = match &e.action {
                    Action::Read(x) => {
                        let obj = object_index(x);
                        st.read_objs.insert(obj);
                        Some(obj)
                    }
                    _ => None,
                };
                UndoMove::Inv { txn: t, new_txn, read_obj }
            }
            Phase::Response => {
                let st = &mut self.txn_state[t];
                let pending = st.pending.take().expect("response follows invocation");
                let had_ended = st.ended;
                if matches!(e.result, Some(Value::Commit | Value::Abort)) {
                    st.ended = true;
                }
                UndoMove::Res { txn: t, pending, had_ended }
            }
        }
    }

    fn undo(&mut self, u: UndoMove) {
        match u {
            UndoMove::Inv { txn, new_txn, read_obj } => {
                if new_txn {
                    self.appeared -= 1;
                }
                let st = &mut self.txn_state[txn];
                st.pending = None;
                st.ops_used -= 1;
                if let Some(obj) = read_obj {
                    st.read_objs.remove(&obj);
                }
            }
            UndoMove::Res { txn, pending, had_ended } => {
                let st = &mut self.txn_state[txn];
                st.pending = Some(pending);
                st.ended = had_ended;
            }
        }
    }

    fn walk(
        &mut self,
        events: &mut Vec<Event>,
        visit: &mut dyn FnMut(&[Event]) -> bool,
    ) -> bool {
        if !visit(events) {
            return false;
        }
        for e in self.moves() {
            let undo = self.apply(&e);
            events.push(e);
            let keep_going = self.walk(events, visit);
            events.pop();
            self.undo(undo);
            if !keep_going {
                return false;
            }
        }
        true
    }
}

fn object_index(x: &TObjectId) -> usize {
    match x.0.as_str() {
        "X" => 0,
        "Y" => 1,
        "Z" => 2,
        other => other[1..].parse::<usize>().expect("generated object name") - 1,
    }
}

/// Every well-formed history within the bounds, every prefix included, in a
/// canonical deterministic order.
///
/// The enumeration walks events one at a time: reads may return any value in
/// the domain, writes succeed, commit attempts answer `C` or `A`, and
/// transaction `k+1` may start only after transaction `k` has appeared
/// (histories differing only by transaction renaming are produced once).
/// Operation aborts and `tryA` never appear: completions already cover
/// aborted outcomes, and including them would multiply the count without
/// touching different criterion behavior. A counting pass runs first; bounds
/// that would exceed [`ENUMERATION_CAP`] return
/// [`CorpusError::BoundsTooLarge`] instead of exhausting memory.
pub fn enumerate_small(cfg: &EnumConfig) -> Result<Vec<History>, CorpusError> {
    assert!(cfg.txns >= 1 && cfg.objects >= 1 && cfg.values >= 1 && cfg.max_ops >= 1);
    let mut en = Enumerator {
        cfg,
        txn_state: vec![EnumTxn::default(); cfg.txns],
        appeared: 0,
    };
    let mut count = 0usize;
    let within_cap = en.walk(&mut Vec::new(), &mut |_| {
        count += 1;
        count <= ENUMERATION_CAP
    });
    if !within_cap {
        return Err(CorpusError::BoundsTooLarge { at_least: count, cap: ENUMERATION_CAP });
    }
    let mut out = Vec::with_capacity(count);
    en.walk(&mut Vec::new(), &mut |events| {
        out.push(History::from_events_unchecked(events.to_vec()));
        true
    });
    Ok(out)
}

/// Verdicts of every criterion on one history. The read-commit order
/// criterion is `None` for non-sequential histories, where it does not apply;
/// the conflict order criterion is rendered everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriterionVerdicts {
    pub final_state: bool,
    pub opaque: bool,
    pub du: bool,
    pub ghs: Option<bool>,
    pub tms2: bool,
    pub unique_writes: bool,
}

/// The differential comparison over a set of histories: per-history verdicts
/// plus counters for every implication the criteria are expected to obey.
/// All `*_but_not_*` gap counters except `opaque_but_not_du` and
/// `tms2_without_du` count genuine defects and must stay zero;
/// `opaque_but_not_du` has known witnesses, and `tms2_without_du` tallies an
/// open question without judging it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComparisonReport {
    pub verdicts: Vec<CriterionVerdicts>,
    /// Deferred-update opacity must imply opacity.
    pub du_but_not_opaque: usize,
    /// Deferred-update opacity must imply final-state opacity.
    pub du_but_not_final_state: usize,
    /// Opacity must imply final-state opacity.
    pub opaque_but_not_final_state: usize,
    /// Opacity does not imply deferred-update opacity; this counts the
    /// witnesses encountered.
    pub opaque_but_not_du: usize,
    /// Under unique writes, opacity and deferred-update opacity coincide.
    pub unique_writes_divergence: usize,
    /// Deferred-update opacity must be prefix-closed.
    pub du_prefix_gap: usize,
    /// On sequential histories, the read-commit order criterion must imply
    /// deferred-update opacity.
    pub ghs_without_du: usize,
    /// Histories satisfying the conflict order criterion but not
    /// deferred-update opacity; tallied, not judged.
    pub tms2_without_du: usize,
}

/// Runs every criterion over every history and cross-checks the expected
/// implications. `budget` caps search nodes per criterion evaluation.
pub fn compare_criteria(
    histories: &[History],
    init: &InitialValues,
    budget: Option<u64>,
) -> Result<ComparisonReport, CriteriaError> {
    let mut report = ComparisonReport::default();
    for h in histories {
        let du = du_opaque(h, init, budget)?.is_satisfied();
        let final_state = final_state_opaque(h, init, budget)?.is_satisfied();
        let op = opaque(h, init, budget)?.is_satisfied();
        let sequential = h.is_sequential();
        let ghs = if sequential {
            Some(ghs_opaque(h, init, budget)?.is_satisfied())
        } else {
            None
        };
        let tms2 = tms2_order(h, init, budget)?.is_satisfied();
        let uw = unique_writes(h, init);
        report.verdicts.push(CriterionVerdicts {
            final_state,
            opaque: op,
            du,
            ghs,
            tms2,
            unique_writes: uw,
        });
        if du && !op {
            report.du_but_not_opaque += 1;
        }
        if du && !final_state {
            report.du_but_not_final_state += 1;
        }
        if op && !final_state {
            report.opaque_but_not_final_state += 1;
        }
        if op && !du {
            report.opaque_but_not_du += 1;
        }
        if uw && op != du {
            report.unique_writes_divergence += 1;
        }
        if du {
            for i in 0..h.len() {
                let p = h.prefix(i).expect("prefix lengths in range");
                if !du_opaque(&p, init, budget)?.is_satisfied() {
                    report.du_prefix_gap += 1;
                    break;
                }
            }
        }
        if ghs == Some(true) && !du {
            report.ghs_without_du += 1;
        }
        if tms2 && !du {
            report.tms2_without_du += 1;
        }
    }
    Ok(report)
}
