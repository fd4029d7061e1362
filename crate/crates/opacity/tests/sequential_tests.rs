//! Completions, sequential legality, equivalence, and local serializations.

mod common;

use std::collections::BTreeMap;

use opacity::corpus::{fig1, fig2_prefix, fig3_prefix, fig4, random_history, HistoryConfig};
use opacity::history::{History, TObjectId, TxnId, TxnStatus, Value};
use opacity::sequential::{
    commit_pending_txns, complete_history, completions, decisions_from_mask, equivalent,
    illegal_reads, is_legal, local_serialization, CommitDecision, CompletionError, IllegalRead,
    InitialValues, LocalSerializationError,
};

use common::*;

/// Concatenates whole transaction blocks of `completed` in the given order.
fn blocks(completed: &History, order: &[u32]) -> History {
    let mut events = Vec::new();
    for &k in order {
        events.extend(completed.projection(t(k)));
    }
    history(events)
}

/// The single completion of a history with no pending `tryC`.
fn only_completion(h: &History) -> History {
    let all = completions(h);
    assert_eq!(all.len(), 1);
    let (decisions, completed) = all.into_iter().next().unwrap();
    assert!(decisions.is_empty());
    completed
}

#[test]
fn completion_of_unfinished_transactions_aborts_them() {
    let all = completions(&fig3_prefix());
    assert_eq!(all.len(), 1);
    let completed = &all[0].1;
    assert_eq!(completed.status(t(1)), Ok(TxnStatus::Aborted));
    assert_eq!(completed.status(t(2)), Ok(TxnStatus::Aborted));
    // Both get tryC answered A appended; the prefix of original events is intact.
    assert_eq!(&completed.events()[..4], fig3_prefix().events());
    assert_eq!(completed.len(), 8);
}

#[test]
fn completion_splits_on_each_pending_commit() {
    let h = fig2_prefix(0);
    assert_eq!(commit_pending_txns(&h), vec![t(1)]);
    let all = completions(&h);
    assert_eq!(all.len(), 2);
    // All-abort comes first, then the commit.
    assert_eq!(all[0].0[&t(1)], CommitDecision::Abort);
    assert_eq!(all[0].1.status(t(1)), Ok(TxnStatus::Aborted));
    assert_eq!(all[1].0[&t(1)], CommitDecision::Commit);
    assert_eq!(all[1].1.status(t(1)), Ok(TxnStatus::Committed));
    // The reader that never attempted to commit aborts in both.
    for (_, completed) in &all {
        assert_eq!(completed.status(t(2)), Ok(TxnStatus::Aborted));
    }
}

#[test]
fn completion_of_t_complete_history_is_itself() {
    let h = fig1();
    let all = completions(&h);
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].1, h);
}

#[test]
fn completion_count_is_exponential_in_pending_commits() {
    // Three transactions, each with a pending tryC.
    let mut events = Vec::new();
    for k in 1..=3 {
        events.push(inv_write(k, "X", i64::from(k)));
        events.push(res_write(k, "X", i64::from(k)));
    }
    for k in 1..=3 {
        events.push(inv_tryc(k));
    }
    let h = history(events);
    let all = completions(&h);
    assert_eq!(all.len(), 8);
    // Decisions enumerate as a binary counter from all-abort to all-commit.
    assert!(all[0].0.values().all(|&d| d == CommitDecision::Abort));
    assert!(all[7].0.values().all(|&d| d == CommitDecision::Commit));
    // Distinct decisions yield inequivalent completions.
    for i in 0..all.len() {
        for j in 0..i {
            assert!(!equivalent(&all[i].1, &all[j].1));
        }
    }
}

#[test]
fn completion_preserves_real_time_order() {
    let cfg = HistoryConfig::default();
    for seed in 0..100 {
        let h = random_history(&cfg, seed);
        let txns = h.txns();
        for (_, completed) in completions(&h) {
            for &k in &txns {
                for &m in &txns {
                    if k != m && h.real_time_precedes(k, m).unwrap() {
                        assert!(
                            completed.real_time_precedes(k, m).unwrap(),
                            "seed {seed}: {k} before {m} lost"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn complete_history_rejects_wrong_decision_domains() {
    let h = fig2_prefix(0);
    assert_eq!(
        complete_history(&h, &BTreeMap::new()),
        Err(CompletionError::MissingDecision(t(1)))
    );
    let spurious: BTreeMap<TxnId, CommitDecision> = [
        (t(1), CommitDecision::Commit),
        (t(2), CommitDecision::Commit),
    ]
    .into();
    assert_eq!(
        complete_history(&h, &spurious),
        Err(CompletionError::SpuriousDecision(t(2)))
    );
}

#[test]
fn decisions_from_mask_encodes_bits_ascending() {
    let pending = vec![t(1), t(3)];
    let d = decisions_from_mask(&pending, 0b10);
    assert_eq!(d[&t(1)], CommitDecision::Abort);
    assert_eq!(d[&t(3)], CommitDecision::Commit);
}

#[test]
fn reference_serialization_is_legal() {
    let init = InitialValues::zero();
    let s = blocks(&only_completion(&fig1()), &[2, 3, 1, 4]);
    assert!(is_legal(&s, &init));
    assert_eq!(illegal_reads(&s, &init), Vec::new());
}

#[test]
fn unfinished_writer_makes_the_read_illegal_in_both_orders() {
    let init = InitialValues::zero();
    let completed = only_completion(&fig3_prefix());
    for order in [[2, 1], [1, 2]] {
        let s = blocks(&completed, &order);
        let bad = illegal_reads(&s, &init);
        assert_eq!(
            bad,
            vec![IllegalRead {
                txn: t(2),
                object: TObjectId::new("X"),
                observed: 1,
                expected: 0,
            }]
        );
        assert!(!is_legal(&s, &init));
    }
}

#[test]
fn own_writes_are_visible_to_later_reads() {
    let init = InitialValues::zero();
    // Write then read back, then commit: legal entirely from case one.
    let s = history(vec![
        inv_write(1, "X", 7),
        res_write(1, "X", 7),
        inv_read(1, "X"),
        res_read(1, "X", 7),
        inv_tryc(1),
        res_tryc(1, Value::Commit),
    ]);
    assert!(is_legal(&s, &init));

    // The same holds when the transaction ultimately aborts.
    let s = history(vec![
        inv_write(1, "X", 7),
        res_write(1, "X", 7),
        inv_read(1, "X"),
        res_read(1, "X", 7),
        inv_tryc(1),
        res_tryc(1, Value::Abort),
    ]);
    assert!(is_legal(&s, &init));
}

#[test]
fn aborted_writers_are_invisible_to_other_transactions() {
    let init = InitialValues::zero();
    let mut events = vec![
        inv_write(1, "X", 5),
        res_write(1, "X", 5),
        inv_tryc(1),
        res_tryc(1, Value::Abort),
    ];
    events.extend(committed_reader(2, "X", 5));
    let s = history(events);
    let bad = illegal_reads(&s, &init);
    assert_eq!(bad.len(), 1);
    assert_eq!((bad[0].observed, bad[0].expected), (5, 0));
}

#[test]
fn latest_committed_write_wins() {
    let init = InitialValues::zero();
    let mut events = committed_writer(1, "X", 1);
    events.extend(committed_writer(2, "X", 2));
    events.extend(committed_reader(3, "X", 2));
    assert!(is_legal(&history(events), &init));

    let mut events = committed_writer(1, "X", 1);
    events.extend(committed_writer(2, "X", 2));
    events.extend(committed_reader(3, "X", 1));
    assert!(!is_legal(&history(events), &init));
}

#[test]
fn reads_returning_abort_are_exempt_from_legality() {
    let init = InitialValues::zero();
    let s = history(vec![
        inv_read(1, "X"),
        res_read_abort(1, "X"),
    ]);
    assert!(is_legal(&s, &init));
}

#[test]
fn initial_value_overrides_apply() {
    let mut init = InitialValues::with_default(9);
    init.set(TObjectId::new("Y"), 3);
    let s = history(committed_reader(1, "X", 9));
    assert!(is_legal(&s, &init));
    let s = history(committed_reader(1, "Y", 3));
    assert!(is_legal(&s, &init));
    let s = history(committed_reader(1, "Y", 9));
    assert!(!is_legal(&s, &init));
}

#[test]
fn legality_of_a_read_depends_only_on_the_preceding_blocks() {
    // Extending a legal sequential history with later blocks never flips
    // the verdict on earlier reads.
    let init = InitialValues::zero();
    let mut events = committed_reader(1, "X", 0);
    let prefix = history(events.clone());
    assert!(is_legal(&prefix, &init));
    events.extend(committed_writer(2, "X", 4));
    events.extend(committed_reader(3, "X", 4));
    let extended = history(events);
    assert!(is_legal(&extended, &init));
}

#[test]
fn equivalence_is_blind_to_interleaving() {
    let h = fig1();
    assert!(equivalent(&h, &h));

    let s = blocks(&only_completion(&h), &[2, 3, 1, 4]);
    assert!(equivalent(&h, &s));
    assert!(equivalent(&s, &h));

    // Swapping two adjacent events of different transactions changes
    // nothing per-transaction.
    let mut events = h.events().to_vec();
    assert_ne!(events[4].txn, events[5].txn);
    events.swap(4, 5);
    assert!(equivalent(&h, &history(events)));

    // Dropping a transaction or changing a value breaks equivalence.
    assert!(!equivalent(&h, &blocks(&only_completion(&h), &[2, 3, 1])));
    let mut events = h.events().to_vec();
    events[6] = res_read(1, "X", 0);
    assert!(!equivalent(&h, &history(events)));
}

#[test]
fn local_serialization_keeps_only_writers_already_committing() {
    let init = InitialValues::zero();
    let h = fig1();
    let s = blocks(&only_completion(&h), &[2, 3, 1, 4]);

    // At the first read, only the first writer had invoked tryC: the local
    // serialization is its block plus the read.
    let ls = local_serialization(&s, &h, t(1), &TObjectId::new("X")).unwrap();
    let mut expected = h.projection(t(2));
    expected.extend_from_slice(&h.projection(t(1))[..2]);
    assert_eq!(ls.events(), &expected[..]);
    assert!(is_legal(&ls, &init));

    // At the final read, all three predecessors had: everything is kept.
    let ls = local_serialization(&s, &h, t(4), &TObjectId::new("X")).unwrap();
    let mut expected = h.projection(t(2));
    expected.extend(h.projection(t(3)));
    expected.extend(h.projection(t(1)));
    expected.extend_from_slice(&h.projection(t(4))[..2]);
    assert_eq!(ls.events(), &expected[..]);
    assert!(is_legal(&ls, &init));
}

#[test]
fn local_serialization_exposes_the_deferred_update_violation() {
    let init = InitialValues::zero();
    let h = fig4();
    let completed = only_completion(&h);
    let s = blocks(&completed, &[1, 3, 2]);
    // The serialization itself is legal...
    assert!(is_legal(&s, &init));
    // ...but the read's local serialization drops the committed writer,
    // leaving only the aborted one, and the read becomes illegal.
    let ls = local_serialization(&s, &h, t(2), &TObjectId::new("X")).unwrap();
    let mut expected = completed.projection(t(1));
    expected.extend_from_slice(&completed.projection(t(2))[..2]);
    assert_eq!(ls.events(), &expected[..]);
    let bad = illegal_reads(&ls, &init);
    assert_eq!(bad.len(), 1);
    assert_eq!((bad[0].txn, bad[0].observed, bad[0].expected), (t(2), 1, 0));
}

#[test]
fn local_serialization_requires_the_read_to_exist() {
    let h = fig1();
    let s = blocks(&only_completion(&h), &[2, 3, 1, 4]);
    assert_eq!(
        local_serialization(&s, &h, t(2), &TObjectId::new("X")),
        Err(LocalSerializationError::NoSuchRead { txn: t(2), object: TObjectId::new("X") })
    );
}

#[test]
fn local_serialization_is_sequential_and_committed_subset() {
    let cfg = HistoryConfig::default();
    for seed in 0..100 {
        let h = random_history(&cfg, seed);
        for (_, completed) in completions(&h) {
            let order: Vec<u32> = completed.txns().iter().map(|k| k.0).collect();
            let s = blocks(&completed, &order);
            for (reader, object) in h.visible_writers().keys() {
                let ls = local_serialization(&s, &h, *reader, object).unwrap();
                assert!(ls.is_sequential(), "seed {seed}");
                // Whole blocks only: each retained transaction's events match
                // its block in S up to truncation at the read.
                for k in ls.txns() {
                    let block = s.projection(k);
                    let kept = ls.projection(k);
                    assert!(block.starts_with(&kept), "seed {seed}");
                }
                // Committed transactions of the local serialization all
                // appear committed in S.
                for k in ls.txns() {
                    if ls.status(k).unwrap() == TxnStatus::Committed {
                        assert_eq!(s.status(k).unwrap(), TxnStatus::Committed);
                    }
                }
            }
        }
    }
}
