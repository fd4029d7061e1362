//! Event-building helpers shared by the integration tests.

#![allow(dead_code)]

use opacity::history::{Action, Event, History, TxnId, Value};

pub fn t(k: u32) -> TxnId {
    TxnId(k)
}

pub fn inv_read(k: u32, x: &str) -> Event {
    Event::inv(TxnId(k), Action::Read(x.into()))
}

pub fn res_read(k: u32, x: &str, v: i64) -> Event {
    Event::res(TxnId(k), Action::Read(x.into()), Value::Int(v))
}

pub fn res_read_abort(k: u32, x: &str) -> Event {
    Event::res(TxnId(k), Action::Read(x.into()), Value::Abort)
}

pub fn inv_write(k: u32, x: &str, v: i64) -> Event {
    Event::inv(TxnId(k), Action::Write(x.into(), v))
}

pub fn res_write(k: u32, x: &str, v: i64) -> Event {
    Event::res(TxnId(k), Action::Write(x.into(), v), Value::Ok)
}

pub fn inv_tryc(k: u32) -> Event {
    Event::inv(TxnId(k), Action::TryC)
}

pub fn res_tryc(k: u32, r: Value) -> Event {
    Event::res(TxnId(k), Action::TryC, r)
}

/// Validates and unwraps: every test history built this way is well-formed.
pub fn history(events: Vec<Event>) -> History {
    History::validate(events).expect("test history is well-formed")
}

/// A complete committed block: write `v` to `x`, then commit.
pub fn committed_writer(k: u32, x: &str, v: i64) -> Vec<Event> {
    vec![
        inv_write(k, x, v),
        res_write(k, x, v),
        inv_tryc(k),
        res_tryc(k, Value::Commit),
    ]
}

/// A complete committed block: read `v` from `x`, then commit.
pub fn committed_reader(k: u32, x: &str, v: i64) -> Vec<Event> {
    vec![
        inv_read(k, x),
        res_read(k, x, v),
        inv_tryc(k),
        res_tryc(k, Value::Commit),
    ]
}
