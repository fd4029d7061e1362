//! The textual history format.
//!
//! One event per line, whitespace-separated, `#` starting a comment:
//!
//! ```text
//! inv <txn> read <obj>          res <txn> read (<int>|A)
//! inv <txn> write <obj> <int>   res <txn> write (ok|A)
//! inv <txn> tryc                res <txn> tryc (C|A)
//! inv <txn> trya                res <txn> trya A
//! ```
//!
//! Transaction tokens match `T[1-9][0-9]*`. Responses carry no object; the
//! parser resolves it from the transaction's pending invocation, so a
//! read or write response with nothing pending is rejected here, before
//! well-formedness validation even runs. [`History`]'s `Display` emits this
//! exact grammar, so rendering and parsing round-trip.

use std::collections::BTreeMap;
use std::fmt;

use opacity::history::{Action, Event, History, TObjectId, TxnId, Value};

/// A diagnostic tied to a place in the input text. `line` and `column` are
/// one-based; well-formedness violations point at the start of the
/// offending event's line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// One whitespace-separated token and the one-based column it starts at.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut rest = body;
    let mut base = 0;
    while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
        let tail = &rest[start..];
        let end = tail.find(char::is_whitespace).unwrap_or(tail.len());
        out.push((base + start + 1, &tail[..end]));
        base += start + end;
        rest = &tail[end..];
    }
    out
}

/// Parses a transaction token of the form `T[1-9][0-9]*`.
pub fn parse_txn(tok: &str) -> Option<TxnId> {
    let digits = tok.strip_prefix('T')?;
    if digits.is_empty() || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok().map(TxnId)
}

/// Parses a history; on failure reports every diagnostic found. Syntax is
/// checked line by line; if all lines parse, the event sequence goes through
/// [`History::validate`] and any violations are mapped back to the lines of
/// the offending events.
pub fn parse_history(text: &str) -> Result<History, Vec<ParseError>> {
    let mut events = Vec::new();
    let mut event_lines = Vec::new();
    let mut errors = Vec::new();
    // Pending invocations, tracked only to resolve response objects.
    let mut pending: BTreeMap<TxnId, Action> = BTreeMap::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let mut err = |column: usize, message: String| {
            errors.push(ParseError { line: lineno, column, message });
        };
        let expect = |n: usize| -> Option<(usize, &str)> { toks.get(n).copied() };

        let Some((c0, phase)) = expect(0) else { continue };
        if phase != "inv" && phase != "res" {
            err(c0, format!("expected `inv` or `res`, found `{phase}`"));
            continue;
        }
        let Some((c1, txn_tok)) = expect(1) else {
            err(c0 + phase.len(), "expected a transaction token".into());
            continue;
        };
        let Some(txn) = parse_txn(txn_tok) else {
            err(c1, format!("transaction tokens match `T[1-9][0-9]*`, found `{txn_tok}`"));
            continue;
        };
        let Some((c2, kind)) = expect(2) else {
            err(c1 + txn_tok.len(), "expected `read`, `write`, `tryc`, or `trya`".into());
            continue;
        };

        let extra = |n: usize| {
            toks.get(n).map(|&(c, tok)| (c, format!("unexpected trailing token `{tok}`")))
        };
        let event = if phase == "inv" {
            match kind {
                "read" => match expect(3) {
                    Some((_, obj)) => extra(4)
                        .map(Err)
                        .unwrap_or(Ok(Event::inv(txn, Action::Read(TObjectId::new(obj)))))
                        ,
                    None => Err((c2 + kind.len(), "expected an object name".into())),
                },
                "write" => match (expect(3), expect(4)) {
                    (Some((_, obj)), Some((c4, val))) => match val.parse::<i64>() {
                        Ok(v) => extra(5).map(Err).unwrap_or(Ok(Event::inv(
                            txn,
                            Action::Write(TObjectId::new(obj), v),
                        ))),
                        Err(_) => Err((c4, format!("expected an integer value, found `{val}`"))),
                    },
                    (Some((c3, obj)), None) => {
                        Err((c3 + obj.len(), "expected an integer value".into()))
                    }
                    (None, _) => Err((c2 + kind.len(), "expected an object name".into())),
                },
                "tryc" => extra(3).map(Err).unwrap_or(Ok(Event::inv(txn, Action::TryC))),
                "trya" => extra(3).map(Err).unwrap_or(Ok(Event::inv(txn, Action::TryA))),
                other => Err((c2, format!("unknown action `{other}`"))),
            }
        } else {
            let result = expect(3);
            match kind {
                "read" => match result {
                    Some((c3, tok)) => {
                        let value = if tok == "A" {
                            Ok(Value::Abort)
                        } else {
                            tok.parse::<i64>().map(Value::Int).map_err(|_| {
                                (c3, format!("expected an integer or `A`, found `{tok}`"))
                            })
                        };
                        value.and_then(|v| match pending.get(&txn) {
                            Some(Action::Read(x)) => extra(4)
                                .map(Err)
                                .unwrap_or(Ok(Event::res(txn, Action::Read(x.clone()), v))),
                            _ => Err((
                                c1,
                                format!("{txn} has no pending read invocation to respond to"),
                            )),
                        })
                    }
                    None => Err((c2 + kind.len(), "expected an integer or `A`".into())),
                },
                "write" => match result {
                    Some((c3, tok)) => {
                        let value = match tok {
                            "ok" => Ok(Value::Ok),
                            "A" => Ok(Value::Abort),
                            _ => Err((c3, format!("expected `ok` or `A`, found `{tok}`"))),
                        };
                        value.and_then(|v| match pending.get(&txn) {
                            Some(Action::Write(x, w)) => extra(4)
                                .map(Err)
                                .unwrap_or(Ok(Event::res(txn, Action::Write(x.clone(), *w), v))),
                            _ => Err((
                                c1,
                                format!("{txn} has no pending write invocation to respond to"),
                            )),
                        })
                    }
                    None => Err((c2 + kind.len(), "expected `ok` or `A`".into())),
                },
                "tryc" => match result {
                    Some((_, "C")) => {
                        extra(4).map(Err).unwrap_or(Ok(Event::res(txn, Action::TryC, Value::Commit)))
                    }
                    Some((_, "A")) => {
                        extra(4).map(Err).unwrap_or(Ok(Event::res(txn, Action::TryC, Value::Abort)))
                    }
                    Some((c3, tok)) => Err((c3, format!("expected `C` or `A`, found `{tok}`"))),
                    None => Err((c2 + kind.len(), "expected `C` or `A`".into())),
                },
                "trya" => match result {
                    Some((_, "A")) => {
                        extra(4).map(Err).unwrap_or(Ok(Event::res(txn, Action::TryA, Value::Abort)))
                    }
                    Some((c3, tok)) => Err((c3, format!("expected `A`, found `{tok}`"))),
                    None => Err((c2 + kind.len(), "expected `A`".into())),
                },
                other => Err((c2, format!("unknown action `{other}`"))),
            }
        };

        match event {
            Ok(e) => {
                match e.phase {
                    opacity::history::Phase::Invocation => {
                        pending.insert(txn, e.action.clone());
                    }
                    opacity::history::Phase::Response => {
                        pending.remove(&txn);
                    }
                }
                events.push(e);
                event_lines.push(lineno);
            }
            Err((column, message)) => err(column, message),
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    History::validate(events).map_err(|violations| {
        violations
            .into_iter()
            .map(|m| ParseError {
                line: event_lines[m.index],
                column: 1,
                message: m.reason,
            })
            .collect()
    })
}
