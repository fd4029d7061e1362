//! Deciders for transactional-memory history correctness criteria.
//!
//! Given a finite history of transactional operations — interleaved
//! invocations and responses of reads, writes, and commit/abort attempts —
//! this crate decides whether the history satisfies:
//!
//! - **final-state opacity**: some completion of the history has an
//!   equivalent, real-time respecting, sequentially legal arrangement of its
//!   transactions;
//! - **opacity**: every prefix is final-state opaque;
//! - **deferred-update (du) opacity**: final-state opacity where, in
//!   addition, every read that returned a value is legal in its own local
//!   serialization — the part of the arrangement its transaction could
//!   actually have observed when the read returned;
//! - the **read-commit order** and **conflict order** criteria (`ghs` and
//!   `tms2`), which strengthen final-state opacity with extra ordering
//!   constraints on sequential histories.
//!
//! Positive verdicts come with a serialization [`Witness`](search::Witness)
//! that [`verify_witness`](search::verify_witness) re-checks from first
//! principles; negative verdicts explain how far every completion got. The
//! [`corpus`] module ships small reference histories that separate the
//! criteria from one another, plus deterministic generators and a
//! differential harness for cross-checking the deciders against each other.
//!
//! ```
//! use opacity::corpus::fig1;
//! use opacity::criteria::du_opaque;
//! use opacity::sequential::InitialValues;
//!
//! let outcome = du_opaque(&fig1(), &InitialValues::zero(), None).unwrap();
//! let witness = outcome.witness().expect("satisfied");
//! assert_eq!(
//!     witness.order.iter().map(ToString::to_string).collect::<Vec<_>>(),
//!     ["T2", "T3", "T1", "T4"],
//! );
//! ```

pub mod corpus;
pub mod criteria;
pub mod history;
pub mod search;
pub mod sequential;

pub use history::{Action, Event, History, Phase, TObjectId, TxnId, TxnStatus, Value};
pub use search::{SearchMode, SearchOutcome, Witness};
pub use sequential::{CommitDecision, InitialValues};
