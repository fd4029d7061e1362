//! Plumbing for the `opacity` command-line checker: the textual history
//! format and the machine-readable report schema. The binary itself lives in
//! `main.rs`; everything here is a library so tests can exercise the exact
//! parsing and serialization the binary uses.

pub mod format;
pub mod report;
