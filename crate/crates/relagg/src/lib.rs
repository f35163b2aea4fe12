//! Aggregation of relational database instances.
//!
//! A group of agents each hold a finite relational instance over a shared
//! schema. This crate computes aggregated instances under a catalog of rules
//! (quota rules, distance-based rules, representative-voter rules,
//! dictatorships, oligarchies, and a merge rule that inserts nulls at
//! disagreeing coordinates), checks social-choice axioms over finite profile
//! spaces, tests whether integrity constraints survive aggregation, and
//! compares aggregate-then-query against query-then-aggregate for first-order
//! queries under active-domain semantics.
//!
//! The crate is organized as a library; see the `examples/` directory for one
//! runnable program per capability, and the `relagg` binary for a small CLI
//! over JSON profile documents.

pub mod model;

pub mod folang;

pub mod constraints;

pub mod aggregators;

pub mod oracle;

pub mod axioms;

pub mod lifting;

pub mod preservation;

pub mod doc;

pub mod samples;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema is empty or malformed: {0}")]
    BadSchema(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{symbol}`: expected {expected}, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("instances use different schemas")]
    SchemaMismatch,
    #[error("profile must contain at least one instance")]
    EmptyProfile,
    #[error("agent index {0} out of range 1..={1}")]
    AgentOutOfRange(usize, usize),
    #[error("value permutation is not a bijection on its carrier")]
    NotAPermutation,
    #[error("permutation is not defined on value `{0}`")]
    PermutationNotTotal(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("query head does not match the free variables of the body: head {head:?}, free {free:?}")]
    HeadMismatch { head: Vec<String>, free: Vec<String> },
    #[error("formula has free variables {0:?} where a sentence is required")]
    NotASentence(Vec<String>),
    #[error("invalid constraint: {0}")]
    BadConstraint(String),
    #[error("invalid rule descriptor `{0}`: {1}")]
    BadRule(String, String),
    #[error("quota 0 needs an explicit finite tuple universe; supply one in the aggregation context")]
    QuotaNeedsUniverse,
    #[error("{what} would enumerate {size} items, above the cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u64 },
    #[error("no candidate instance satisfies the attached constraints")]
    EmptyCandidateSpace,
    #[error("answer sets have mismatched widths: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("width-0 answer sets cannot be wrapped as relations (arities must be >= 1)")]
    ZeroWidth,
    #[error("invalid space spec: {0}")]
    BadSpace(String),
    #[error("invalid document: {0}")]
    BadDocument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
