//! Full-interleaving packet scheduling (FIPS) for time-sensitive
//! networking over 5G bridges.
//!
//! An IEEE 802.1Qbv network that contains a 5G segment cannot be scheduled
//! with classic slot-per-frame methods: the radio link's delay is a random
//! variable spanning milliseconds, so a frame's arrival at the far-side
//! translator is only known up to a probabilistic delay budget. This crate
//! implements a scheduler that embraces that uncertainty:
//!
//! * [`pdb`] turns measured 5G delay histograms into per-stream
//!   *probabilistic delay budgets* — the tightest delay interval that
//!   covers each stream's required reliability.
//! * [`scheduler`] synthesizes gate control lists and PSFP stream filters
//!   by *batching* frames that share a worst-case arrival window and
//!   letting them interleave freely inside shared gate windows, instead of
//!   reserving a worst-case slot per frame. Batches are chosen per stream
//!   by an admission loop that tries merge candidates and keeps the one
//!   with the earliest guaranteed delivery.
//! * [`baselines`] provides the scalar-budget reference schedulers
//!   (median / maximum delay) that treat the 5G link as a fixed number.
//! * [`sim`] executes a configuration under randomly drawn radio delays in
//!   a discrete-event model of the network and validates the resulting
//!   traces against the formal execution constraints.
//! * [`harness`] builds the evaluation scenario — an automated-guided-
//!   vehicle factory cell bridged to a wired backbone by a 5G link — and
//!   runs the reliability and scalability experiments.
//! * [`formats`] defines the JSON file formats; [`cli`] exposes
//!   everything as the `fips` command-line tool.
//!
//! The crate-level [`Error`] type covers every failure mode; scheduling
//! rejections (a stream that cannot be admitted) are *not* errors — they
//! are reported in the schedule outcome.

pub mod baselines;
pub mod cli;
pub mod formats;
pub mod harness;
pub mod model;
pub mod pdb;
pub mod rel;
pub mod scheduler;
pub mod sim;
pub mod time;

#[cfg(test)]
pub(crate) mod testnet;

use thiserror::Error as ThisError;

/// Unified error type for construction, scheduling, simulation, and I/O.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("duplicate node name {name:?}")]
    DuplicateNodeId { name: String },

    #[error("link {link} references unknown node {node:?}")]
    DanglingLink { link: usize, node: String },

    #[error("link {link} references unknown histogram {name:?}")]
    MissingHistogram { link: usize, name: String },

    #[error("invalid histogram: {reason}")]
    InvalidHistogram { reason: String },

    #[error("invalid network: {reason}")]
    InvalidNetwork { reason: String },

    #[error("invalid stream {id:?}: {reason}")]
    InvalidStream { id: String, reason: String },

    #[error("stream set is empty")]
    EmptyStreamSet,

    #[error("integer overflow in time arithmetic")]
    Overflow,

    #[error("operation requires an Ethernet link")]
    NotEthernet,

    #[error(
        "reliability {requested} is unreachable: the histogram only covers \
         a mass of {available}"
    )]
    UnreachableReliability { requested: String, available: String },

    #[error("invalid reliability: {0}")]
    Reliability(#[from] rel::RelError),

    #[error("transmission ordering contains a cyclic dependency involving port {port} batch {batch}")]
    CyclicDependency { port: usize, batch: u64 },

    #[error(
        "schedule for stream {stream:?} exceeds the planning horizon of two \
         hypercycles after release"
    )]
    HorizonExceeded { stream: String },

    #[error("no path from {from:?} to {to:?}")]
    NoPath { from: String, to: String },

    #[error("configuration does not match the stream set: {reason}")]
    ConfigMismatch { reason: String },

    #[error("invalid file format: {reason}")]
    InvalidFormat { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenient result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
