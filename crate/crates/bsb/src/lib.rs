//! Solvers for the binary spring balance puzzle: recover a hidden bit
//! string s from queries x that return the count of shared 1 bits,
//! f(x) = popcount(x AND s).
//!
//! Four strategy families are implemented and cross-validated:
//!
//! - [`pooling`] — adaptive multistage group testing with closed-form
//!   stage-count and pool-size analytics;
//! - [`circuit`] — a gate-level AND + adder-tree netlist that evaluates f
//!   combinationally;
//! - [`statevector`] — a dense quantum simulator recovering s with a single
//!   phase-oracle query;
//! - [`optics`] — the same single-query pipeline realized with Jones-calculus
//!   polarization optics.
//!
//! [`bits`] holds the shared string types and the counting oracle;
//! [`compare`] runs every strategy on one secret and tabulates query costs.

pub mod bits;
pub mod circuit;
pub mod compare;
pub mod optics;
pub mod pooling;
pub mod statevector;

pub use bits::{spring_balance, CountingOracle, QueryString, SecretString};

/// Unified error type for the whole crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid bit string: {0}")]
    InvalidBitString(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),
    #[error("beam {beam} fully absorbed by its polarizer")]
    DegenerateBeam { beam: usize },
    #[error("beam {beam} has ambiguous polarization at readout")]
    AmbiguousReadout { beam: usize },
    #[error("zero vector where a state was required")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, Error>;
