//! Exact and asymptotic probabilities that a random ±1 signed sum of unit
//! vectors lands in a small ball, plus the machinery built on top of them:
//! extremal configurations (orthogonal, simplicial, mixed, perturbed-basis),
//! pairing/decomposition tools for planar vector families, and certificate
//! generators for sign assignments balancing an odd number of unit vectors.
//!
//! Probabilities of the form P(‖ε₁v₁ + ⋯ + εₙvₙ‖₂ ≤ r) are dyadic rationals
//! `count / 2^n` and are kept exact ([`vectors::ExactProbability`] holds a
//! big-integer count). Radii enter everywhere as squared radii so that the
//! structured families stay in integer arithmetic; floating point appears
//! only in ball-membership tests (with an explicit boundary tolerance) and
//! in asymptotic formulas, which are evaluated in the log₂ domain.

pub mod balance;
pub mod binom;
pub mod enumerate;
pub mod pairing;
pub mod structured;
pub mod vectors;

pub use num_bigint::BigUint;

use thiserror::Error as ThisError;

/// Unified error type for the whole crate.
#[derive(Debug, ThisError)]
pub enum Error {
    /// A length or dimension does not match what the operation requires.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    /// A vector's Euclidean norm is too far from 1 to be accepted.
    #[error("vector {index} has norm {norm:.17} which deviates from 1 by more than {tol:e}")]
    NotUnit { index: usize, norm: f64, tol: f64 },
    /// A parameter violates a documented domain or parity constraint.
    #[error("invalid parameter: {0}")]
    Domain(String),
    /// The requested instance exceeds a hard size cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A requested structured configuration cannot exist.
    #[error("infeasible construction: {0}")]
    Construction(String),
    /// An internal invariant failed; always indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
