//! Exact analysis of non-contextual occupation-number assignability for
//! identical particles on mode hypergraphs.
//!
//! The library models finite sets of modes grouped into measurement contexts
//! (mutually orthogonal subsets resolving the identity), decides whether
//! occupation numbers can be assigned non-contextually under particle-number
//! conservation, computes exact bosonic/fermionic outcome amplitudes via
//! permanents and determinants, searches for Hardy-style contradiction
//! chains, and evaluates the simple state-independent inequality built from
//! the sum of all mode projectors.
//!
//! Two scalar backends share one interface: an exact one built on rationals
//! extended by square roots (the canonical analyses stay exact end to end),
//! and an `f64` backend with a fixed 1e-9 zero tolerance for mode sets whose
//! data does not fit the exact field.

pub mod fock;
pub mod hardy;
pub mod linalg;
pub mod modespace;
pub mod scalar;
pub mod sic;
pub mod solver;

pub use fock::{FockState, OccupationPattern, ProductTerm};
pub use hardy::{HardyChain, Propagation, SupportTable};
pub use linalg::Matrix;
pub use modespace::{canonical_18, Mode, ModeHypergraph, ValidationReport};
pub use scalar::{QSqrt2, Radical, Rational, Scalar};
pub use sic::SicReport;
pub use solver::{Assignment, FeasibilityResult, SolveMode, Statistics};
