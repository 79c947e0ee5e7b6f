//! State-independent-contextuality operator analysis.
//!
//! The operator of interest is the plain sum of normalized projectors onto
//! all modes. When that sum is a multiple `lambda * I` of the identity, every
//! N-particle state has expectation `N * lambda`, while a non-contextual
//! model is bounded by the largest total occupation over all valid
//! assignments. The report compares the two.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::modespace::{ModeHypergraph, ModeSetError};
use crate::scalar::Scalar;
use crate::solver::{solve, SolveMode, SolverError, Statistics};

#[derive(Debug, Error)]
pub enum SicError {
    #[error(transparent)]
    ModeSet(#[from] ModeSetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SicReport<S> {
    /// Proportionality constant of the projector sum, when it exists.
    pub lambda: Option<S>,
    /// Maximum of the total occupation over all non-contextual assignments;
    /// `None` when no assignment exists (the KS regime, where the inequality
    /// question is moot).
    pub nc_bound: Option<u64>,
    /// `N * lambda`, the state-independent quantum value.
    pub quantum_value: Option<S>,
    pub violated: Option<bool>,
    pub assignments_exist: bool,
}

/// Exact sum of normalized projectors and, if proportional to the identity,
/// its constant.
pub fn projector_sum<S: Scalar>(h: &ModeHypergraph<S>) -> Result<(Matrix<S>, Option<S>), SicError> {
    let sum = h.projector_sum()?;
    let lambda = sum.proportional_to_identity();
    Ok((sum, lambda))
}

pub fn sic_report<S: Scalar>(
    h: &ModeHypergraph<S>,
    n: u32,
    stats: Statistics,
) -> Result<SicReport<S>, SicError> {
    let (_, lambda) = projector_sum(h)?;
    let result = solve(h, n, stats, SolveMode::EnumerateAll)?;
    let nc_bound = result
        .solutions
        .as_ref()
        .filter(|sols| !sols.is_empty())
        .map(|sols| sols.iter().map(|a| a.total()).max().unwrap());
    let quantum_value = lambda.as_ref().map(|l| l.mul(&S::from_int(n as i64)));
    let violated = match (&quantum_value, nc_bound) {
        (Some(qv), Some(bound)) => {
            // exceeding the bound means a strictly positive difference
            let diff = qv.sub(&S::from_int(bound as i64));
            Some(!diff.is_zero() && diff.to_f64() > 0.0)
        }
        _ => None,
    };
    Ok(SicReport {
        lambda,
        nc_bound,
        quantum_value,
        violated,
        assignments_exist: result.feasible,
    })
}
