//! Second-quantization engine.
//!
//! N-particle states are linear combinations of creation-operator product
//! terms over arbitrary vectors. Transition amplitudes onto the occupation
//! patterns of a measurement context are determinants (fermions) or
//! permanents (bosons) of the matrix of single-particle overlaps, with
//! factorial bookkeeping for repeated bosonic modes. Everything stays in the
//! backend scalar, so support questions ("is this amplitude zero?") are exact
//! in the exact backend.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::modespace::{Mode, ModeHypergraph, ModeSetError};
use crate::scalar::{ratio, Rational, Scalar};
use crate::solver::Statistics;

#[derive(Debug, Error)]
pub enum FockError {
    #[error(transparent)]
    ModeSet(#[from] ModeSetError),
    #[error("fermionic product state repeats a direction (`{0}`, `{1}`): Pauli exclusion makes it the zero state")]
    PauliExclusion(String, String),
    #[error("product factors are linearly dependent; the state is the zero state")]
    DependentFactors,
    #[error("state norm has no exact square root in this backend")]
    NotNormalizable,
    #[error("pattern does not match: {0}")]
    PatternMismatch(String),
    #[error("mode `{0}` belongs to no context")]
    ModeWithoutContext(String),
}

/// One creation-operator product `coefficient * a†(w_1) ... a†(w_N) |0>`.
#[derive(Debug, Clone)]
pub struct ProductTerm<S> {
    pub coefficient: S,
    pub factors: Vec<Mode<S>>,
}

/// An N-particle state of fixed statistics as a sum of product terms.
#[derive(Debug, Clone)]
pub struct FockState<S> {
    pub n_particles: u32,
    pub statistics: Statistics,
    pub terms: Vec<ProductTerm<S>>,
}

/// Per-mode particle counts for one context, aligned with its mode order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct OccupationPattern {
    pub context_id: String,
    pub counts: Vec<u32>,
}

impl OccupationPattern {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

fn determinant<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    match n {
        0 => S::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            // first-row Laplace expansion; N stays small here
            let mut acc = S::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][j].mul(&determinant(&minor));
                acc = if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        }
    }
}

/// Ryser inclusion-exclusion permanent; exponential in N, which is fine for
/// the particle numbers in play.
fn permanent<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    if n == 0 {
        return S::one();
    }
    let mut acc = S::zero();
    for subset in 1u32..(1 << n) {
        let bits = subset.count_ones();
        let mut prod = S::one();
        for row in m.iter() {
            let mut rowsum = S::zero();
            for (j, v) in row.iter().enumerate() {
                if subset & (1 << j) != 0 {
                    rowsum = rowsum.add(v);
                }
            }
            prod = prod.mul(&rowsum);
        }
        let sign_flip = (n as u32 - bits) % 2 == 1;
        acc = if sign_flip {
            acc.sub(&prod)
        } else {
            acc.add(&prod)
        };
    }
    acc
}

fn gram_entry<S: Scalar>(a: &Mode<S>, b: &Mode<S>) -> Result<S, FockError> {
    Ok(ModeHypergraph::overlap_vec(a, b)?)
}

fn factorial(n: u32) -> Rational {
    let mut acc = ratio(1, 1);
    for k in 2..=n as i64 {
        acc *= ratio(k, 1);
    }
    acc
}

/// The zero-particle state.
pub fn vacuum<S: Scalar>(statistics: Statistics) -> FockState<S> {
    FockState {
        n_particles: 0,
        statistics,
        terms: vec![ProductTerm {
            coefficient: S::one(),
            factors: Vec::new(),
        }],
    }
}

/// Normalized product state `a†(v_1) ... a†(v_N) |0>` (up to normalization).
///
/// Fermions require pairwise non-parallel factors; repeating a direction is
/// the zero state and is rejected. Bosons may repeat vectors; the
/// normalization divides by the square root of the Gram permanent, which for
/// repeated orthonormal factors is the usual product of factorials. An empty
/// factor list is the vacuum.
pub fn product_state<S: Scalar>(
    vectors: Vec<Mode<S>>,
    statistics: Statistics,
) -> Result<FockState<S>, FockError> {
    if vectors.is_empty() {
        return Ok(vacuum(statistics));
    }
    let n = vectors.len();
    let mut gram = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = gram_entry(&vectors[i], &vectors[j])?;
        }
    }
    if statistics == Statistics::Fermion {
        for i in 0..n {
            for j in i + 1..n {
                if gram[i][j].mul(&gram[i][j]).sub(&S::one()).is_zero() {
                    return Err(FockError::PauliExclusion(
                        vectors[i].id.clone(),
                        vectors[j].id.clone(),
                    ));
                }
            }
        }
    }
    let norm2 = match statistics {
        Statistics::Fermion => determinant(&gram),
        Statistics::Boson => permanent(&gram),
    };
    if norm2.is_zero() {
        return Err(FockError::DependentFactors);
    }
    let norm = norm2.try_sqrt().ok_or(FockError::NotNormalizable)?;
    let coefficient = norm.inverse().map_err(|_| FockError::NotNormalizable)?;
    Ok(FockState {
        n_particles: n as u32,
        statistics,
        terms: vec![ProductTerm {
            coefficient,
            factors: vectors,
        }],
    })
}

/// Builds the mode list of a pattern: each context member repeated by its
/// count, in context order.
fn pattern_modes<'h, S: Scalar>(
    pattern: &OccupationPattern,
    h: &'h ModeHypergraph<S>,
) -> Result<Vec<&'h Mode<S>>, FockError> {
    let ctx = h.context(&pattern.context_id)?;
    if pattern.counts.len() != ctx.modes.len() {
        return Err(FockError::PatternMismatch(format!(
            "pattern has {} counts for context {} with {} modes",
            pattern.counts.len(),
            pattern.context_id,
            ctx.modes.len()
        )));
    }
    let mut out = Vec::new();
    for (&mode_idx, &count) in ctx.modes.iter().zip(&pattern.counts) {
        for _ in 0..count {
            out.push(&h.modes[mode_idx]);
        }
    }
    Ok(out)
}

/// Exact transition amplitude of the state onto one occupation pattern.
pub fn amplitude<S: Scalar>(
    state: &FockState<S>,
    pattern: &OccupationPattern,
    h: &ModeHypergraph<S>,
) -> Result<S, FockError> {
    if pattern.total() != state.n_particles {
        return Err(FockError::PatternMismatch(format!(
            "pattern carries {} particles, state has {}",
            pattern.total(),
            state.n_particles
        )));
    }
    if state.statistics == Statistics::Fermion && pattern.counts.iter().any(|&c| c > 1) {
        // repeated fermionic rows make the determinant vanish; short-circuit
        return Ok(S::zero());
    }
    let us = pattern_modes(pattern, h)?;
    let mut acc = S::zero();
    for term in &state.terms {
        if term.factors.len() != us.len() {
            return Err(FockError::PatternMismatch(
                "term particle number differs from pattern".to_string(),
            ));
        }
        let mut m = vec![vec![S::zero(); us.len()]; us.len()];
        for (i, u) in us.iter().enumerate() {
            for (j, w) in term.factors.iter().enumerate() {
                m[i][j] = gram_entry(u, w)?;
            }
        }
        let overlap = match state.statistics {
            Statistics::Fermion => determinant(&m),
            Statistics::Boson => permanent(&m),
        };
        acc = acc.add(&term.coefficient.mul(&overlap));
    }
    if state.statistics == Statistics::Boson {
        let fact: Rational = pattern.counts.iter().map(|&c| factorial(c)).product();
        let inv_sqrt = S::from_rational(&(Rational::new(1.into(), 1.into()) / fact))
            .try_sqrt()
            .expect("factorial reciprocal has an exact square root");
        acc = acc.mul(&inv_sqrt);
    }
    Ok(acc)
}

/// All occupation patterns of a context for a given particle number and
/// statistics, in ascending lexicographic count order.
pub fn enumerate_patterns(
    context_id: &str,
    width: usize,
    n: u32,
    statistics: Statistics,
) -> Vec<OccupationPattern> {
    let cap = statistics.cap(n);
    let mut out = Vec::new();
    let mut counts = vec![0u32; width];
    fn rec(
        counts: &mut Vec<u32>,
        pos: usize,
        remaining: u32,
        cap: u32,
        context_id: &str,
        out: &mut Vec<OccupationPattern>,
    ) {
        if pos == counts.len() {
            if remaining == 0 {
                out.push(OccupationPattern {
                    context_id: context_id.to_string(),
                    counts: counts.clone(),
                });
            }
            return;
        }
        for v in 0..=cap.min(remaining) {
            counts[pos] = v;
            rec(counts, pos + 1, remaining - v, cap, context_id, out);
        }
        counts[pos] = 0;
    }
    rec(&mut counts, 0, n, cap, context_id, &mut out);
    out
}

/// Probability of every pattern of a context; the probabilities of a
/// normalized state sum to one exactly in the exact backend.
pub fn outcome_distribution<S: Scalar>(
    state: &FockState<S>,
    context_id: &str,
    h: &ModeHypergraph<S>,
) -> Result<Vec<(OccupationPattern, S)>, FockError> {
    let ctx = h.context(context_id)?;
    let patterns = enumerate_patterns(
        context_id,
        ctx.modes.len(),
        state.n_particles,
        state.statistics,
    );
    patterns
        .into_iter()
        .map(|p| {
            let a = amplitude(state, &p, h)?;
            Ok((p, a.mul(&a)))
        })
        .collect()
}

/// Nonzero-amplitude patterns of a context with their amplitudes.
pub fn expand_in_context<S: Scalar>(
    state: &FockState<S>,
    context_id: &str,
    h: &ModeHypergraph<S>,
) -> Result<Vec<(OccupationPattern, S)>, FockError> {
    let ctx = h.context(context_id)?;
    let patterns = enumerate_patterns(
        context_id,
        ctx.modes.len(),
        state.n_particles,
        state.statistics,
    );
    let mut out = Vec::new();
    for p in patterns {
        let a = amplitude(state, &p, h)?;
        if !a.is_zero() {
            out.push((p, a));
        }
    }
    Ok(out)
}

/// Rebuilds a state from a context expansion; the result has equal
/// amplitudes on every pattern of every context.
pub fn state_from_expansion<S: Scalar>(
    expansion: &[(OccupationPattern, S)],
    statistics: Statistics,
    n: u32,
    h: &ModeHypergraph<S>,
) -> Result<FockState<S>, FockError> {
    let mut terms = Vec::new();
    for (pattern, amp) in expansion {
        let factors: Vec<Mode<S>> = pattern_modes(pattern, h)?.into_iter().cloned().collect();
        let mut coefficient = amp.clone();
        if statistics == Statistics::Boson {
            let fact: Rational = pattern.counts.iter().map(|&c| factorial(c)).product();
            let inv_sqrt = S::from_rational(&(Rational::new(1.into(), 1.into()) / fact))
                .try_sqrt()
                .expect("factorial reciprocal has an exact square root");
            coefficient = coefficient.mul(&inv_sqrt);
        }
        terms.push(ProductTerm {
            coefficient,
            factors,
        });
    }
    Ok(FockState {
        n_particles: n,
        statistics,
        terms,
    })
}

/// Squared norm computed from cross-term Gram determinants/permanents.
pub fn norm_squared<S: Scalar>(state: &FockState<S>) -> Result<S, FockError> {
    let mut acc = S::zero();
    for t1 in &state.terms {
        for t2 in &state.terms {
            let n = t1.factors.len();
            let mut m = vec![vec![S::zero(); n]; n];
            for (i, a) in t1.factors.iter().enumerate() {
                for (j, b) in t2.factors.iter().enumerate() {
                    m[i][j] = gram_entry(a, b)?;
                }
            }
            let overlap = match state.statistics {
                Statistics::Fermion => determinant(&m),
                Statistics::Boson => permanent(&m),
            };
            acc = acc.add(&t1.coefficient.mul(&t2.coefficient).mul(&overlap));
        }
    }
    Ok(acc)
}

/// Expectation of the occupation-number observable of one mode, computed via
/// the first context containing it; the value does not depend on which
/// containing context is used.
pub fn number_expectation<S: Scalar>(
    state: &FockState<S>,
    mode_id: &str,
    h: &ModeHypergraph<S>,
) -> Result<S, FockError> {
    let mode_idx = h.mode_idx(mode_id)?;
    let ctxs = h.contexts_of_mode(mode_idx);
    let &ctx = ctxs
        .first()
        .ok_or_else(|| FockError::ModeWithoutContext(mode_id.to_string()))?;
    number_expectation_via(state, mode_id, &h.contexts[ctx].id.clone(), h)
}

/// Same expectation through an explicitly chosen containing context.
pub fn number_expectation_via<S: Scalar>(
    state: &FockState<S>,
    mode_id: &str,
    context_id: &str,
    h: &ModeHypergraph<S>,
) -> Result<S, FockError> {
    let ctx = h.context(context_id)?;
    let mode_idx = h.mode_idx(mode_id)?;
    let pos = ctx
        .modes
        .iter()
        .position(|&m| m == mode_idx)
        .ok_or_else(|| FockError::ModeWithoutContext(mode_id.to_string()))?;
    let dist = outcome_distribution(state, context_id, h)?;
    let mut acc = S::zero();
    for (pattern, prob) in dist {
        if pattern.counts[pos] > 0 {
            acc = acc.add(&S::from_int(pattern.counts[pos] as i64).mul(&prob));
        }
    }
    Ok(acc)
}

/// Applies an orthogonal matrix to every factor of every term. Against the
/// equally transformed hypergraph all context probabilities are unchanged.
pub fn transform_state<S: Scalar>(
    state: &FockState<S>,
    u: &Matrix<S>,
) -> Result<FockState<S>, FockError> {
    if !u.is_orthogonal() {
        return Err(ModeSetError::NonOrthogonalTransform.into());
    }
    let terms = state
        .terms
        .iter()
        .map(|t| ProductTerm {
            coefficient: t.coefficient.clone(),
            factors: t
                .factors
                .iter()
                .map(|f| Mode::new(f.id.clone(), u.apply(&f.components)))
                .collect(),
        })
        .collect();
    Ok(FockState {
        n_particles: state.n_particles,
        statistics: state.statistics,
        terms,
    })
}

/// Looks up hypergraph modes by id and builds the product state.
pub fn product_state_from_ids<S: Scalar>(
    h: &ModeHypergraph<S>,
    ids: &[&str],
    statistics: Statistics,
) -> Result<FockState<S>, FockError> {
    let vectors = ids
        .iter()
        .map(|id| Ok(h.modes[h.mode_idx(id)?].clone()))
        .collect::<Result<Vec<_>, ModeSetError>>()?;
    product_state(vectors, statistics)
}
