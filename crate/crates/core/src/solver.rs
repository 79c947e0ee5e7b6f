//! Non-contextual occupation-number assignment.
//!
//! An assignment gives every mode one nonnegative integer (0/1 for fermions,
//! 0..=N for bosons) such that the values in each context sum to the particle
//! number N. This module decides feasibility, enumerates or counts all
//! assignments by backtracking with per-context sum propagation, and produces
//! the parity infeasibility certificate where it applies.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::modespace::ModeHypergraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    /// Largest value a single mode can carry.
    pub fn cap(self, n: u32) -> u32 {
        match self {
            Statistics::Fermion => 1,
            Statistics::Boson => n,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("fermion count exceeds dimension: N={n} > d={d}")]
    FermionCountExceedsDimension { n: u32, d: usize },
    #[error("assignment is not fermionic (mode `{0}` carries {1})")]
    NotFermionic(String, u32),
    #[error("assignment does not match hypergraph modes: `{0}`")]
    UnknownMode(String),
}

/// One occupation value per mode, shared by every context containing it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    pub n_particles: u32,
    pub values: BTreeMap<String, u32>,
}

impl Assignment {
    /// Sum of the assigned values over all modes.
    pub fn total(&self) -> u64 {
        self.values.values().map(|&v| v as u64).sum()
    }
}

/// Parity obstruction: with each mode in exactly two contexts, the context
/// sums add to (#contexts)*N on one side and twice the mode total on the
/// other, so an odd product rules out any assignment.
#[derive(Debug, Clone, Serialize)]
pub struct ParityCertificate {
    pub contexts: usize,
    pub n_particles: u32,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Decide,
    EnumerateAll,
    Count,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub certificate: Option<ParityCertificate>,
    pub solutions: Option<Vec<Assignment>>,
    /// Exact solution count, serialized as a decimal string.
    #[serde(serialize_with = "serialize_count")]
    pub count: Option<BigUint>,
}

fn serialize_count<Ser: serde::Serializer>(
    count: &Option<BigUint>,
    s: Ser,
) -> Result<Ser::Ok, Ser::Error> {
    match count {
        Some(c) => s.serialize_some(&c.to_string()),
        None => s.serialize_none(),
    }
}

/// Returns the parity certificate when every mode lies in exactly two
/// contexts and (#contexts)*N is odd; `None` otherwise.
pub fn parity_certificate<S: Scalar>(h: &ModeHypergraph<S>, n: u32) -> Option<ParityCertificate> {
    let mut multiplicity = vec![0usize; h.modes.len()];
    for ctx in &h.contexts {
        for &m in &ctx.modes {
            multiplicity[m] += 1;
        }
    }
    if multiplicity.iter().any(|&c| c != 2) {
        return None;
    }
    let k = h.contexts.len();
    let product = (k as u64) * (n as u64);
    if product % 2 == 1 {
        Some(ParityCertificate {
            contexts: k,
            n_particles: n,
            statement: format!(
                "summing the conservation constraint over all {k} contexts gives {k}*{n} = {product}; \
                 each mode appears in exactly 2 contexts, so the same sum equals twice the total \
                 occupation and must be even -- no assignment exists"
            ),
        })
    } else {
        None
    }
}

struct Search<'a, S> {
    h: &'a ModeHypergraph<S>,
    n: u32,
    cap: u32,
    mode: SolveMode,
    values: Vec<Option<u32>>,
    // per context: (sum of assigned values, number of unassigned modes)
    ctx_state: Vec<(u32, u32)>,
    solutions: Vec<Vec<u32>>,
    count: BigUint,
    stop: bool,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn new(h: &'a ModeHypergraph<S>, n: u32, cap: u32, mode: SolveMode) -> Self {
        Search {
            h,
            n,
            cap,
            mode,
            values: vec![None; h.modes.len()],
            ctx_state: h
                .contexts
                .iter()
                .map(|c| (0, c.modes.len() as u32))
                .collect(),
            solutions: Vec::new(),
            count: BigUint::ZERO,
            stop: false,
        }
    }

    /// Most-constrained context first: among contexts with unassigned modes,
    /// the one with the fewest unassigned (ties by declaration order), then
    /// its first unassigned mode in context order. Modes outside every
    /// context are unconstrained and come last.
    fn pick_mode(&self) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        for (i, &(_, unassigned)) in self.ctx_state.iter().enumerate() {
            if unassigned == 0 {
                continue;
            }
            if best.map(|(u, _)| unassigned < u).unwrap_or(true) {
                best = Some((unassigned, i));
            }
        }
        if let Some((_, ctx)) = best {
            return self.h.contexts[ctx]
                .modes
                .iter()
                .copied()
                .find(|&m| self.values[m].is_none());
        }
        self.values.iter().position(|v| v.is_none())
    }

    fn feasible_so_far(&self) -> bool {
        self.ctx_state
            .iter()
            .all(|&(sum, unassigned)| sum <= self.n && sum + unassigned * self.cap >= self.n)
    }

    fn assign(&mut self, mode: usize, v: u32, ctxs: &[usize]) {
        self.values[mode] = Some(v);
        for &c in ctxs {
            self.ctx_state[c].0 += v;
            self.ctx_state[c].1 -= 1;
        }
    }

    fn unassign(&mut self, mode: usize, v: u32, ctxs: &[usize]) {
        self.values[mode] = None;
        for &c in ctxs {
            self.ctx_state[c].0 -= v;
            self.ctx_state[c].1 += 1;
        }
    }

    fn run(&mut self) {
        self.recurse();
    }

    fn recurse(&mut self) {
        if self.stop {
            return;
        }
        let Some(mode) = self.pick_mode() else {
            // complete assignment: every context must hit N exactly
            if self.ctx_state.iter().all(|&(sum, _)| sum == self.n) {
                self.record();
            }
            return;
        };
        let ctxs = self.h.contexts_of_mode(mode);
        for v in 0..=self.cap {
            self.assign(mode, v, &ctxs);
            if self.feasible_so_far() {
                self.recurse();
            }
            self.unassign(mode, v, &ctxs);
            if self.stop {
                return;
            }
        }
    }

    fn record(&mut self) {
        match self.mode {
            SolveMode::Decide => {
                self.solutions
                    .push(self.values.iter().map(|v| v.unwrap_or(0)).collect());
                self.stop = true;
            }
            SolveMode::EnumerateAll => {
                self.solutions
                    .push(self.values.iter().map(|v| v.unwrap_or(0)).collect());
            }
            SolveMode::Count => {
                self.count += 1u32;
            }
        }
    }
}

fn to_assignment<S: Scalar>(h: &ModeHypergraph<S>, n: u32, values: &[u32]) -> Assignment {
    Assignment {
        n_particles: n,
        values: h
            .modes
            .iter()
            .zip(values)
            .map(|(m, &v)| (m.id.clone(), v))
            .collect(),
    }
}

/// Complete backtracking search over per-mode values with per-context sum
/// propagation. `Decide` stops at the first solution, `EnumerateAll` returns
/// every solution in lexicographic order of the value vector (mode
/// declaration order), `Count` returns the exact number.
pub fn solve<S: Scalar>(
    h: &ModeHypergraph<S>,
    n: u32,
    stats: Statistics,
    mode: SolveMode,
) -> Result<FeasibilityResult, SolverError> {
    if stats == Statistics::Fermion && n as usize > h.dim {
        return Err(SolverError::FermionCountExceedsDimension { n, d: h.dim });
    }
    if let Some(cert) = parity_certificate(h, n) {
        // a certificate settles infeasibility; no enumeration is attempted
        return Ok(FeasibilityResult {
            feasible: false,
            certificate: Some(cert),
            solutions: match mode {
                SolveMode::Count => None,
                _ => Some(Vec::new()),
            },
            count: match mode {
                SolveMode::Count => Some(BigUint::ZERO),
                _ => None,
            },
        });
    }
    let mut search = Search::new(h, n, stats.cap(n), mode);
    search.run();
    let mut raw = std::mem::take(&mut search.solutions);
    raw.sort();
    let feasible = match mode {
        SolveMode::Count => search.count > BigUint::ZERO,
        _ => !raw.is_empty(),
    };
    Ok(FeasibilityResult {
        feasible,
        certificate: None,
        solutions: match mode {
            SolveMode::Count => None,
            _ => Some(raw.iter().map(|v| to_assignment(h, n, v)).collect()),
        },
        count: match mode {
            SolveMode::Count => Some(search.count),
            _ => None,
        },
    })
}

/// Splits the search over the first chosen mode's values across `jobs`
/// threads. The merged result is identical to the sequential one: solutions
/// are sorted and counts summed.
pub fn solve_parallel<S: Scalar>(
    h: &ModeHypergraph<S>,
    n: u32,
    stats: Statistics,
    mode: SolveMode,
    jobs: usize,
) -> Result<FeasibilityResult, SolverError> {
    if jobs <= 1 {
        return solve(h, n, stats, mode);
    }
    if stats == Statistics::Fermion && n as usize > h.dim {
        return Err(SolverError::FermionCountExceedsDimension { n, d: h.dim });
    }
    if parity_certificate(h, n).is_some() || h.modes.is_empty() {
        return solve(h, n, stats, mode);
    }
    let cap = stats.cap(n);
    let root = Search::new(h, n, cap, mode)
        .pick_mode()
        .expect("modes exist");
    let ctxs = h.contexts_of_mode(root);
    let branches: Vec<u32> = (0..=cap).collect();
    // one result per root value; each worker explores its branches in the
    // same order the sequential search would
    let mut per_branch: Vec<(u32, Vec<Vec<u32>>, BigUint)> = std::thread::scope(|scope| {
        let handles: Vec<_> = branches
            .chunks(branches.len().div_ceil(jobs))
            .map(|chunk| {
                let ctxs = ctxs.clone();
                scope.spawn(move || {
                    let mut acc = Vec::new();
                    for &v in chunk {
                        let mut search = Search::new(h, n, cap, mode);
                        search.assign(root, v, &ctxs);
                        if search.feasible_so_far() {
                            search.recurse();
                        }
                        acc.push((v, search.solutions, search.count));
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|j| j.join().expect("worker panicked"))
            .collect()
    });
    per_branch.sort_by_key(|&(v, _, _)| v);
    let mut all: Vec<Vec<u32>> = Vec::new();
    let mut count = BigUint::ZERO;
    for (_, sols, c) in per_branch {
        if mode == SolveMode::Decide && !all.is_empty() {
            break; // sequential order: lowest root value wins
        }
        all.extend(sols);
        count += c;
    }
    if mode == SolveMode::EnumerateAll {
        all.sort();
    }
    let feasible = match mode {
        SolveMode::Count => count > BigUint::ZERO,
        _ => !all.is_empty(),
    };
    Ok(FeasibilityResult {
        feasible,
        certificate: None,
        solutions: match mode {
            SolveMode::Count => None,
            _ => Some(all.iter().map(|v| to_assignment(h, n, v)).collect()),
        },
        count: match mode {
            SolveMode::Count => Some(count),
            _ => None,
        },
    })
}

/// Particle-hole dual of a fermionic assignment: every value v becomes 1-v,
/// turning an N-particle assignment into a (d-N)-particle one.
pub fn hole_dual<S: Scalar>(
    a: &Assignment,
    h: &ModeHypergraph<S>,
) -> Result<Assignment, SolverError> {
    for (id, &v) in &a.values {
        if v > 1 {
            return Err(SolverError::NotFermionic(id.clone(), v));
        }
        h.mode_idx(id)
            .map_err(|_| SolverError::UnknownMode(id.clone()))?;
    }
    Ok(Assignment {
        n_particles: h.dim as u32 - a.n_particles,
        values: a
            .values
            .iter()
            .map(|(id, &v)| (id.clone(), 1 - v))
            .collect(),
    })
}

/// Checks that an assignment satisfies the conservation constraint in every
/// context and the per-statistics value domain.
pub fn is_valid_assignment<S: Scalar>(
    a: &Assignment,
    h: &ModeHypergraph<S>,
    stats: Statistics,
) -> bool {
    let cap = stats.cap(a.n_particles);
    if a.values.len() != h.modes.len() || a.values.values().any(|&v| v > cap) {
        return false;
    }
    h.contexts.iter().all(|ctx| {
        ctx.modes
            .iter()
            .map(|&m| a.values.get(&h.modes[m].id).copied().unwrap_or(u32::MAX))
            .sum::<u32>()
            == a.n_particles
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modespace::canonical_18;
    use crate::scalar::Radical;

    fn h() -> ModeHypergraph<Radical> {
        canonical_18()
    }

    #[test]
    fn parity_certificates() {
        let h = h();
        assert!(parity_certificate(&h, 1).is_some());
        assert!(parity_certificate(&h, 2).is_none());
        assert!(parity_certificate(&h, 3).is_some());
        assert!(parity_certificate(&h, 0).is_none());
    }

    #[test]
    fn fermion_n1_infeasible_with_certificate() {
        let r = solve(&h(), 1, Statistics::Fermion, SolveMode::Decide).unwrap();
        assert!(!r.feasible);
        assert!(r.certificate.is_some());
        assert!(r.solutions.unwrap().is_empty());
    }

    #[test]
    fn fermion_n2_feasible() {
        let r = solve(&h(), 2, Statistics::Fermion, SolveMode::Decide).unwrap();
        assert!(r.feasible);
        assert!(r.certificate.is_none());
    }

    #[test]
    fn boson_n0_has_unique_all_zero_solution() {
        let r = solve(&h(), 0, Statistics::Boson, SolveMode::EnumerateAll).unwrap();
        let sols = r.solutions.unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].values.values().all(|&v| v == 0));
    }

    #[test]
    fn fermion_n4_has_unique_all_one_solution() {
        let r = solve(&h(), 4, Statistics::Fermion, SolveMode::EnumerateAll).unwrap();
        let sols = r.solutions.unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].values.values().all(|&v| v == 1));
    }

    #[test]
    fn fermion_overflow_rejected() {
        assert_eq!(
            solve(&h(), 5, Statistics::Fermion, SolveMode::Decide).unwrap_err(),
            SolverError::FermionCountExceedsDimension { n: 5, d: 4 }
        );
    }

    #[test]
    fn solutions_are_valid_and_total_nine() {
        let h = h();
        let r = solve(&h, 2, Statistics::Fermion, SolveMode::EnumerateAll).unwrap();
        let sols = r.solutions.unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(is_valid_assignment(s, &h, Statistics::Fermion));
            assert_eq!(s.total(), 9);
        }
    }

    #[test]
    fn count_matches_enumeration() {
        let h = h();
        let r1 = solve(&h, 2, Statistics::Fermion, SolveMode::EnumerateAll).unwrap();
        let r2 = solve(&h, 2, Statistics::Fermion, SolveMode::Count).unwrap();
        assert_eq!(
            BigUint::from(r1.solutions.unwrap().len()),
            r2.count.unwrap()
        );
    }

    #[test]
    fn hole_dual_is_involution_on_solutions() {
        let h = h();
        let sols = solve(&h, 2, Statistics::Fermion, SolveMode::EnumerateAll)
            .unwrap()
            .solutions
            .unwrap();
        for s in &sols {
            let dual = hole_dual(s, &h).unwrap();
            assert_eq!(dual.n_particles, 2);
            assert!(is_valid_assignment(&dual, &h, Statistics::Fermion));
            assert!(sols.contains(&dual));
            assert_eq!(hole_dual(&dual, &h).unwrap(), *s);
        }
    }

    #[test]
    fn hole_dual_all_zeros_to_all_ones() {
        let h = h();
        let zeros = solve(&h, 0, Statistics::Fermion, SolveMode::EnumerateAll)
            .unwrap()
            .solutions
            .unwrap()
            .remove(0);
        let dual = hole_dual(&zeros, &h).unwrap();
        assert_eq!(dual.n_particles, 4);
        assert!(dual.values.values().all(|&v| v == 1));
    }

    #[test]
    fn hole_dual_rejects_bosonic_values() {
        let h = h();
        let mut a = solve(&h, 2, Statistics::Boson, SolveMode::EnumerateAll)
            .unwrap()
            .solutions
            .unwrap()
            .remove(0);
        a.values.insert("v12".to_string(), 2);
        assert!(matches!(
            hole_dual(&a, &h),
            Err(SolverError::NotFermionic(_, 2))
        ));
    }

    #[test]
    fn bosonic_solutions_also_total_nine() {
        let h = h();
        let sols = solve(&h, 2, Statistics::Boson, SolveMode::EnumerateAll)
            .unwrap()
            .solutions
            .unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(is_valid_assignment(s, &h, Statistics::Boson));
            assert_eq!(s.total(), 9);
        }
    }

    #[test]
    fn non_canonical_hypergraph_counts_by_hand() {
        use crate::modespace::Mode;
        // dimension 3, two bases sharing the mode x:
        //   {x, y, z} and {x, (y+z)/sqrt2, (y-z)/sqrt2}
        let mk = |id: &str, v: [i64; 3]| {
            Mode::new(
                id,
                v.iter().map(|&c| Radical::from_int(c)).collect::<Vec<_>>(),
            )
        };
        let modes = vec![
            mk("x", [1, 0, 0]),
            mk("y", [0, 1, 0]),
            mk("z", [0, 0, 1]),
            mk("yp", [0, 1, 1]),
            mk("zp", [0, 1, -1]),
        ];
        let h = ModeHypergraph::new(
            3,
            modes,
            vec![
                ("A".to_string(), vec!["x".into(), "y".into(), "z".into()]),
                ("B".to_string(), vec!["x".into(), "yp".into(), "zp".into()]),
            ],
        )
        .unwrap();
        // one particle: either x=1 satisfying both contexts, or one of {y,z}
        // paired with one of {yp,zp}: 1 + 2*2 = 5 assignments
        let r = solve(&h, 1, Statistics::Fermion, SolveMode::EnumerateAll).unwrap();
        assert_eq!(r.solutions.unwrap().len(), 5);
        // no parity certificate applies (x sits in two contexts, others in one)
        assert!(parity_certificate(&h, 1).is_none());
    }

    #[test]
    fn modes_outside_every_context_are_enumerated() {
        use crate::modespace::Mode;
        let mut modes: Vec<Mode<Radical>> = (0..2)
            .map(|i| {
                let mut comps = vec![Radical::zero(); 2];
                comps[i] = Radical::one();
                Mode::new(format!("e{i}"), comps)
            })
            .collect();
        modes.push(Mode::new("lone", vec![Radical::one(), Radical::one()]));
        let h = ModeHypergraph::new(
            2,
            modes,
            vec![("B".to_string(), vec!["e0".into(), "e1".into()])],
        )
        .unwrap();
        let r = solve(&h, 1, Statistics::Fermion, SolveMode::EnumerateAll).unwrap();
        // two context assignments times two free values for the lone mode
        assert_eq!(r.solutions.unwrap().len(), 4);
    }

    #[test]
    fn parallel_solve_matches_sequential() {
        let h = h();
        for mode in [SolveMode::Decide, SolveMode::EnumerateAll, SolveMode::Count] {
            let seq = solve(&h, 2, Statistics::Fermion, mode).unwrap();
            let par = solve_parallel(&h, 2, Statistics::Fermion, mode, 3).unwrap();
            assert_eq!(seq.feasible, par.feasible);
            assert_eq!(seq.solutions, par.solutions);
            assert_eq!(seq.count, par.count);
        }
    }
}
