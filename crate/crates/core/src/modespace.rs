//! Mode vectors, measurement contexts, and the hypergraph they form.
//!
//! A context is a set of `d` mutually orthogonal modes whose projectors
//! resolve the identity; a mode may (and for the built-in set, must) belong
//! to several contexts. Vectors are stored unnormalized together with their
//! exact squared norm, so normalization factors appear only inside
//! [`ModeHypergraph::overlap`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{QSqrt2, Scalar, ScalarError};

#[derive(Debug, Error)]
pub enum ModeSetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown mode id `{0}`")]
    UnknownMode(String),
    #[error("unknown context id `{0}`")]
    UnknownContext(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("transform matrix is not orthogonal within backend tolerance")]
    NonOrthogonalTransform,
    #[error("vector `{0}` has a squared norm without an exact square root in this backend")]
    NotNormalizable(String),
    #[error("mode-set file: {0}")]
    Format(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A single mode: an unnormalized vector plus its exact squared norm.
#[derive(Debug, Clone)]
pub struct Mode<S> {
    pub id: String,
    pub components: Vec<S>,
    pub norm2: S,
}

impl<S: Scalar> Mode<S> {
    pub fn new(id: impl Into<String>, components: Vec<S>) -> Self {
        let norm2 = dot(&components, &components);
        Mode {
            id: id.into(),
            components,
            norm2,
        }
    }
}

/// An ordered list of mode indices into the owning hypergraph.
#[derive(Debug, Clone)]
pub struct Context {
    pub id: String,
    pub modes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ModeHypergraph<S> {
    pub dim: usize,
    pub modes: Vec<Mode<S>>,
    pub contexts: Vec<Context>,
    mode_index: BTreeMap<String, usize>,
    context_index: BTreeMap<String, usize>,
}

pub fn dot<S: Scalar>(u: &[S], w: &[S]) -> S {
    u.iter()
        .zip(w)
        .fold(S::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

impl<S: Scalar> ModeHypergraph<S> {
    /// Builds a hypergraph from modes and (context id, member mode ids) pairs.
    pub fn new(
        dim: usize,
        modes: Vec<Mode<S>>,
        contexts: Vec<(String, Vec<String>)>,
    ) -> Result<Self, ModeSetError> {
        let mut mode_index = BTreeMap::new();
        for (i, m) in modes.iter().enumerate() {
            if mode_index.insert(m.id.clone(), i).is_some() {
                return Err(ModeSetError::DuplicateId(m.id.clone()));
            }
        }
        let mut context_index = BTreeMap::new();
        let mut ctxs = Vec::with_capacity(contexts.len());
        for (i, (id, member_ids)) in contexts.into_iter().enumerate() {
            if context_index.insert(id.clone(), i).is_some() {
                return Err(ModeSetError::DuplicateId(id));
            }
            let members = member_ids
                .iter()
                .map(|mid| {
                    mode_index
                        .get(mid)
                        .copied()
                        .ok_or_else(|| ModeSetError::UnknownMode(mid.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ctxs.push(Context { id, modes: members });
        }
        Ok(ModeHypergraph {
            dim,
            modes,
            contexts: ctxs,
            mode_index,
            context_index,
        })
    }

    pub fn mode_idx(&self, id: &str) -> Result<usize, ModeSetError> {
        self.mode_index
            .get(id)
            .copied()
            .ok_or_else(|| ModeSetError::UnknownMode(id.to_string()))
    }

    pub fn context_idx(&self, id: &str) -> Result<usize, ModeSetError> {
        self.context_index
            .get(id)
            .copied()
            .ok_or_else(|| ModeSetError::UnknownContext(id.to_string()))
    }

    pub fn context(&self, id: &str) -> Result<&Context, ModeSetError> {
        Ok(&self.contexts[self.context_idx(id)?])
    }

    /// Indices of the contexts containing a given mode, in declaration order.
    pub fn contexts_of_mode(&self, mode: usize) -> Vec<usize> {
        self.contexts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.modes.contains(&mode))
            .map(|(i, _)| i)
            .collect()
    }

    /// Normalized inner product of two stored vectors.
    pub fn overlap_vec(u: &Mode<S>, w: &Mode<S>) -> Result<S, ModeSetError> {
        if u.components.len() != w.components.len() {
            return Err(ModeSetError::DimensionMismatch {
                expected: u.components.len(),
                got: w.components.len(),
            });
        }
        let raw: S = dot(&u.components, &w.components);
        let nu = u
            .norm2
            .try_sqrt()
            .ok_or_else(|| ModeSetError::NotNormalizable(u.id.clone()))?;
        let nw = w
            .norm2
            .try_sqrt()
            .ok_or_else(|| ModeSetError::NotNormalizable(w.id.clone()))?;
        let denom = nu.mul(&nw);
        let inv = denom.inverse()?;
        Ok(raw.mul(&inv))
    }

    /// Normalized inner product of two modes by id.
    pub fn overlap(&self, u: &str, w: &str) -> Result<S, ModeSetError> {
        let mu = &self.modes[self.mode_idx(u)?];
        let mw = &self.modes[self.mode_idx(w)?];
        Self::overlap_vec(mu, mw)
    }

    /// Sum of normalized projectors over all modes.
    pub fn projector_sum(&self) -> Result<Matrix<S>, ModeSetError> {
        let mut sum: Matrix<S> = Matrix::zero(self.dim);
        for m in &self.modes {
            let inv_norm2 = m
                .norm2
                .inverse()
                .map_err(|_| ModeSetError::NotNormalizable(m.id.clone()))?;
            for r in 0..self.dim {
                for c in 0..self.dim {
                    let add = m.components[r].mul(&m.components[c]).mul(&inv_norm2);
                    *sum.at_mut(r, c) = sum.at(r, c).add(&add);
                }
            }
        }
        Ok(sum)
    }

    /// Applies an orthogonal matrix to every mode vector; the context
    /// structure is untouched and all pairwise overlaps are preserved.
    pub fn apply_transform(&self, u: &Matrix<S>) -> Result<Self, ModeSetError> {
        if u.dim != self.dim {
            return Err(ModeSetError::DimensionMismatch {
                expected: self.dim,
                got: u.dim,
            });
        }
        if !u.is_orthogonal() {
            return Err(ModeSetError::NonOrthogonalTransform);
        }
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.id.clone(), u.apply(&m.components)))
            .collect();
        Ok(ModeHypergraph {
            dim: self.dim,
            modes,
            contexts: self.contexts.clone(),
            mode_index: self.mode_index.clone(),
            context_index: self.context_index.clone(),
        })
    }

    /// Checks every structural invariant and reports all violations; an empty
    /// problem list means the hypergraph is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        for m in &self.modes {
            if m.components.len() != self.dim {
                problems.push(format!(
                    "mode {}: has {} components, expected {}",
                    m.id,
                    m.components.len(),
                    self.dim
                ));
            }
            if m.norm2.is_zero() {
                problems.push(format!("mode {}: zero vector", m.id));
            }
        }
        let mut multiplicity = vec![0usize; self.modes.len()];
        for ctx in &self.contexts {
            if ctx.modes.len() != self.dim {
                problems.push(format!(
                    "context {}: has {} modes, expected {}",
                    ctx.id,
                    ctx.modes.len(),
                    self.dim
                ));
            }
            for &m in &ctx.modes {
                multiplicity[m] += 1;
            }
            for (i, &a) in ctx.modes.iter().enumerate() {
                for &b in ctx.modes.iter().skip(i + 1) {
                    let d = dot(&self.modes[a].components, &self.modes[b].components);
                    if !d.is_zero() {
                        problems.push(format!(
                            "context {}: modes {} and {} are not orthogonal",
                            ctx.id, self.modes[a].id, self.modes[b].id
                        ));
                    }
                }
            }
            // resolution of identity: sum of normalized projectors over members
            let mut sum: Matrix<S> = Matrix::zero(self.dim);
            let mut resolvable = true;
            for &m in &ctx.modes {
                match self.modes[m].norm2.inverse() {
                    Ok(inv) => {
                        for r in 0..self.dim {
                            for c in 0..self.dim {
                                let add = self.modes[m].components[r]
                                    .mul(&self.modes[m].components[c])
                                    .mul(&inv);
                                *sum.at_mut(r, c) = sum.at(r, c).add(&add);
                            }
                        }
                    }
                    Err(_) => resolvable = false,
                }
            }
            if resolvable && !sum.approx_eq(&Matrix::identity(self.dim)) {
                problems.push(format!(
                    "context {}: projectors do not resolve the identity",
                    ctx.id
                ));
            }
        }
        for (i, &count) in multiplicity.iter().enumerate() {
            if count < 2 {
                problems.push(format!(
                    "mode {}: appears in {} context(s), expected at least 2",
                    self.modes[i].id, count
                ));
            }
        }
        ValidationReport {
            dim: self.dim,
            modes: self.modes.len(),
            contexts: self.contexts.len(),
            incidences: self.contexts.iter().map(|c| c.modes.len()).sum(),
            problems,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub modes: usize,
    pub contexts: usize,
    pub incidences: usize,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

// The built-in 18-mode, 9-context set in dimension 4. Mode `vIJ` belongs to
// contexts `CI` and `CJ`. Component signs are a fixed convention chosen so
// that the two-particle context expansions of the bundled analyses come out
// with definite signs; flipping any vector's sign changes no validity
// property.
const CANONICAL_VECTORS: [(&str, [i64; 4]); 18] = [
    ("v12", [0, 0, 0, 1]),
    ("v18", [0, 0, 1, 0]),
    ("v17", [1, 1, 0, 0]),
    ("v16", [1, -1, 0, 0]),
    ("v23", [-1, 0, 1, 0]),
    ("v29", [1, 0, 1, 0]),
    ("v28", [0, 1, 0, 0]),
    ("v34", [1, 1, 1, 1]),
    ("v37", [1, -1, 1, -1]),
    ("v39", [0, 1, 0, -1]),
    ("v45", [0, -1, 1, 0]),
    ("v48", [1, 0, 0, -1]),
    ("v47", [-1, 1, 1, -1]),
    ("v56", [1, 1, 1, -1]),
    ("v59", [1, -1, -1, -1]),
    ("v58", [1, 0, 0, 1]),
    ("v67", [0, 0, -1, -1]),
    ("v69", [-1, -1, 1, -1]),
];

const CANONICAL_CONTEXTS: [(&str, [&str; 4]); 9] = [
    ("C1", ["v12", "v18", "v17", "v16"]),
    ("C2", ["v23", "v29", "v28", "v12"]),
    ("C3", ["v34", "v37", "v39", "v23"]),
    ("C4", ["v45", "v48", "v47", "v34"]),
    ("C5", ["v56", "v59", "v58", "v45"]),
    ("C6", ["v16", "v67", "v69", "v56"]),
    ("C7", ["v17", "v67", "v47", "v37"]),
    ("C8", ["v18", "v58", "v48", "v28"]),
    ("C9", ["v69", "v59", "v39", "v29"]),
];

/// The built-in 18-mode Kochen-Specker construction in dimension 4.
pub fn canonical_18<S: Scalar>() -> ModeHypergraph<S> {
    let modes = CANONICAL_VECTORS
        .iter()
        .map(|(id, comps)| Mode::new(*id, comps.iter().map(|&c| S::from_int(c)).collect()))
        .collect();
    let contexts = CANONICAL_CONTEXTS
        .iter()
        .map(|(id, members)| {
            (
                id.to_string(),
                members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            )
        })
        .collect();
    ModeHypergraph::new(4, modes, contexts).expect("built-in mode set is well formed")
}

#[derive(Debug, Serialize, Deserialize)]
struct ModeSetFile {
    dim: usize,
    modes: Vec<ModeEntry>,
    contexts: Vec<ContextEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModeEntry {
    id: String,
    vec: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ContextEntry {
    id: String,
    modes: Vec<String>,
}

/// Parses the JSON mode-set format. Components use the scalar literal
/// grammar; the float backend additionally accepts plain decimals.
pub fn from_json<S: Scalar>(json: &str) -> Result<ModeHypergraph<S>, ModeSetError> {
    let file: ModeSetFile =
        serde_json::from_str(json).map_err(|e| ModeSetError::Format(e.to_string()))?;
    let modes = file
        .modes
        .into_iter()
        .map(|entry| {
            let comps = entry
                .vec
                .iter()
                .map(|lit| parse_component::<S>(lit))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Mode::new(entry.id, comps))
        })
        .collect::<Result<Vec<_>, ModeSetError>>()?;
    let contexts = file.contexts.into_iter().map(|c| (c.id, c.modes)).collect();
    ModeHypergraph::new(file.dim, modes, contexts)
}

fn parse_component<S: Scalar>(lit: &str) -> Result<S, ModeSetError> {
    match QSqrt2::parse(lit) {
        Ok(q) => Ok(S::from_qsqrt2(&q)),
        Err(e) => {
            if !S::EXACT {
                if let Ok(x) = lit.trim().parse::<f64>() {
                    let mut v = S::zero();
                    // route through the rational embedding to stay generic
                    v = v.add(&S::from_rational(
                        &crate::scalar::Rational::from_float(x)
                            .ok_or(ScalarError::BadLiteral(lit.to_string()))?,
                    ));
                    return Ok(v);
                }
            }
            Err(e.into())
        }
    }
}

/// Serializes a hypergraph into the JSON mode-set format.
pub fn to_json<S: Scalar>(h: &ModeHypergraph<S>) -> String {
    let file = ModeSetFile {
        dim: h.dim,
        modes: h
            .modes
            .iter()
            .map(|m| ModeEntry {
                id: m.id.clone(),
                vec: m.components.iter().map(|c| c.literal()).collect(),
            })
            .collect(),
        contexts: h
            .contexts
            .iter()
            .map(|c| ContextEntry {
                id: c.id.clone(),
                modes: c.modes.iter().map(|&i| h.modes[i].id.clone()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("mode-set serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Radical};

    #[test]
    fn canonical_is_valid() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let report = h.validate();
        assert!(report.is_valid(), "problems: {:?}", report.problems);
        assert_eq!(report.modes, 18);
        assert_eq!(report.contexts, 9);
        assert_eq!(report.incidences, 36);
    }

    #[test]
    fn canonical_membership_of_v37() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let idx = h.mode_idx("v37").unwrap();
        let ctxs: Vec<&str> = h
            .contexts_of_mode(idx)
            .into_iter()
            .map(|c| h.contexts[c].id.as_str())
            .collect();
        assert_eq!(ctxs, ["C3", "C7"]);
    }

    #[test]
    fn every_canonical_mode_in_exactly_two_contexts() {
        let h: ModeHypergraph<Radical> = canonical_18();
        for i in 0..h.modes.len() {
            assert_eq!(h.contexts_of_mode(i).len(), 2, "mode {}", h.modes[i].id);
        }
    }

    #[test]
    fn single_basis_flagged_for_low_multiplicity() {
        let modes: Vec<Mode<Radical>> = (0..4)
            .map(|i| {
                let mut comps = vec![Radical::zero(); 4];
                comps[i] = Radical::one();
                Mode::new(format!("e{i}"), comps)
            })
            .collect();
        let h = ModeHypergraph::new(
            4,
            modes,
            vec![(
                "B".to_string(),
                vec!["e0".into(), "e1".into(), "e2".into(), "e3".into()],
            )],
        )
        .unwrap();
        let report = h.validate();
        assert!(!report.is_valid());
        assert!(report.problems.iter().all(|p| p.contains("at least 2")));
    }

    #[test]
    fn orthogonality_violation_reported() {
        let m0 = Mode::new("a", vec![Radical::one(), Radical::zero()]);
        let m1 = Mode::new("b", vec![Radical::one(), Radical::one()]);
        let h = ModeHypergraph::new(
            2,
            vec![m0, m1],
            vec![
                ("X".to_string(), vec!["a".into(), "b".into()]),
                ("Y".to_string(), vec!["a".into(), "b".into()]),
            ],
        )
        .unwrap();
        let report = h.validate();
        assert!(report.problems.iter().any(|p| p.contains("not orthogonal")));
    }

    #[test]
    fn overlap_examples() {
        let h: ModeHypergraph<Radical> = canonical_18();
        // self overlap is 1
        assert_eq!(h.overlap("v34", "v34").unwrap(), Radical::one());
        // context partners are orthogonal
        assert!(h.overlap("v12", "v18").unwrap().is_zero());
        // the worked value from the two-boson expansion
        assert_eq!(
            h.overlap("v16", "v45").unwrap(),
            Radical::from_rational(ratio(1, 2))
        );
    }

    #[test]
    fn expansion_coefficients_of_v16_in_context_4() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let half = Radical::from_rational(ratio(1, 2));
        let inv_s2 = Radical::sqrt_rational(&ratio(1, 2)).unwrap();
        assert_eq!(h.overlap("v45", "v16").unwrap(), half);
        assert_eq!(h.overlap("v48", "v16").unwrap(), half);
        assert_eq!(h.overlap("v47", "v16").unwrap(), inv_s2.neg());
        assert!(h.overlap("v34", "v16").unwrap().is_zero());
    }

    #[test]
    fn identity_transform_is_noop() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let t = h.apply_transform(&Matrix::identity(4)).unwrap();
        for (a, b) in h.modes.iter().zip(&t.modes) {
            assert_eq!(a.components, b.components);
        }
    }

    #[test]
    fn transforms_preserve_overlaps() {
        let h: ModeHypergraph<Radical> = canonical_18();
        for u in [
            Matrix::signed_permutation(&[1, 0, 3, 2], &[1, -1, 1, -1]),
            Matrix::givens_quarter(4, 0, 1),
            Matrix::random_orthogonal(4, 7),
        ] {
            let t = h.apply_transform(&u).unwrap();
            assert!(t.validate().is_valid());
            for i in 0..h.modes.len() {
                for j in i..h.modes.len() {
                    let before = ModeHypergraph::overlap_vec(&h.modes[i], &h.modes[j]).unwrap();
                    let after = ModeHypergraph::overlap_vec(&t.modes[i], &t.modes[j]).unwrap();
                    assert_eq!(before, after);
                }
            }
        }
    }

    #[test]
    fn non_orthogonal_transform_rejected() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let mut m = Matrix::identity(4);
        *m.at_mut(0, 1) = Radical::one();
        assert!(matches!(
            h.apply_transform(&m),
            Err(ModeSetError::NonOrthogonalTransform)
        ));
    }

    #[test]
    fn canonical_projector_sum_is_nine_halves_identity() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let sum = h.projector_sum().unwrap();
        let lambda = sum.proportional_to_identity().unwrap();
        assert_eq!(lambda, Radical::from_rational(ratio(9, 2)));
    }

    #[test]
    fn json_roundtrip() {
        let h: ModeHypergraph<Radical> = canonical_18();
        let json = to_json(&h);
        let back: ModeHypergraph<Radical> = from_json(&json).unwrap();
        assert!(back.validate().is_valid());
        assert_eq!(back.modes.len(), 18);
        for (a, b) in h.modes.iter().zip(&back.modes) {
            assert_eq!(a.components, b.components);
        }
        // float backend reads the same file
        let fb: ModeHypergraph<f64> = from_json(&json).unwrap();
        assert!(fb.validate().is_valid());
    }

    #[test]
    fn float_backend_accepts_decimal_components() {
        let json = r#"{"dim":2,
            "modes":[{"id":"a","vec":["0.6","0.8"]},{"id":"b","vec":["0.8","-0.6"]},
                     {"id":"c","vec":["1","0"]},{"id":"d","vec":["0","1"]}],
            "contexts":[{"id":"X","modes":["a","b"]},{"id":"Y","modes":["c","d"]}]}"#;
        // decimals are a float-backend extension
        assert!(from_json::<Radical>(json).is_err());
        let h: ModeHypergraph<f64> = from_json(json).unwrap();
        // a/b and c/d are orthonormal pairs, but multiplicity is 1 each
        let report = h.validate();
        assert!(report.problems.iter().all(|p| p.contains("at least 2")));
        assert!((h.overlap("a", "b").unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(from_json::<Radical>("{").is_err());
        let missing_mode = r#"{"dim":2,"modes":[{"id":"a","vec":["1","0"]}],
            "contexts":[{"id":"X","modes":["a","zz"]}]}"#;
        assert!(matches!(
            from_json::<Radical>(missing_mode),
            Err(ModeSetError::UnknownMode(_))
        ));
    }
}
