//! Small dense matrices over a backend scalar.
//!
//! Only what the mode-space checks need: products, transposes, identity
//! comparison, and exact orthogonal generators (signed permutations and
//! quarter-turn Givens rotations, whose entries stay inside Q(sqrt 2)).

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    pub dim: usize,
    entries: Vec<S>, // row major, dim x dim
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            *m.at_mut(i, i) = S::one();
        }
        m
    }

    pub fn zero(dim: usize) -> Self {
        Matrix {
            dim,
            entries: vec![S::zero(); dim * dim],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &S {
        &self.entries[r * self.dim + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut S {
        &mut self.entries[r * self.dim + c]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let mut acc = S::zero();
                for k in 0..self.dim {
                    acc = acc.add(&self.at(r, k).mul(other.at(k, c)));
                }
                *out.at_mut(r, c) = acc;
            }
        }
        out
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                let mut acc = S::zero();
                for (c, x) in v.iter().enumerate() {
                    acc = acc.add(&self.at(r, c).mul(x));
                }
                acc
            })
            .collect()
    }

    /// All entries of the difference vanish under the backend zero test.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.sub(b).is_zero())
    }

    /// `U^T U = I` under the backend zero test.
    pub fn is_orthogonal(&self) -> bool {
        self.transpose()
            .mul(self)
            .approx_eq(&Self::identity(self.dim))
    }

    /// If the matrix equals `lambda * I`, returns `lambda`.
    pub fn proportional_to_identity(&self) -> Option<S> {
        let lambda = self.at(0, 0).clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let expect = if r == c { lambda.clone() } else { S::zero() };
                if !self.at(r, c).sub(&expect).is_zero() {
                    return None;
                }
            }
        }
        Some(lambda)
    }

    /// Signed permutation: entry `sigma(i)`-th of row i is `signs[i]`.
    pub fn signed_permutation(perm: &[usize], signs: &[i8]) -> Self {
        let dim = perm.len();
        let mut m = Self::zero(dim);
        for (i, (&p, &s)) in perm.iter().zip(signs).enumerate() {
            *m.at_mut(i, p) = if s < 0 { S::one().neg() } else { S::one() };
        }
        m
    }

    /// Quarter-turn Givens rotation in the (i, j) plane; entries are
    /// `1/sqrt(2)`, exact in the radical backend.
    pub fn givens_quarter(dim: usize, i: usize, j: usize) -> Self {
        assert!(i != j && i < dim && j < dim);
        let c = S::from_rational(&crate::scalar::ratio(1, 2))
            .try_sqrt()
            .expect("sqrt(1/2) is representable in every backend");
        let mut m = Self::identity(dim);
        *m.at_mut(i, i) = c.clone();
        *m.at_mut(j, j) = c.clone();
        *m.at_mut(i, j) = c.neg();
        *m.at_mut(j, i) = c;
        m
    }

    /// Deterministic pseudo-random orthogonal matrix composed of signed
    /// permutations interleaved with quarter-turn Givens rotations.
    pub fn random_orthogonal(dim: usize, seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut m = Self::identity(dim);
        for _ in 0..6 {
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(&mut rng);
            let signs: Vec<i8> = (0..dim)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            m = Self::signed_permutation(&perm, &signs).mul(&m);
            let i = rng.random_range(0..dim);
            let mut j = rng.random_range(0..dim);
            while j == i {
                j = rng.random_range(0..dim);
            }
            m = Self::givens_quarter(dim, i, j).mul(&m);
        }
        m
    }
}
