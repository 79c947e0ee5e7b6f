//! Exact scalar arithmetic.
//!
//! Everything the canonical analyses compute lives in the field `Q(sqrt 2)`:
//! mode components, amplitudes, probabilities. [`QSqrt2`] is that field in
//! `a + b*sqrt(2)` form and is the type the text grammar for scalar literals
//! maps onto. The engine itself runs on [`Radical`], a slightly larger field
//! (rational combinations of square roots of squarefree integers) so that
//! normalization factors such as `1/sqrt(N!)` stay exact for any particle
//! number. A float backend implements the same [`Scalar`] interface with a
//! fixed `1e-9` zero tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational in canonical reduced form
/// (positive denominator, gcd of numerator and denominator 1).
pub type Rational = BigRational;

/// Convenience constructor for small rationals.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid scalar literal `{0}`")]
    BadLiteral(String),
}

/// An element `a + b*sqrt(2)` of the field Q(sqrt 2).
///
/// Equality is componentwise; the value is zero iff both parts are zero,
/// which is an exact test because sqrt(2) is irrational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: Rational,
    pub b: Rational,
}

impl QSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn from_rational(a: Rational) -> Self {
        QSqrt2 {
            a,
            b: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(ratio(n, 1))
    }

    /// `p/q + r/s*sqrt(2)` from four small integers.
    pub fn from_parts(p: i64, q: i64, r: i64, s: i64) -> Self {
        QSqrt2 {
            a: ratio(p, q),
            b: ratio(r, s),
        }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `sqrt(2)` itself.
    pub fn sqrt2() -> Self {
        QSqrt2 {
            a: Rational::zero(),
            b: Rational::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        QSqrt2 {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        QSqrt2 {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
        }
    }

    pub fn neg(&self) -> Self {
        QSqrt2 {
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// `(a1 + b1 s)(a2 + b2 s) = (a1 a2 + 2 b1 b2) + (a1 b2 + a2 b1) s` with `s = sqrt(2)`.
    pub fn mul(&self, other: &Self) -> Self {
        let two = ratio(2, 1);
        QSqrt2 {
            a: &self.a * &other.a + &two * &self.b * &other.b,
            b: &self.a * &other.b + &self.b * &other.a,
        }
    }

    /// Multiplicative inverse via the conjugate: `1/x = (a - b s)/(a^2 - 2 b^2)`.
    ///
    /// The denominator is nonzero for any nonzero `x` because sqrt(2) is
    /// irrational, so the inverse exists exactly.
    pub fn inverse(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let norm = &self.a * &self.a - ratio(2, 1) * &self.b * &self.b;
        debug_assert!(!norm.is_zero());
        Ok(QSqrt2 {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
        })
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * std::f64::consts::SQRT_2
    }

    /// Renders the literal grammar `R | R*s2 | R + R*s2 | R - R*s2`.
    pub fn literal(&self) -> String {
        if self.b.is_zero() {
            return format!("{}", self.a);
        }
        let b_part = if self.b.abs().is_one() {
            "s2".to_string()
        } else {
            format!("{}*s2", self.b.abs())
        };
        if self.a.is_zero() {
            if self.b.is_negative() {
                format!("-{b_part}")
            } else {
                b_part
            }
        } else if self.b.is_negative() {
            format!("{} - {b_part}", self.a)
        } else {
            format!("{} + {b_part}", self.a)
        }
    }

    /// Parses the literal grammar. Accepts `1/2`, `-1/4*s2`, `3/4 - 1/2*s2`,
    /// and a bare `s2` for `1*s2`.
    pub fn parse(input: &str) -> Result<Self, ScalarError> {
        let bad = || ScalarError::BadLiteral(input.to_string());
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        for (sign, term) in split_signed_terms(input).ok_or_else(bad)? {
            let term = term.trim();
            if term.is_empty() {
                return Err(bad());
            }
            let (coeff_str, is_s2) = match term.strip_suffix("s2") {
                Some(rest) => {
                    let rest = rest.trim();
                    let rest = rest.strip_suffix('*').unwrap_or(rest).trim();
                    (if rest.is_empty() { "1" } else { rest }, true)
                }
                None => (term, false),
            };
            let coeff = Rational::from_str(coeff_str).map_err(|_| bad())?;
            let coeff = if sign < 0 { -coeff } else { coeff };
            if is_s2 {
                b += coeff;
            } else {
                a += coeff;
            }
        }
        Ok(QSqrt2 { a, b })
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// Splits `x - y + z` into `[(1, x), (-1, y), (1, z)]`, keeping signs attached
/// to terms rather than to numerators. At most one sign per term.
fn split_signed_terms(input: &str) -> Option<Vec<(i8, String)>> {
    let s = input.trim();
    if s.is_empty() {
        return None;
    }
    let mut out = Vec::new();
    let mut sign: i8 = 1;
    let mut signed = false;
    let mut cur = String::new();
    let mut expecting_term = true;
    for ch in s.chars() {
        match ch {
            '+' | '-' if !expecting_term => {
                out.push((sign, cur.trim().to_string()));
                sign = if ch == '-' { -1 } else { 1 };
                signed = true;
                cur = String::new();
                expecting_term = true;
            }
            '+' | '-' if expecting_term && cur.trim().is_empty() => {
                if signed {
                    return None; // `--3` and friends
                }
                sign = if ch == '-' { -1 } else { 1 };
                signed = true;
            }
            _ => {
                if !ch.is_whitespace() {
                    expecting_term = false;
                }
                cur.push(ch);
            }
        }
    }
    if cur.trim().is_empty() {
        return None;
    }
    out.push((sign, cur.trim().to_string()));
    Some(out)
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Falls back to a quotient of lossy conversions for huge operands.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Trial divisors are capped; radicands beyond the cap are out of the
/// supported range rather than silently slow.
const FACTOR_CAP: u64 = 1_000_000;

/// Extracts the square part of a nonnegative integer: `n = s^2 * f` with `f`
/// squarefree; returns `(s, f)`, or `None` when `n` has two prime factors
/// above the trial-division cap and squarefreeness cannot be settled.
fn square_part(n: &BigInt) -> Option<(BigInt, BigInt)> {
    debug_assert!(!n.is_negative());
    if n.is_zero() {
        return Some((BigInt::zero(), BigInt::zero()));
    }
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    let mut m = n.clone();
    let mut p = BigInt::from(2u32);
    let cap = BigInt::from(FACTOR_CAP);
    while &p * &p <= m && p <= cap {
        let mut count = 0u32;
        while (&m % &p).is_zero() {
            m /= &p;
            count += 1;
        }
        if count > 0 {
            s *= p.pow(count / 2);
            if count % 2 == 1 {
                f *= &p;
            }
        }
        p += 1;
    }
    if &p * &p > m {
        // fully factored; the leftover is 1 or a prime
        f *= &m;
        return Some((s, f));
    }
    // cap reached: the leftover has no factor below the cap
    let root = m.sqrt();
    if &root * &root == m {
        s *= root;
        Some((s, f))
    } else if m < &cap * &cap * &cap {
        // room for at most two prime factors, and a non-square with two
        // distinct large primes is still squarefree
        f *= &m;
        Some((s, f))
    } else {
        None
    }
}

/// An exact real of the form `sum_i q_i * sqrt(t_i)` with `q_i` rational and
/// the `t_i` distinct squarefree positive integers (`t = 1` is the rational
/// part). Closed under field operations; used as the exact engine scalar so
/// that bosonic normalizations like `1/sqrt(6)` remain representable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radical {
    // key: squarefree radicand, value: nonzero rational coefficient
    terms: BTreeMap<u64, Rational>,
}

impl Radical {
    pub fn zero() -> Self {
        Radical {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(1, q);
        }
        Radical { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(ratio(n, 1))
    }

    pub fn from_qsqrt2(x: &QSqrt2) -> Self {
        let mut out = Self::from_rational(x.a.clone());
        if !x.b.is_zero() {
            out.terms.insert(2, x.b.clone());
        }
        out
    }

    /// Exact square root of a nonnegative rational: `sqrt(n/d) = sqrt(n d)/d`.
    /// `None` for negative inputs or radicands beyond the supported range.
    pub fn sqrt_rational(q: &Rational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(Self::zero());
        }
        let nd = q.numer() * q.denom();
        let (s, f) = square_part(&nd)?;
        let coeff = Rational::new(s, q.denom().clone());
        let key = f.to_u64()?;
        let mut terms = BTreeMap::new();
        terms.insert(key, coeff);
        Some(Radical { terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational component (coefficient of sqrt(1)).
    pub fn rational_part(&self) -> Rational {
        self.terms.get(&1).cloned().unwrap_or_else(Rational::zero)
    }

    /// Some(q) iff the value is exactly rational.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    /// Some iff the value lies in Q(sqrt 2), i.e. uses only sqrt(1) and sqrt(2).
    pub fn as_qsqrt2(&self) -> Option<QSqrt2> {
        if self.terms.keys().all(|&k| k == 1 || k == 2) {
            Some(QSqrt2 {
                a: self.terms.get(&1).cloned().unwrap_or_else(Rational::zero),
                b: self.terms.get(&2).cloned().unwrap_or_else(Rational::zero),
            })
        } else {
            None
        }
    }

    fn insert_term(terms: &mut BTreeMap<u64, Rational>, key: u64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            Self::insert_term(&mut terms, *k, v.clone());
        }
        Radical { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            Self::insert_term(&mut terms, *k, -v.clone());
        }
        Radical { terms }
    }

    pub fn neg(&self) -> Self {
        Radical {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }

    /// `sqrt(s)*sqrt(t) = g*sqrt((s/g)(t/g))` with `g = gcd(s,t)`; for
    /// squarefree `s`, `t` the product `(s/g)(t/g)` is squarefree again, so
    /// multiplication never needs integer factoring.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                let g = s.gcd(t);
                let key = (s / g) * (t / g);
                let coeff = a * b * Rational::from(BigInt::from(g));
                Self::insert_term(&mut terms, key, coeff);
            }
        }
        Radical { terms }
    }

    /// Exact inverse by iterated rationalization: writing `x = A + sqrt(p) B`
    /// with `p` a prime occurring in some radicand, `1/x = (A - sqrt(p) B) /
    /// (A^2 - p B^2)`, and the denominator lives in a subfield with one fewer
    /// prime. Distinct square roots are linearly independent over Q, so the
    /// denominator is nonzero whenever `x` is.
    pub fn inverse(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(Rational::one() / q));
        }
        let p = self
            .terms
            .keys()
            .filter(|&&k| k > 1)
            .map(|&k| smallest_prime_factor(k))
            .max()
            .expect("non-rational radical has a radicand > 1");
        let mut a = Radical::zero();
        let mut b = Radical::zero();
        for (k, v) in &self.terms {
            if k % p == 0 {
                Self::insert_term(&mut b.terms, k / p, v.clone());
            } else {
                Self::insert_term(&mut a.terms, *k, v.clone());
            }
        }
        let p_rad = Self::from_rational(Rational::from(BigInt::from(p)));
        let denom = a.mul(&a).sub(&p_rad.mul(&b.mul(&b)));
        let denom_inv = denom.inverse()?;
        // (A - sqrt(p) B) / (A^2 - p B^2)
        let sqrt_p = {
            let mut t = BTreeMap::new();
            t.insert(p, Rational::one());
            Radical { terms: t }
        };
        Ok(a.sub(&sqrt_p.mul(&b)).mul(&denom_inv))
    }

    /// Square root of a rational-valued radical, if the value is one.
    pub fn try_sqrt(&self) -> Option<Self> {
        Self::sqrt_rational(&self.as_rational()?)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| rational_to_f64(v) * (*k as f64).sqrt())
            .sum()
    }

    /// Literal form, extending the Q(sqrt 2) grammar with `sK` for other
    /// radicands: `1/2 - 1/4*s2 + 1/8*s3`.
    pub fn literal(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (k, v)) in self.terms.iter().enumerate() {
            let mag = v.abs();
            let body = if *k == 1 {
                format!("{mag}")
            } else if mag.is_one() {
                format!("s{k}")
            } else {
                format!("{mag}*s{k}")
            };
            if i == 0 {
                if v.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if v.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n > 1);
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += 1;
    }
    n
}

/// Common interface of the exact and float backends.
///
/// `is_zero` is the semantic divider: exact structural zero for [`Radical`],
/// `|x| < 1e-9` for `f64`. Everything downstream (orthogonality checks,
/// support tables, identity resolution) goes through it.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inverse(&self) -> Result<Self, ScalarError>;
    fn is_zero(&self) -> bool;
    fn from_rational(q: &Rational) -> Self;
    fn from_qsqrt2(x: &QSqrt2) -> Self;
    /// Square root of the value, when representable in the backend.
    fn try_sqrt(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn literal(&self) -> String;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&ratio(n, 1))
    }

    fn equals(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl Scalar for Radical {
    const EXACT: bool = true;

    fn zero() -> Self {
        Radical::zero()
    }
    fn one() -> Self {
        Radical::one()
    }
    fn add(&self, other: &Self) -> Self {
        Radical::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Radical::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Radical::mul(self, other)
    }
    fn neg(&self) -> Self {
        Radical::neg(self)
    }
    fn inverse(&self) -> Result<Self, ScalarError> {
        Radical::inverse(self)
    }
    fn is_zero(&self) -> bool {
        Radical::is_zero(self)
    }
    fn from_rational(q: &Rational) -> Self {
        Radical::from_rational(q.clone())
    }
    fn from_qsqrt2(x: &QSqrt2) -> Self {
        Radical::from_qsqrt2(x)
    }
    fn try_sqrt(&self) -> Option<Self> {
        Radical::try_sqrt(self)
    }
    fn to_f64(&self) -> f64 {
        Radical::to_f64(self)
    }
    fn literal(&self) -> String {
        Radical::literal(self)
    }
}

/// Zero tolerance of the float backend.
pub const FLOAT_EPS: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Result<Self, ScalarError> {
        if Scalar::is_zero(self) {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }
    fn is_zero(&self) -> bool {
        self.abs() < FLOAT_EPS
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn from_qsqrt2(x: &QSqrt2) -> Self {
        x.to_f64()
    }
    fn try_sqrt(&self) -> Option<Self> {
        if *self < -FLOAT_EPS {
            None
        } else {
            Some(self.max(0.0).sqrt())
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn literal(&self) -> String {
        format!("{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> QSqrt2 {
        QSqrt2::from_parts(n, d, 0, 1)
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let s2 = QSqrt2::sqrt2();
        assert_eq!(s2.mul(&s2), QSqrt2::from_int(2));
    }

    #[test]
    fn halves_add_to_one() {
        let h = q(1, 2);
        assert_eq!(h.add(&h), QSqrt2::one());
    }

    #[test]
    fn conjugate_product_is_norm() {
        // (1 + s2)(1 - s2) = -1
        let x = QSqrt2::from_parts(1, 1, 1, 1);
        let y = QSqrt2::from_parts(1, 1, -1, 1);
        assert_eq!(x.mul(&y), QSqrt2::from_int(-1));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(QSqrt2::from_int(2).inverse().unwrap(), q(1, 2));
        // (1/2)*s2 inverts to s2
        let x = QSqrt2::from_parts(0, 1, 1, 2);
        assert_eq!(x.inverse().unwrap(), QSqrt2::sqrt2());
        // 1 + s2 inverts to -1 + s2; checked by multiplying back
        let y = QSqrt2::from_parts(1, 1, 1, 1);
        let inv = y.inverse().unwrap();
        assert_eq!(inv, QSqrt2::from_parts(-1, 1, 1, 1));
        assert_eq!(y.mul(&inv), QSqrt2::one());
        assert_eq!(QSqrt2::zero().inverse(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn to_f64_examples() {
        assert!((QSqrt2::sqrt2().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(q(1, 16).to_f64(), 0.0625);
        assert_eq!(q(-3, 4).to_f64(), -0.75);
    }

    #[test]
    fn literal_roundtrip_examples() {
        for s in [
            "1/2",
            "-1/4*s2",
            "3/4 - 1/2*s2",
            "0",
            "s2",
            "-s2",
            "2 + s2",
            "-3",
        ] {
            let v = QSqrt2::parse(s).unwrap();
            let back = QSqrt2::parse(&v.literal()).unwrap();
            assert_eq!(v, back, "roundtrip failed for {s}");
        }
        assert_eq!(QSqrt2::parse("1/2").unwrap(), q(1, 2));
        assert_eq!(
            QSqrt2::parse("3/4 - 1/2*s2").unwrap(),
            QSqrt2::from_parts(3, 4, -1, 2)
        );
        assert!(QSqrt2::parse("").is_err());
        assert!(QSqrt2::parse("x + 1").is_err());
        assert!(QSqrt2::parse("1/0").is_err());
    }

    #[test]
    fn radical_sqrt_of_rationals() {
        let six = Radical::sqrt_rational(&ratio(6, 1)).unwrap();
        assert_eq!(six.mul(&six), Radical::from_int(6));
        let half = Radical::sqrt_rational(&ratio(1, 2)).unwrap();
        assert_eq!(half.mul(&half), Radical::from_rational(ratio(1, 2)));
        // sqrt(8) = 2*sqrt(2)
        let v = Radical::sqrt_rational(&ratio(8, 1)).unwrap();
        let two_s2 = Radical::from_qsqrt2(&QSqrt2::from_parts(0, 1, 2, 1));
        assert_eq!(v, two_s2);
        assert!(Radical::sqrt_rational(&ratio(-1, 1)).is_none());
    }

    #[test]
    fn strict_sign_parsing() {
        assert!(QSqrt2::parse("--3").is_err());
        assert!(QSqrt2::parse("+-3").is_err());
        assert!(QSqrt2::parse("1 + - 2").is_err());
        assert_eq!(QSqrt2::parse("+3").unwrap(), QSqrt2::from_int(3));
    }

    #[test]
    fn sqrt_of_huge_ambiguous_radicand_is_rejected() {
        // product of three distinct primes above the trial-division cap:
        // squarefree, but undecidably so within the factoring budget
        let p = BigInt::from(1_000_003u64);
        let q = BigInt::from(1_000_033u64);
        let r = BigInt::from(1_000_037u64);
        let n = Rational::from(&p * &q * &r);
        assert!(Radical::sqrt_rational(&n).is_none());
        // a perfect square of a large prime still works
        let sq = Rational::from(&p * &p);
        let root = Radical::sqrt_rational(&sq).unwrap();
        assert_eq!(root, Radical::from_rational(Rational::from(p)));
    }

    #[test]
    fn radical_inverse_multi_term() {
        // x = 1 + sqrt(2) + sqrt(3)
        let x = Radical::from_int(1)
            .add(&Radical::sqrt_rational(&ratio(2, 1)).unwrap())
            .add(&Radical::sqrt_rational(&ratio(3, 1)).unwrap());
        let inv = x.inverse().unwrap();
        assert_eq!(x.mul(&inv), Radical::one());
        assert!(Radical::zero().inverse().is_err());
    }

    #[test]
    fn radical_mixed_products_stay_canonical() {
        let s6 = Radical::sqrt_rational(&ratio(6, 1)).unwrap();
        let s3 = Radical::sqrt_rational(&ratio(3, 1)).unwrap();
        // sqrt(6)*sqrt(3) = 3*sqrt(2)
        let p = s6.mul(&s3);
        assert_eq!(p, Radical::from_qsqrt2(&QSqrt2::from_parts(0, 1, 3, 1)));
        assert_eq!(p.as_qsqrt2().unwrap(), QSqrt2::from_parts(0, 1, 3, 1));
        assert!(s3.as_qsqrt2().is_none());
    }

    #[test]
    fn float_backend_zero_tolerance() {
        assert!(Scalar::is_zero(&1e-10_f64));
        assert!(!Scalar::is_zero(&1e-8_f64));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..60).prop_map(|(n, d)| ratio(n, d))
    }

    fn arb_qsqrt2() -> impl Strategy<Value = QSqrt2> {
        (arb_rational(), arb_rational()).prop_map(|(a, b)| QSqrt2 { a, b })
    }

    proptest! {
        #[test]
        fn field_axioms(x in arb_qsqrt2(), y in arb_qsqrt2(), z in arb_qsqrt2()) {
            prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            prop_assert_eq!(x.mul(&y), y.mul(&x));
            prop_assert_eq!(x.add(&x.neg()), QSqrt2::zero());
            if !x.is_zero() {
                prop_assert_eq!(x.mul(&x.inverse().unwrap()), QSqrt2::one());
            }
        }

        #[test]
        fn float_semantics_agree(x in arb_qsqrt2(), y in arb_qsqrt2()) {
            let exact = x.mul(&y).to_f64();
            let approx = x.to_f64() * y.to_f64();
            prop_assert!((exact - approx).abs() < 1e-12 * (1.0 + exact.abs()));
        }

        #[test]
        fn literal_roundtrip(x in arb_qsqrt2()) {
            prop_assert_eq!(QSqrt2::parse(&x.literal()).unwrap(), x);
        }

        #[test]
        fn radical_embedding_respects_ops(x in arb_qsqrt2(), y in arb_qsqrt2()) {
            let rx = Radical::from_qsqrt2(&x);
            let ry = Radical::from_qsqrt2(&y);
            prop_assert_eq!(rx.mul(&ry), Radical::from_qsqrt2(&x.mul(&y)));
            prop_assert_eq!(rx.add(&ry), Radical::from_qsqrt2(&x.add(&y)));
        }
    }
}
