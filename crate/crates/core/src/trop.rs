//! Max-plus scalars, signed tropical numbers and signed tropical polynomials.
//!
//! `Trop` is an element of ℝ ∪ {−∞} with `⊕ = max` and `⊙ = +`. Finite
//! values are exact rationals. `SignedTrop` tags a modulus with a sign and
//! supports full multiplication but only same-sign addition.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trop {
    /// The tropical zero. Declared first so the derived order puts it below
    /// every finite value.
    NegInf,
    Fin(Rational),
}

impl Trop {
    pub fn zero() -> Self {
        Trop::NegInf
    }

    /// The tropical unit, i.e. the rational 0.
    pub fn one() -> Self {
        Trop::Fin(Rational::from_integer(0.into()))
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Trop::NegInf)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Trop::NegInf => None,
            Trop::Fin(r) => Some(r),
        }
    }

    /// Multiplication by a natural-number exponent, `self^{⊙k}`.
    pub fn pow(&self, k: u32) -> Trop {
        match self {
            _ if k == 0 => Trop::one(),
            Trop::NegInf => Trop::NegInf,
            Trop::Fin(r) => Trop::Fin(r * Rational::from_integer(k.into())),
        }
    }

    /// Ordinary subtraction `a − b` for finite `b`; `−∞ − b = −∞`.
    pub fn minus(&self, b: &Rational) -> Trop {
        match self {
            Trop::NegInf => Trop::NegInf,
            Trop::Fin(a) => Trop::Fin(a - b),
        }
    }
}

impl From<Rational> for Trop {
    fn from(r: Rational) -> Self {
        Trop::Fin(r)
    }
}

impl fmt::Display for Trop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trop::NegInf => f.write_str("-inf"),
            Trop::Fin(r) => f.write_str(&format_rational(r)),
        }
    }
}

impl std::str::FromStr for Trop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-∞" => Ok(Trop::NegInf),
            t => parse_rational(t).map(Trop::Fin),
        }
    }
}

impl Serialize for Trop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Trop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `a ⊕ b = max(a, b)`.
pub fn tadd(a: &Trop, b: &Trop) -> Trop {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `a ⊙ b = a + b`, with −∞ absorbing.
pub fn tmul(a: &Trop, b: &Trop) -> Trop {
    match (a, b) {
        (Trop::Fin(x), Trop::Fin(y)) => Trop::Fin(x + y),
        _ => Trop::NegInf,
    }
}

/// Tropical sum of an iterator; the empty sum is −∞.
pub fn tsum<'a>(items: impl IntoIterator<Item = &'a Trop>) -> Trop {
    items.into_iter().fold(
        Trop::NegInf,
        |acc, t| if *t > acc { t.clone() } else { acc },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Sign> {
        match v {
            -1 => Ok(Sign::Neg),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Pos),
            _ => Err(Error::Parse(format!("sign must be -1, 0 or 1, got {v}"))),
        }
    }

    fn mul(self, other: Sign) -> Sign {
        Sign::from_i8(self.as_i8() * other.as_i8()).expect("product of signs is a sign")
    }
}

/// An element of 𝕋± with `sign = Zero ⟺ modulus = −∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedTrop {
    sign: Sign,
    modulus: Trop,
}

impl SignedTrop {
    pub fn zero() -> Self {
        SignedTrop {
            sign: Sign::Zero,
            modulus: Trop::NegInf,
        }
    }

    /// A positive number with the given modulus (the zero if it is −∞).
    pub fn pos(modulus: Trop) -> Self {
        Self::new(Sign::Pos, modulus)
    }

    /// `⊖modulus`, or the zero if the modulus is −∞.
    pub fn neg(modulus: Trop) -> Self {
        Self::new(Sign::Neg, modulus)
    }

    /// Builds a signed number, normalising any −∞ modulus to the zero.
    pub fn new(sign: Sign, modulus: Trop) -> Self {
        if modulus.is_neg_inf() || sign == Sign::Zero {
            Self::zero()
        } else {
            SignedTrop { sign, modulus }
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn modulus(&self) -> &Trop {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// `⊖a`.
    pub fn negate(&self) -> Self {
        let sign = match self.sign {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
        };
        SignedTrop {
            sign,
            modulus: self.modulus.clone(),
        }
    }
}

impl fmt::Display for SignedTrop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Neg => write!(f, "⊖{}", self.modulus),
            _ => write!(f, "{}", self.modulus),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SignedTropRepr {
    sign: i8,
    abs: Trop,
}

impl Serialize for SignedTrop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignedTropRepr {
            sign: self.sign.as_i8(),
            abs: self.modulus.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignedTrop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SignedTropRepr::deserialize(d)?;
        let sign = Sign::from_i8(repr.sign).map_err(serde::de::Error::custom)?;
        if (sign == Sign::Zero) != repr.abs.is_neg_inf() {
            return Err(serde::de::Error::custom(
                "sign must be 0 exactly when abs is -inf",
            ));
        }
        Ok(SignedTrop::new(sign, repr.abs))
    }
}

/// Signed tropical multiplication: signs multiply, moduli add.
pub fn smul(a: &SignedTrop, b: &SignedTrop) -> SignedTrop {
    SignedTrop::new(a.sign.mul(b.sign), tmul(&a.modulus, &b.modulus))
}

/// Signed tropical addition, defined only when the signs agree or one
/// operand is the zero.
pub fn sadd(a: &SignedTrop, b: &SignedTrop) -> Result<SignedTrop> {
    match (a.sign, b.sign) {
        (Sign::Zero, _) => Ok(b.clone()),
        (_, Sign::Zero) => Ok(a.clone()),
        (x, y) if x == y => Ok(SignedTrop::new(x, tadd(&a.modulus, &b.modulus))),
        _ => Err(Error::MixedSigns),
    }
}

/// A signed tropical polynomial `⊕_α a_α ⊙ X^α` in `arity` variables.
///
/// Monomials are keyed by (exponent vector, sign); adding a monomial whose key
/// already exists merges the coefficients with `⊕`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TropPolynomial {
    arity: usize,
    terms: BTreeMap<(Vec<u32>, Sign), Trop>,
}

impl TropPolynomial {
    pub fn new(arity: usize) -> Self {
        TropPolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Adds `coeff ⊙ X^exponents`. Zero coefficients are dropped.
    pub fn add_monomial(&mut self, coeff: SignedTrop, exponents: Vec<u32>) -> Result<()> {
        if exponents.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: exponents.len(),
            });
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let slot = self
            .terms
            .entry((exponents, coeff.sign))
            .or_insert(Trop::NegInf);
        *slot = tadd(slot, &coeff.modulus);
        Ok(())
    }

    pub fn with_monomial(mut self, coeff: SignedTrop, exponents: Vec<u32>) -> Result<Self> {
        self.add_monomial(coeff, exponents)?;
        Ok(self)
    }

    pub fn monomials(&self) -> impl Iterator<Item = (SignedTrop, &[u32])> + '_ {
        self.terms
            .iter()
            .map(|((exp, sign), m)| (SignedTrop::new(*sign, m.clone()), exp.as_slice()))
    }

    /// True when some exponent vector carries both a positive and a negative
    /// coefficient.
    pub fn has_sign_collision(&self) -> bool {
        self.terms.keys().any(|(exp, sign)| {
            *sign == Sign::Pos && self.terms.contains_key(&(exp.clone(), Sign::Neg))
        })
    }

    /// Evaluates `(P⁺(x), P⁻(x))`; an empty sign part evaluates to −∞.
    pub fn eval_pm(&self, x: &[Trop]) -> Result<(Trop, Trop)> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        let mut plus = Trop::NegInf;
        let mut minus = Trop::NegInf;
        for ((exp, sign), coeff) in &self.terms {
            let value = exp
                .iter()
                .zip(x)
                .filter(|(&a, _)| a > 0)
                .fold(coeff.clone(), |acc, (&a, xi)| tmul(&acc, &xi.pow(a)));
            let slot = match sign {
                Sign::Pos => &mut plus,
                _ => &mut minus,
            };
            if value > *slot {
                *slot = value;
            }
        }
        Ok((plus, minus))
    }
}

/// `(P⁺(x), P⁻(x))` for a signed tropical polynomial.
pub fn poly_eval_pm(p: &TropPolynomial, x: &[Trop]) -> Result<(Trop, Trop)> {
    p.eval_pm(x)
}

/// Coordinatewise comparison helper used throughout: `a ≤ b` in every slot.
pub fn leq_all(a: &[Trop], b: &[Trop]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.cmp(y) != Ordering::Greater)
}
