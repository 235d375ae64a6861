//! Exact ground-field arithmetic: arbitrary-precision rationals and prime fields.
//!
//! Every [`FieldElem`] carries its field descriptor. Combining elements of two
//! different fields is a hard error: the `try_*` methods return
//! [`FieldError::MixedFields`], the operator impls panic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted prime modulus (exclusive).
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("mixed-field arithmetic: {0} vs {1}")]
    MixedFields(Field, Field),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("cannot parse field element {0:?}")]
    Parse(String),
}

/// Field descriptor: characteristic zero (Q) or a prime field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    pub fn prime(p: u64) -> Result<Field, FieldError> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn characteristic(self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => p as u64,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Field::Prime(_))
    }

    pub fn zero(self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> FieldElem {
        match self {
            Field::Rational => FieldElem::Rational(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => FieldElem::Residue {
                value: v.rem_euclid(p as i64) as u32,
                modulus: p,
            },
        }
    }

    pub fn from_bigint(self, v: &BigInt) -> FieldElem {
        match self {
            Field::Rational => FieldElem::Rational(BigRational::from_integer(v.clone())),
            Field::Prime(p) => {
                let r = v.mod_floor(&BigInt::from(p));
                FieldElem::Residue {
                    value: r.to_u32().expect("residue fits in u32"),
                    modulus: p,
                }
            }
        }
    }

    pub fn from_ratio(self, num: i64, den: i64) -> Result<FieldElem, FieldError> {
        self.from_i64(num).try_div(&self.from_i64(den))
    }

    /// All elements of a finite field in increasing residue order.
    pub fn elements(self) -> Option<Vec<FieldElem>> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some((0..p as i64).map(|v| self.from_i64(v)).collect()),
        }
    }

    /// Parses an integer, a residue, or (over Q) a fraction `a/b`.
    pub fn parse(self, s: &str) -> Result<FieldElem, FieldError> {
        let s = s.trim();
        let err = || FieldError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            return self.from_bigint(&n).try_div(&self.from_bigint(&d));
        }
        let n: BigInt = s.parse().map_err(|_| err())?;
        Ok(self.from_bigint(&n))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// An element of Q or of F_p. Rationals are kept in lowest terms with positive
/// denominator; residues lie in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Rational(BigRational),
    Residue { value: u32, modulus: u32 },
}

impl FieldElem {
    pub fn field(&self) -> Field {
        match self {
            FieldElem::Rational(_) => Field::Rational,
            FieldElem::Residue { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(r) => r.is_zero(),
            FieldElem::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Rational(r) => r.is_one(),
            FieldElem::Residue { value, .. } => *value == 1,
        }
    }

    pub fn residue(&self) -> Option<u32> {
        match self {
            FieldElem::Residue { value, .. } => Some(*value),
            FieldElem::Rational(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElem::Rational(r) => Some(r),
            FieldElem::Residue { .. } => None,
        }
    }

    fn same_field(&self, other: &FieldElem) -> Result<(), FieldError> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(FieldError::MixedFields(self.field(), other.field()))
        }
    }

    pub fn try_add(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a + b),
            (FieldElem::Residue { value: a, modulus: p }, FieldElem::Residue { value: b, .. }) => {
                FieldElem::Residue {
                    value: ((*a as u64 + *b as u64) % *p as u64) as u32,
                    modulus: *p,
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn try_sub(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => FieldElem::Rational(a * b),
            (FieldElem::Residue { value: a, modulus: p }, FieldElem::Residue { value: b, .. }) => {
                FieldElem::Residue {
                    value: ((*a as u64 * *b as u64) % *p as u64) as u32,
                    modulus: *p,
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn try_inv(&self) -> Result<FieldElem, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            FieldElem::Rational(a) => FieldElem::Rational(a.recip()),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: pow_mod(*value as u64, *modulus as u64 - 2, *modulus as u64) as u32,
                modulus: *modulus,
            },
        })
    }

    pub fn try_div(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.same_field(other)?;
        self.try_mul(&other.try_inv()?)
    }

    fn neg_ref(&self) -> FieldElem {
        match self {
            FieldElem::Rational(a) => FieldElem::Rational(-a),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }

    pub fn pow(&self, e: u32) -> FieldElem {
        let mut acc = self.field().one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Square test in the element's own field (zero counts as a square).
    pub fn is_square(&self) -> bool {
        match self {
            FieldElem::Rational(r) => {
                if r.is_negative() {
                    return false;
                }
                is_perfect_square(r.numer()) && is_perfect_square(r.denom())
            }
            FieldElem::Residue { value, modulus } => {
                if *value == 0 || *modulus == 2 {
                    return true;
                }
                pow_mod(*value as u64, (*modulus as u64 - 1) / 2, *modulus as u64) == 1
            }
        }
    }

    /// A square root in the element's field, if one exists.
    pub fn sqrt(&self) -> Option<FieldElem> {
        match self {
            FieldElem::Rational(r) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Some(FieldElem::Rational(BigRational::new(n, d)))
                } else {
                    None
                }
            }
            FieldElem::Residue { value, modulus } => (0..*modulus)
                .find(|x| (*x as u64 * *x as u64) % *modulus as u64 == *value as u64)
                .map(|x| FieldElem::Residue {
                    value: x,
                    modulus: *modulus,
                }),
        }
    }

    /// Integer value when the element is a rational integer.
    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            FieldElem::Rational(r) if r.is_integer() => Some(r.numer().clone()),
            FieldElem::Rational(_) => None,
            FieldElem::Residue { value, .. } => Some(BigInt::from(*value)),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            FieldElem::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl<'a> $trait<&'a FieldElem> for &'a FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &'a FieldElem) -> FieldElem {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                (&self).$try(&rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_exhaustive_small_primes() {
        for p in [2u64, 3, 5, 7] {
            let k = Field::prime(p).unwrap();
            let els = k.elements().unwrap();
            let (zero, one) = (k.zero(), k.one());
            for a in &els {
                assert_eq!(a + &zero, a.clone());
                assert_eq!(a * &one, a.clone());
                assert!((a + &(-a)).is_zero());
                if !a.is_zero() {
                    assert!((a * &a.try_inv().unwrap()).is_one());
                }
                for b in &els {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    for c in &els {
                        assert_eq!(&(a + b) + c, a + &(b + c));
                        assert_eq!(&(a * b) * c, a * &(b * c));
                        assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                    }
                }
            }
        }
    }

    #[test]
    fn rationals_stay_reduced() {
        let q = Field::Rational;
        let x = q.from_ratio(6, -4).unwrap();
        let r = x.as_rational().unwrap();
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(x.to_string(), "-3/2");
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = Field::Prime(5).one();
        let b = Field::Prime(7).one();
        assert_eq!(
            a.try_add(&b),
            Err(FieldError::MixedFields(Field::Prime(5), Field::Prime(7)))
        );
        assert!(Field::Rational.one().try_mul(&a).is_err());
    }

    #[test]
    #[should_panic(expected = "mixed-field")]
    fn mixed_field_operator_panics() {
        let _ = Field::Prime(5).one() + Field::Rational.one();
    }

    #[test]
    fn prime_descriptor_validation() {
        assert!(Field::prime(4).is_err());
        assert!(Field::prime(1).is_err());
        assert!(Field::prime(MAX_PRIME + 11).is_err());
        assert_eq!(Field::prime(13).unwrap(), Field::Prime(13));
    }

    #[test]
    fn squares() {
        let f7 = Field::Prime(7);
        let squares: Vec<u32> = f7
            .elements()
            .unwrap()
            .iter()
            .filter(|x| x.is_square())
            .map(|x| x.residue().unwrap())
            .collect();
        assert_eq!(squares, vec![0, 1, 2, 4]);
        assert!(Field::Rational.from_ratio(9, 4).unwrap().is_square());
        assert!(!Field::Rational.from_i64(24).is_square());
        assert!(!Field::Rational.from_i64(-1).is_square());
        assert_eq!(
            Field::Rational.from_ratio(9, 4).unwrap().sqrt(),
            Some(Field::Rational.from_ratio(3, 2).unwrap())
        );
    }

    #[test]
    fn parse_elements() {
        assert_eq!(Field::Prime(5).parse("-1").unwrap().residue(), Some(4));
        assert_eq!(
            Field::Rational.parse("3/6").unwrap(),
            Field::Rational.from_ratio(1, 2).unwrap()
        );
        assert!(Field::Rational.parse("x").is_err());
        assert_eq!(Field::Prime(7).parse("1/2").unwrap().residue(), Some(4));
    }
}
