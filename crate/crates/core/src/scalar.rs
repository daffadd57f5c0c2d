//! Scalar traits shared by the polynomial, linear-algebra and ring layers.

use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A commutative field with enough conversions to be driven by integer data.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }

    fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// Fields whose equality is exact, so normal forms and gcds are meaningful.
pub trait ExactField: Field + Eq + Hash {}

/// Fields with a total order compatible with the arithmetic.
pub trait OrderedField: Field + PartialOrd {
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Field for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl ExactField for BigRational {}
impl OrderedField for BigRational {
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

impl Field for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl OrderedField for f64 {}

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_by_squaring() {
        assert_eq!(Field::pow(&int(3), 5), int(243));
        assert_eq!(Field::pow(&rat(1, 2), 0), int(1));
        assert_eq!(Field::pow(&2.0f64, 10), 1024.0);
    }

    #[test]
    fn rational_sign_helpers() {
        assert!(OrderedField::is_negative(&rat(-1, 3)));
        assert!(OrderedField::is_positive(&rat(1, 3)));
        assert!(!OrderedField::is_positive(&int(0)));
    }
}
