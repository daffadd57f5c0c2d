//! Rational functions in `p`, kept in lowest terms with a monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;
use crate::scalar::{ExactField, Field};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc<T> {
    num: Poly<T>,
    den: Poly<T>,
}

impl<T: ExactField> RatFunc<T> {
    /// Panics if `den` is zero; use [`RatFunc::try_new`] for a checked version.
    pub fn new(num: Poly<T>, den: Poly<T>) -> Self {
        Self::try_new(num, den).expect("zero denominator")
    }

    pub fn try_new(num: Poly<T>, den: Poly<T>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::from_poly(Poly::zero()));
        }
        if den.is_constant() {
            let inv = den.coeff(0).inv();
            return Some(Self::from_poly(num.scale(&inv)));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            let n = num.div_rem(&g).map(|(q, _)| q).unwrap_or(num);
            let d = den.div_rem(&g).map(|(q, _)| q).unwrap_or(den);
            (n, d)
        };
        let lead = den.lead().cloned().unwrap_or_else(T::one);
        if lead.is_one() {
            Some(RatFunc { num, den })
        } else {
            let inv = lead.inv();
            Some(RatFunc { num: num.scale(&inv), den: den.scale(&inv) })
        }
    }

    pub fn from_poly(num: Poly<T>) -> Self {
        RatFunc { num, den: Poly::one() }
    }

    pub fn constant(c: T) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// The indeterminate `p`.
    pub fn p() -> Self {
        Self::from_poly(Poly::x())
    }

    pub fn p_pow(k: usize) -> Self {
        Self::from_poly(Poly::monomial(T::one(), k))
    }

    pub fn numer(&self) -> &Poly<T> {
        &self.num
    }

    pub fn denom(&self) -> &Poly<T> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.num.is_zero() {
            return None;
        }
        if rhs.den.is_one() && rhs.num.is_constant() {
            let inv = rhs.num.coeff(0).inv();
            return Some(RatFunc { num: self.num.scale(&inv), den: self.den.clone() });
        }
        Self::try_new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// Value at `x`, or `None` where the denominator vanishes.
    pub fn eval(&self, x: &T) -> Option<T> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Value in another field after mapping the coefficients.
    pub fn eval_in<U: Field>(&self, x: &U, conv: impl Fn(&T) -> U + Copy) -> Option<U> {
        let d = self.den.eval_in(x, conv);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_in(x, conv) / d)
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        if self.den.is_one() && rhs.den.is_one() {
            return Self::from_poly(&self.num + &rhs.num);
        }
        if self.den == rhs.den {
            return Self::new(&self.num + &rhs.num, self.den.clone());
        }
        let g = self.den.gcd(&rhs.den);
        let a = self.den.div_rem(&g).map(|(q, _)| q).unwrap_or_else(|| self.den.clone());
        let b = rhs.den.div_rem(&g).map(|(q, _)| q).unwrap_or_else(|| rhs.den.clone());
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        Self::new(num, &self.den * &b)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.den.is_one() && rhs.den.is_one() {
            return Self::from_poly(&self.num * &rhs.num);
        }
        if self.num.is_zero() || rhs.num.is_zero() {
            return Self::zero();
        }
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<T: ExactField> Zero for RatFunc<T> {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<T: ExactField> One for RatFunc<T> {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

impl<T: ExactField> Add for RatFunc<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<T: ExactField> Add for &RatFunc<T> {
    type Output = RatFunc<T>;
    fn add(self, rhs: Self) -> RatFunc<T> {
        self.add_ref(rhs)
    }
}

impl<T: ExactField> Sub for RatFunc<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_ref(&-rhs)
    }
}

impl<T: ExactField> Sub for &RatFunc<T> {
    type Output = RatFunc<T>;
    fn sub(self, rhs: Self) -> RatFunc<T> {
        self.add_ref(&-rhs)
    }
}

impl<T: ExactField> Mul for RatFunc<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<T: ExactField> Mul for &RatFunc<T> {
    type Output = RatFunc<T>;
    fn mul(self, rhs: Self) -> RatFunc<T> {
        self.mul_ref(rhs)
    }
}

impl<T: ExactField> Div for RatFunc<T> {
    type Output = Self;
    /// Panics on division by zero.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by zero rational function")
    }
}

impl<T: ExactField> Neg for RatFunc<T> {
    type Output = Self;
    fn neg(self) -> Self {
        RatFunc { num: -self.num, den: self.den }
    }
}

impl<T: ExactField> Neg for &RatFunc<T> {
    type Output = RatFunc<T>;
    fn neg(self) -> RatFunc<T> {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl<T: ExactField> Field for RatFunc<T> {
    fn from_i64(n: i64) -> Self {
        Self::constant(T::from_i64(n))
    }
    fn from_rational(q: &BigRational) -> Self {
        Self::constant(T::from_rational(q))
    }
}

impl<T: ExactField> ExactField for RatFunc<T> {}

/// Primes used by the evaluation fallback of the nonnegativity verdict.
pub const FALLBACK_PRIMES: [i64; 6] = [2, 3, 5, 7, 11, 13];

impl RatFunc<BigRational> {
    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational_value(q: BigRational) -> Self {
        Self::constant(q)
    }

    /// Value at an integer `p`.
    pub fn eval_int(&self, p: i64) -> Option<BigRational> {
        self.eval(&BigRational::from_integer(BigInt::from(p)))
    }

    /// Constant value, if the function does not depend on `p`.
    pub fn as_constant(&self) -> Option<BigRational> {
        (self.den.is_one() && self.num.is_constant()).then(|| self.num.coeff(0))
    }

    /// Certificate that the value is `>= 0` for every real `p >= 2`: after substituting
    /// `p = q + 2`, numerator and denominator have coefficients of one common sign.
    pub fn nonneg_certificate(&self) -> bool {
        if self.num.is_zero() {
            return true;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let n = self.num.taylor_shift(&two);
        let d = self.den.taylor_shift(&two);
        (n.all_coeffs_nonneg() && d.all_coeffs_nonneg()) || (n.all_coeffs_nonpos() && d.all_coeffs_nonpos())
    }

    /// Nonnegativity for `p >= 2`: the certificate, or else evaluation at a fixed prime list.
    pub fn is_nonnegative(&self) -> bool {
        self.nonneg_certificate()
            || FALLBACK_PRIMES
                .iter()
                .all(|&p| self.eval_int(p).is_some_and(|v| !v.is_negative()))
    }

    /// Certificate that the value is `> 0` for every real `p >= 2`: the shifted numerator and
    /// denominator have one common sign and nonzero constant terms.
    pub fn positive_certificate(&self) -> bool {
        if self.num.is_zero() {
            return false;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let n = self.num.taylor_shift(&two);
        let d = self.den.taylor_shift(&two);
        let strict = !n.coeff(0).is_zero() && !d.coeff(0).is_zero();
        strict && ((n.all_coeffs_nonneg() && d.all_coeffs_nonneg()) || (n.all_coeffs_nonpos() && d.all_coeffs_nonpos()))
    }

    /// Strict positivity for `p >= 2`: the certificate, or else evaluation at a fixed prime list.
    pub fn is_positive(&self) -> bool {
        self.positive_certificate()
            || FALLBACK_PRIMES
                .iter()
                .all(|&p| self.eval_int(p).is_some_and(|v| v.is_positive()))
    }

    /// `Some((c, e))` when the value is `c·p^e / den`.
    pub fn monomial_numerator(&self) -> Option<(usize, BigRational)> {
        self.num.as_monomial().map(|(e, c)| (e, c.clone()))
    }

    pub fn parse(s: &str) -> Result<Self, crate::Error> {
        crate::expr::parse_scalar(s)
    }

    /// Numerator in expanded notation, for JSON output.
    pub fn num_string(&self) -> String {
        self.num.to_string()
    }

    pub fn den_string(&self) -> String {
        self.den.to_string()
    }
}

fn needs_parens(p: &Poly<BigRational>) -> bool {
    p.term_count() > 1 || p.coeffs().iter().any(|c| !c.is_integer())
}

impl fmt::Display for RatFunc<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if needs_parens(&self.num) {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if needs_parens(&self.den) {
            write!(f, "/({})", self.den)
        } else {
            write!(f, "/{}", self.den)
        }
    }
}
