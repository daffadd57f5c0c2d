//! Dense univariate polynomials in the indeterminate `p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{ExactField, Field};

/// Coefficients are stored lowest degree first, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The indeterminate `p`.
    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    pub fn monomial(c: T, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Remainder modulo `p^k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(k).cloned().collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Evaluate in another field after mapping the coefficients.
    pub fn eval_in<U: Field>(&self, x: &U, conv: impl Fn(&T) -> U) -> U {
        let mut acc = U::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + conv(c);
        }
        acc
    }

    /// `f(p + c)`.
    pub fn taylor_shift(&self, c: &T) -> Self {
        let mut out = Self::zero();
        let lin = Self::from_coeffs(vec![c.clone(), T::one()]);
        for a in self.coeffs.iter().rev() {
            out = &(&out * &lin) + &Self::constant(a.clone());
        }
        out
    }

    pub fn make_monic(&self) -> Self {
        match self.lead() {
            None => Self::zero(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv()),
        }
    }

    /// Euclidean division; `None` if the divisor is zero.
    pub fn div_rem(&self, rhs: &Self) -> Option<(Self, Self)> {
        let dr = rhs.degree()?;
        let lead_inv = rhs.lead()?.inv();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dr {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![T::zero(); rem.len() - dr];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dr].clone() * lead_inv.clone();
            if c.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - c.clone() * b.clone();
            }
            quot[k] = c;
        }
        rem.truncate(dr);
        Some((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    pub fn divides(&self, other: &Self) -> bool {
        match other.div_rem(self) {
            Some((_, r)) => r.is_zero(),
            None => other.is_zero(),
        }
    }
}

impl<T: ExactField> Poly<T> {
    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = match a.div_rem(&b) {
                Some((_, r)) => r,
                None => unreachable!("b is nonzero"),
            };
            a = b;
            b = r.make_monic();
        }
        a.make_monic()
    }

    /// Find `n/d` with `d(0) = 1`, `deg n < num_bound`, `deg d <= k - num_bound` and
    /// `n ≡ self·d mod p^k`, by the extended Euclidean algorithm on `(p^k, self)`.
    pub fn rational_reconstruction(&self, k: usize, num_bound: usize) -> Option<(Self, Self)> {
        let modulus = Self::monomial(T::one(), k);
        let (mut r0, mut r1) = (modulus, self.truncate(k));
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        while r1.degree().map_or(0, |d| d + 1) > num_bound {
            let (q, r) = r0.div_rem(&r1)?;
            let t = &t0 - &(&q * &t1);
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
            if r1.is_zero() {
                break;
            }
        }
        if t1.degree()? > k.saturating_sub(num_bound) {
            return None;
        }
        let c0 = t1.coeff(0);
        if c0.is_zero() {
            return None;
        }
        let inv = c0.inv();
        Some((r1.scale(&inv), t1.scale(&inv)))
    }
}

impl<T: Field> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Poly::from_coeffs(coeffs)
    }
}

impl<T: Field> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Poly::from_coeffs(coeffs)
    }
}

impl<T: Field> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

impl<T: Field> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl<T: Field> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $f(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<T: Field> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        -&self
    }
}

impl Poly<BigRational> {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
    }

    /// `true` if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn all_coeffs_nonneg(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn all_coeffs_nonpos(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_positive())
    }

    /// `Some(e)` when the polynomial is `c·p^e` for a single nonzero `c`.
    pub fn as_monomial(&self) -> Option<(usize, &BigRational)> {
        let e = self.valuation()?;
        (e + 1 == self.coeffs.len()).then(|| (e, &self.coeffs[e]))
    }

    /// Writes the polynomial in descending powers of `var`.
    pub fn fmt_var(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = mag.is_one();
            if k == 0 {
                write!(f, "{mag}")?;
                continue;
            }
            if !unit {
                write!(f, "{mag}*")?;
            }
            if k == 1 {
                f.write_str(var)?;
            } else {
                write!(f, "{var}^{k}")?;
            }
        }
        Ok(())
    }

    /// Number of printed terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

impl fmt::Display for Poly<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_var(f, "p")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    type P = Poly<BigRational>;

    #[test]
    fn display_descending() {
        assert_eq!(P::from_ints(&[1, 0, 0, 0, 0, 1]).to_string(), "p^5+1");
        assert_eq!(P::from_ints(&[-1, 2, -1]).to_string(), "-p^2+2*p-1");
        assert_eq!(P::zero().to_string(), "0");
        assert_eq!(P::x().to_string(), "p");
    }

    #[test]
    fn division_round_trip() {
        let a = P::from_ints(&[1, 0, 0, 1]);
        let b = P::from_ints(&[1, 1]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, P::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn gcd_is_monic() {
        let a = P::from_ints(&[-2, 0, 2]);
        let b = P::from_ints(&[3, 3]);
        assert_eq!(a.gcd(&b), P::from_ints(&[1, 1]));
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let a = P::from_ints(&[3, -1, 4, 1]);
        let s = a.taylor_shift(&int(2));
        for x in -3..4 {
            assert_eq!(s.eval(&int(x)), a.eval(&int(x + 2)));
        }
    }

    #[test]
    fn reconstruction_recovers_fraction() {
        // 1/(1+p^3) as a power series, then reconstruct
        let den = P::from_ints(&[1, 0, 0, 1]);
        let k = 12;
        let mut series = vec![int(0); k];
        for j in 0..k {
            if j % 3 == 0 {
                series[j] = int(if (j / 3) % 2 == 0 { 1 } else { -1 });
            }
        }
        let s = P::from_coeffs(series);
        let (n, d) = s.rational_reconstruction(k, k / 2).unwrap();
        assert_eq!(n, P::one());
        assert_eq!(d, den);
    }
}
