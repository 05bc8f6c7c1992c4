//! Sparse Laurent polynomials `Σ c_e z^e` over a [`Scalar`] field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{BigComplex, ExactComplex, Scalar};

/// Laurent polynomial. Zero coefficients are never stored, so the zero
/// polynomial has an empty map.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<T: Scalar = ExactComplex> {
    coeffs: BTreeMap<i32, T>,
}

fn add_exp(a: i32, b: i32) -> i32 {
    a.checked_add(b).expect("Laurent exponent overflow")
}

impl<T: Scalar> Default for LaurentPoly<T> {
    fn default() -> Self {
        LaurentPoly::zero()
    }
}

impl<T: Scalar> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(c: T, e: i32) -> Self {
        let mut p = LaurentPoly::zero();
        p.set(e, c);
        p
    }

    pub fn constant(c: T) -> Self {
        LaurentPoly::monomial(c, 0)
    }

    /// Builds `Σ_j coeffs[j] z^{low + j}`.
    pub fn from_coeffs(low: i32, coeffs: impl IntoIterator<Item = T>) -> Self {
        let mut p = LaurentPoly::zero();
        for (j, c) in coeffs.into_iter().enumerate() {
            p.set(add_exp(low, j as i32), c);
        }
        p
    }

    pub fn from_map(map: impl IntoIterator<Item = (i32, T)>) -> Self {
        let mut p = LaurentPoly::zero();
        for (e, c) in map {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn low(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn high(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, e: i32) -> Option<&T> {
        self.coeffs.get(&e)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.values().next_back()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &T)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Overwrites the coefficient of `z^e`.
    pub fn set(&mut self, e: i32, c: T) {
        if c.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    pub fn add_term(&mut self, e: i32, c: T) {
        if c.is_zero() {
            return;
        }
        let next = match self.coeffs.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        self.set(e, next);
    }

    /// True when all exponents are nonnegative.
    pub fn is_polynomial(&self) -> bool {
        self.low().map_or(true, |l| l >= 0)
    }

    /// A nonzero constant (exponent set `{0}`).
    pub fn is_nonzero_constant(&self) -> bool {
        self.coeffs.len() == 1 && self.low() == Some(0)
    }

    /// A single nonzero term `c z^e`.
    pub fn as_monomial(&self) -> Option<(i32, &T)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        LaurentPoly::from_map(self.terms().map(|(e, v)| (e, v.clone() * c.clone())))
    }

    /// Multiplies by `z^k`.
    pub fn shift_exponents(&self, k: i32) -> Self {
        LaurentPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (add_exp(*e, k), c.clone()))
                .collect(),
        }
    }

    /// `p(c·z)`: coefficient of `z^e` is multiplied by `c^e`.
    pub fn dilate(&self, c: &T) -> Self {
        let inv = c.one_like() / c.clone();
        LaurentPoly::from_map(self.terms().map(|(e, v)| {
            let base = if e >= 0 { c.clone() } else { inv.clone() };
            let mut f = v.clone();
            for _ in 0..e.unsigned_abs() {
                f = f * base.clone();
            }
            (e, f)
        }))
    }

    /// Evaluates at a nonzero point (the point must be nonzero when negative
    /// exponents are present).
    pub fn eval(&self, x: &T) -> T {
        let mut acc = x.zero_like();
        if self.is_zero() {
            return acc;
        }
        let high = self.high().unwrap();
        let low = self.low().unwrap();
        if high >= 0 {
            // Horner on the nonnegative part.
            let start = low.max(0);
            for e in (start..=high).rev() {
                acc = acc * x.clone();
                if let Some(c) = self.coeffs.get(&e) {
                    acc = acc + c.clone();
                }
            }
            for _ in 0..start {
                acc = acc * x.clone();
            }
        }
        if low < 0 {
            let inv = x.one_like() / x.clone();
            acc = acc + self.eval_negative_part(&inv);
        }
        acc
    }

    fn eval_negative_part(&self, inv: &T) -> T {
        // Σ_{e<0} c_e inv^{-e}, Horner from the most negative exponent.
        let low = self.low().unwrap();
        let mut acc = inv.zero_like();
        for e in low..0 {
            acc = acc * inv.clone();
            if let Some(c) = self.coeffs.get(&e) {
                acc = acc + c.clone();
            }
        }
        acc * inv.clone()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LaurentPoly<U> {
        LaurentPoly::from_map(self.terms().map(|(e, c)| (e, f(c))))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        LaurentPoly::from_map(
            self.terms()
                .filter(|(e, _)| *e != 0)
                .map(|(e, c)| (e - 1, c.clone() * c.from_i64_like(e as i64))),
        )
    }
}

impl LaurentPoly<ExactComplex> {
    pub fn z() -> Self {
        LaurentPoly::monomial(ExactComplex::one(), 1)
    }

    pub fn one() -> Self {
        LaurentPoly::constant(ExactComplex::one())
    }

    /// `z - a`.
    pub fn linear(a: &ExactComplex) -> Self {
        LaurentPoly::from_coeffs(0, [-a.clone(), ExactComplex::one()])
    }

    /// Evaluates an exact polynomial at a numeric point.
    pub fn eval_big(&self, x: &BigComplex) -> BigComplex {
        let prec = x.prec();
        self.map(|c| c.to_big(prec)).eval(x)
    }

    pub fn to_big(&self, prec: u32) -> LaurentPoly<BigComplex> {
        self.map(|c| c.to_big(prec))
    }

    /// `p(z + c)`; only defined for polynomials.
    pub fn translate(&self, c: &ExactComplex) -> Self {
        assert!(self.is_polynomial(), "translate needs a polynomial");
        let mut out = LaurentPoly::zero();
        // Horner: p(z+c) = (...(a_n (z+c) + a_{n-1})(z+c) + ...)
        let zc = LaurentPoly::from_coeffs(0, [c.clone(), ExactComplex::one()]);
        if let Some(high) = self.high() {
            for e in (0..=high).rev() {
                out = &out * &zc;
                if let Some(a) = self.coeff(e) {
                    out.add_term(0, a.clone());
                }
            }
        }
        out
    }

    /// Euclidean division of polynomials: `self = q·d + r`, `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(self.is_polynomial() && d.is_polynomial(), "div_rem needs polynomials");
        assert!(!d.is_zero(), "division by zero polynomial");
        let dh = d.high().unwrap();
        let lead_inv = d.leading().unwrap().inv();
        let mut r = self.clone();
        let mut q = LaurentPoly::zero();
        while let Some(rh) = r.high() {
            if rh < dh {
                break;
            }
            let c = r.leading().unwrap() * &lead_inv;
            let t = LaurentPoly::monomial(c, rh - dh);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        (q, r)
    }

    /// Exact quotient of Laurent polynomials, `None` when `d ∤ self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        let (sl, dl) = (self.low().unwrap(), d.low().unwrap());
        let a = self.shift_exponents(-sl);
        let b = d.shift_exponents(-dl);
        let (q, r) = a.div_rem(&b);
        if r.is_zero() {
            Some(q.shift_exponents(sl - dl))
        } else {
            None
        }
    }

    /// Monic gcd of two polynomials (zero when both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.inv()),
            None => self.clone(),
        }
    }

    /// Largest total coefficient size in bits.
    pub fn bit_size(&self) -> u64 {
        self.terms().map(|(_, c)| c.bit_size()).max().unwrap_or(0)
    }
}

impl<T: Scalar> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "({c:?})")?,
                1 => write!(f, "({c:?})z")?,
                _ => write!(f, "({c:?})z^{e}")?,
            }
        }
        Ok(())
    }
}

impl<'a, T: Scalar> Add<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: &'a LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Sub<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: &'a LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Mul<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: &'a LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                out.add_term(add_exp(ea, eb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Neg for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn neg(self) -> LaurentPoly<T> {
        LaurentPoly {
            coeffs: self.coeffs.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl<T: Scalar> Add for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Scalar> Sub for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Scalar> Mul for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

/// Serialized as `{"exponent": coefficient}`.
impl Serialize for LaurentPoly<ExactComplex> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.num_terms()))?;
        for (e, c) in self.terms() {
            m.serialize_entry(&e.to_string(), c)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly<ExactComplex> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, ExactComplex> = BTreeMap::deserialize(d)?;
        let mut p = LaurentPoly::zero();
        for (k, v) in raw {
            let e: i32 = k
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad exponent '{k}'")))?;
            p.add_term(e, v);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    #[test]
    fn zero_has_no_terms() {
        let p = LaurentPoly::from_coeffs(-1, [c(1), c(0), c(-1)]);
        let q = &p - &p;
        assert!(q.is_zero());
        assert_eq!(q.low(), None);
        assert_eq!(p.num_terms(), 2);
    }

    #[test]
    fn eval_laurent() {
        // 2z^-2 + 3 + z^2 at z = 2 -> 1/2 + 3 + 4
        let p = LaurentPoly::from_map([(-2, c(2)), (0, c(3)), (2, c(1))]);
        assert_eq!(p.eval(&c(2)), ExactComplex::ratio(15, 2));
        let only_neg = LaurentPoly::from_map([(-3, c(8)), (-1, c(1))]);
        assert_eq!(only_neg.eval(&c(2)), ExactComplex::ratio(3, 2));
    }

    #[test]
    fn translate_and_divide() {
        // (z-1)(z-2) = z^2 - 3z + 2, translated by 1 -> z(z-1)
        let p = &LaurentPoly::linear(&c(1)) * &LaurentPoly::linear(&c(2));
        let t = p.translate(&c(1));
        assert_eq!(t, &LaurentPoly::z() * &LaurentPoly::linear(&c(1)));
        assert_eq!(p.div_exact(&LaurentPoly::linear(&c(2))).unwrap(), LaurentPoly::linear(&c(1)));
        assert!(p.div_exact(&LaurentPoly::linear(&c(3))).is_none());
    }

    #[test]
    fn gcd_monic() {
        let a = &LaurentPoly::linear(&c(1)) * &LaurentPoly::linear(&c(2));
        let b = (&LaurentPoly::linear(&c(2)) * &LaurentPoly::linear(&c(5))).scale(&c(7));
        assert_eq!(a.gcd(&b), LaurentPoly::linear(&c(2)));
    }

    #[test]
    fn dilate_scales_by_powers() {
        let p = LaurentPoly::from_map([(-1, c(1)), (2, c(1))]);
        let d = p.dilate(&c(2));
        assert_eq!(d.coeff(-1), Some(&ExactComplex::ratio(1, 2)));
        assert_eq!(d.coeff(2), Some(&c(4)));
    }

    #[test]
    fn json_shape() {
        let p = LaurentPoly::from_map([(-1, c(2)), (3, ExactComplex::i())]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"-1":{"re":"2","im":"0"},"3":{"re":"0","im":"1"}}"#);
        let back: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn exponent_overflow_is_fatal() {
        let p = LaurentPoly::monomial(c(1), i32::MAX);
        let _ = &p * &LaurentPoly::z();
    }
}
