//! Scalar tower: exact Gaussian rationals and arbitrary-precision complex floats.
//!
//! Exact values promote to [`BigComplex`] through [`ExactComplex::to_big`]; there
//! is no conversion in the other direction except the explicit rational
//! recognition in [`crate::roots`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Smallest precision (in bits) accepted by the numeric layer.
pub const MIN_PRECISION: u32 = 64;

/// Field operations shared by the exact and the numeric scalar types.
///
/// Constructors take `&self` so that numeric scalars can carry their
/// precision into freshly created values.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, v: i64) -> Self;
    fn from_exact_like(&self, v: &ExactComplex) -> Self;
    fn is_zero(&self) -> bool;
    /// Ranking used for pivot selection; larger is better. Exact scalars
    /// return the same key for every nonzero value so the first nonzero wins.
    fn pivot_key(&self) -> f64;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
}

/// Exact complex rational `re + i·im`. Components are kept in lowest terms
/// with positive denominators by the underlying GMP rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactComplex {
    pub re: Rational,
    pub im: Rational,
}

impl ExactComplex {
    pub fn new(re: impl Into<Rational>, im: impl Into<Rational>) -> Self {
        ExactComplex {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn real(re: impl Into<Rational>) -> Self {
        ExactComplex::new(re, 0)
    }

    pub fn zero() -> Self {
        ExactComplex::new(0, 0)
    }

    pub fn one() -> Self {
        ExactComplex::new(1, 0)
    }

    pub fn i() -> Self {
        ExactComplex::new(0, 1)
    }

    /// `num/den + i·0`; panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactComplex::real(Rational::from((num, den)))
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == Ordering::Equal && self.im.cmp0() == Ordering::Equal
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == Ordering::Equal
    }

    pub fn conj(&self) -> Self {
        ExactComplex {
            re: self.re.clone(),
            im: Rational::from(-&self.im),
        }
    }

    /// `|z|²`, exact.
    pub fn norm_sqr(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(ExactComplex {
            re: Rational::from(&self.re / &n),
            im: Rational::from(-&self.im) / n,
        })
    }

    pub fn inv(&self) -> Self {
        self.checked_inv().expect("inverse of zero")
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, e: i64) -> Self {
        if e < 0 {
            return self.inv().powi(-e);
        }
        let mut base = self.clone();
        let mut acc = ExactComplex::one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn is_integer(&self) -> bool {
        self.is_real() && *self.re.denom() == 1
    }

    /// Generalized binomial coefficient `binom(self, k)`.
    pub fn binomial(&self, k: u32) -> Self {
        let mut acc = ExactComplex::one();
        for j in 0..k {
            let num = self - &ExactComplex::real(j);
            acc = &(&acc * &num) / &ExactComplex::real(j + 1);
        }
        acc
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        BigComplex(Complex::with_val(prec, (&self.re, &self.im)))
    }

    /// Sum of the bit lengths of numerators and denominators; a rough size
    /// measure used to detect coefficient explosion.
    pub fn bit_size(&self) -> u64 {
        let b = |r: &Rational| (r.numer().significant_bits() + r.denom().significant_bits()) as u64;
        b(&self.re) + b(&self.im)
    }

    /// Deterministic total order: by real part, then imaginary part.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse(format!("empty rational '{s}'")));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Decimal notation is exact: 1.25 -> 5/4.
        let (neg, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let digits = format!("{int_digits}{frac_part}");
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("malformed decimal '{s}'")));
        }
        let num = Integer::from_str(&digits).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        let den = Integer::from(10).pow(frac_part.len() as u32);
        let r = Rational::from((num, den));
        return Ok(if neg { -r } else { r });
    }
    Rational::from_str(s).map_err(|e| Error::Parse(format!("'{s}': {e}")))
}

impl FromStr for ExactComplex {
    type Err = Error;

    /// Accepts a bare rational (`"3/4"`, `"-2"`, `"0.5"`) for real values.
    fn from_str(s: &str) -> Result<Self> {
        Ok(ExactComplex::real(parse_rational(s)?))
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.cmp0(), self.im.cmp0()) {
            (_, Ordering::Equal) => write!(f, "{}", self.re),
            (Ordering::Equal, _) => write!(f, "{}i", self.im),
            (_, Ordering::Less) => write!(f, "{}-{}i", self.re, Rational::from(-&self.im)),
            _ => write!(f, "{}+{}i", self.re, self.im),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ExactComplexRepr {
    re: String,
    im: String,
}

impl Serialize for ExactComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExactComplexRepr {
            re: self.re.to_string(),
            im: self.im.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ExactComplexRepr::deserialize(d)?;
        let re = parse_rational(&repr.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&repr.im).map_err(serde::de::Error::custom)?;
        Ok(ExactComplex { re, im })
    }
}

macro_rules! exact_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a ExactComplex> for &'a ExactComplex {
            type Output = ExactComplex;
            fn $method(self, rhs: &'a ExactComplex) -> ExactComplex {
                let f: fn(&ExactComplex, &ExactComplex) -> ExactComplex = $body;
                f(self, rhs)
            }
        }
        impl $tr for ExactComplex {
            type Output = ExactComplex;
            fn $method(self, rhs: ExactComplex) -> ExactComplex {
                (&self).$method(&rhs)
            }
        }
    };
}

exact_binop!(Add, add, |a, b| ExactComplex {
    re: Rational::from(&a.re + &b.re),
    im: Rational::from(&a.im + &b.im),
});
exact_binop!(Sub, sub, |a, b| ExactComplex {
    re: Rational::from(&a.re - &b.re),
    im: Rational::from(&a.im - &b.im),
});
exact_binop!(Mul, mul, |a, b| ExactComplex {
    re: Rational::from(&a.re * &b.re) - Rational::from(&a.im * &b.im),
    im: Rational::from(&a.re * &b.im) + Rational::from(&a.im * &b.re),
});
exact_binop!(Div, div, |a, b| a * &b.inv());

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<'a> Neg for &'a ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        -self.clone()
    }
}

impl From<i64> for ExactComplex {
    fn from(v: i64) -> Self {
        ExactComplex::real(v)
    }
}

impl Scalar for ExactComplex {
    fn zero_like(&self) -> Self {
        ExactComplex::zero()
    }
    fn one_like(&self) -> Self {
        ExactComplex::one()
    }
    fn from_i64_like(&self, v: i64) -> Self {
        ExactComplex::real(v)
    }
    fn from_exact_like(&self, v: &ExactComplex) -> Self {
        v.clone()
    }
    fn is_zero(&self) -> bool {
        ExactComplex::is_zero(self)
    }
    fn pivot_key(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }
}

/// Complex number with an explicit binary precision. Binary operations run
/// at the larger of the two operand precisions.
#[derive(Clone, PartialEq)]
pub struct BigComplex(pub Complex);

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex(Complex::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex(Complex::with_val(prec, (re, im)))
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        BigComplex(Complex::with_val(re.prec().max(im.prec()), (re, im)))
    }

    pub fn i(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, (0, 1)))
    }

    pub fn pi(prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, Constant::Pi))
    }

    /// `2πi` at the given precision.
    pub fn two_pi_i(prec: u32) -> Self {
        let pi = Float::with_val(prec, Constant::Pi);
        BigComplex(Complex::with_val(prec, (0, pi * 2u32)))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec().0.max(self.0.prec().1)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex(Complex::with_val(prec, &self.0))
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    /// `|z|` as a `Float`.
    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.0.abs_ref())
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// `log2 |z|`; `-inf` for zero. Safe for magnitudes outside the `f64` range.
    pub fn log2_abs(&self) -> f64 {
        let a = self.abs();
        if a.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mant, exp) = a.to_f64_exp();
        mant.abs().log2() + exp as f64
    }

    pub fn exp(&self) -> Self {
        BigComplex(self.0.clone().exp())
    }

    /// Principal logarithm (`arg ∈ (-π, π]`).
    pub fn ln(&self) -> Self {
        BigComplex(self.0.clone().ln())
    }

    pub fn sin(&self) -> Self {
        BigComplex(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        BigComplex(self.0.clone().cos())
    }

    pub fn sqrt(&self) -> Self {
        BigComplex(self.0.clone().sqrt())
    }

    pub fn conj(&self) -> Self {
        BigComplex(self.0.clone().conj())
    }

    pub fn powi(&self, e: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), (&self.0).pow(e as i32)))
    }

    /// `self^w = exp(w·ln self)` on the principal branch.
    pub fn powc(&self, w: &BigComplex) -> Self {
        (w.clone() * self.ln()).exp()
    }

    pub fn mul_f64(&self, v: f64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 * v))
    }

    pub fn mul_i64(&self, v: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 * v))
    }

    pub fn div_i64(&self, v: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), &self.0 / v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }

    /// Decimal rendering with `digits` significant digits per component.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (
            self.0.real().to_string_radix(10, Some(digits)),
            self.0.imag().to_string_radix(10, Some(digits)),
        )
    }

    /// Parse decimal strings at the given precision.
    pub fn parse(re: &str, im: &str, prec: u32) -> Result<Self> {
        let r = Float::parse(re).map_err(|e| Error::Parse(format!("'{re}': {e}")))?;
        let i = Float::parse(im).map_err(|e| Error::Parse(format!("'{im}': {e}")))?;
        Ok(BigComplex(Complex::with_val(prec, (r, i))))
    }

    /// Round to the nearest integer in each component (ties away from zero).
    pub fn round_components(&self) -> (Integer, Integer) {
        let r = self.0.real().clone().round();
        let i = self.0.imag().clone().round();
        (
            r.to_integer().unwrap_or_default(),
            i.to_integer().unwrap_or_default(),
        )
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_decimal(20);
        write!(f, "({re} + {im}i)")
    }
}

macro_rules! big_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'a BigComplex) -> BigComplex {
                let p = self.prec().max(rhs.prec());
                BigComplex(Complex::with_val_round(p, &self.0 $op &rhs.0, (Round::Nearest, Round::Nearest)).0)
            }
        }
        impl $tr for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
    };
}

big_binop!(Add, add, +);
big_binop!(Sub, sub, -);
big_binop!(Mul, mul, *);
big_binop!(Div, div, /);

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(-self.0)
    }
}

impl<'a> Neg for &'a BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(Complex::with_val(self.prec(), -&self.0))
    }
}

impl Scalar for BigComplex {
    fn zero_like(&self) -> Self {
        BigComplex::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        BigComplex::one(self.prec())
    }
    fn from_i64_like(&self, v: i64) -> Self {
        BigComplex(Complex::with_val(self.prec(), v))
    }
    fn from_exact_like(&self, v: &ExactComplex) -> Self {
        v.to_big(self.prec())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn pivot_key(&self) -> f64 {
        self.log2_abs()
    }
}

/// Serialized form of a numeric value: decimal strings plus the precision
/// they were produced at.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecimalComplex {
    pub re: String,
    pub im: String,
    pub precision: u32,
}

impl From<&BigComplex> for DecimalComplex {
    fn from(z: &BigComplex) -> Self {
        let digits = ((z.prec() as f64) * std::f64::consts::LOG10_2).floor() as usize;
        let (re, im) = z.to_decimal(digits.max(1));
        DecimalComplex {
            re,
            im,
            precision: z.prec(),
        }
    }
}

/// Numeric values serialize in their decimal form.
impl Serialize for BigComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecimalComplex::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BigComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dc = DecimalComplex::deserialize(d)?;
        dc.to_big().map_err(serde::de::Error::custom)
    }
}

impl DecimalComplex {
    pub fn to_big(&self) -> Result<BigComplex> {
        BigComplex::parse(&self.re, &self.im, self.precision.max(MIN_PRECISION))
    }
}

/// Validates a requested working precision.
pub fn check_precision(prec: u32) -> Result<u32> {
    if prec < MIN_PRECISION {
        return Err(Error::InvalidInput(format!(
            "precision {prec} below minimum {MIN_PRECISION} bits"
        )));
    }
    Ok(prec)
}

/// `π` as a `Float`.
pub fn pi_float(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = ExactComplex::new(Rational::from((1, 2)), 3);
        let b = ExactComplex::new(-2, Rational::from((1, 3)));
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(ExactComplex::i().powi(2), ExactComplex::real(-1));
        assert_eq!(ExactComplex::real(2).powi(-3), ExactComplex::ratio(1, 8));
    }

    #[test]
    fn canonical_form() {
        let a = ExactComplex::new(Rational::from((4, -6)), Rational::from((10, 5)));
        assert_eq!(a.re.numer().to_string(), "-2");
        assert_eq!(a.re.denom().to_string(), "3");
        assert_eq!(a.im, Rational::from(2));
    }

    #[test]
    fn serde_roundtrip() {
        let a = ExactComplex::new(Rational::from((-7, 3)), Rational::from((1, 2)));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"re":"-7/3","im":"1/2"}"#);
        let b: ExactComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let c: ExactComplex = serde_json::from_str(r#"{"re":"1.25","im":"-0.5"}"#).unwrap();
        assert_eq!(c, ExactComplex::new(Rational::from((5, 4)), Rational::from((-1, 2))));
    }

    #[test]
    fn binomial_general() {
        // binom(1/2, 2) = (1/2)(-1/2)/2 = -1/8
        assert_eq!(ExactComplex::ratio(1, 2).binomial(2), ExactComplex::ratio(-1, 8));
        assert_eq!(ExactComplex::real(-3).binomial(2), ExactComplex::real(6));
    }

    #[test]
    fn big_precision_never_drops() {
        let a = BigComplex::from_f64(64, 1.0, 0.0);
        let b = BigComplex::from_f64(256, 3.0, 0.0);
        assert_eq!((a.clone() / b.clone()).prec(), 256);
        assert_eq!((b / a).prec(), 256);
    }

    #[test]
    fn promotion_agrees() {
        let a = ExactComplex::new(Rational::from((1, 3)), Rational::from((-2, 7)));
        let big = a.to_big(200);
        let back = &(&big * &ExactComplex::real(21).to_big(200)) - &ExactComplex::new(7, -6).to_big(200);
        assert!(back.log2_abs() < -190.0);
    }
}
