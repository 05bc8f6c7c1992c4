//! Clearing denominators of a rational coefficient matrix.
//!
//! For `Y(z+1) = A(z)Y(z)` the scalar gauge `Γ(z-x_1)⋯Γ(z-x_s)` multiplies
//! `A` by `(z-x_1)⋯(z-x_s)`; for `Y(qz) = Q(z)Y(z)` the product of the
//! solutions of `g(qz) = (z-a)g(z)` does the same. Denominators are given as
//! multisets of exact roots so the least common denominator is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::PolyMat;
use crate::poly::LaurentPoly;
use crate::scalar::ExactComplex;

/// `num(z) / Π (z - den_roots[i])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalEntry {
    pub num: LaurentPoly,
    #[serde(default)]
    pub den_roots: Vec<ExactComplex>,
}

impl RationalEntry {
    pub fn polynomial(num: LaurentPoly) -> Self {
        RationalEntry {
            num,
            den_roots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rationalized {
    /// `Π (z - x_i) · A_raw(z)`.
    pub matrix: PolyMat,
    /// Roots `x_i` of the common denominator, with repetition, in a fixed
    /// order. The gauge is `Π Γ(z - x_i)` (difference) or the matching
    /// product of scalar q-solutions.
    pub denominator: Vec<ExactComplex>,
}

fn multiset_count(v: &[ExactComplex], x: &ExactComplex) -> usize {
    v.iter().filter(|y| *y == x).count()
}

fn product_of_linears(roots: &[ExactComplex]) -> LaurentPoly {
    roots
        .iter()
        .fold(LaurentPoly::one(), |acc, x| &acc * &LaurentPoly::linear(x))
}

/// Multiplies the raw rational matrix by the least common denominator of its
/// entries. Numerators must be polynomials.
pub fn rationalize_difference(raw: &[Vec<RationalEntry>]) -> Result<Rationalized> {
    let n = raw.len();
    if n == 0 || raw.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("rational matrix must be square and nonempty".into()));
    }
    let mut lcd: Vec<ExactComplex> = Vec::new();
    for entry in raw.iter().flatten() {
        if !entry.num.is_polynomial() {
            return Err(Error::InvalidInput("numerators must be polynomials".into()));
        }
        for x in &entry.den_roots {
            let need = multiset_count(&entry.den_roots, x);
            while multiset_count(&lcd, x) < need {
                lcd.push(x.clone());
            }
        }
    }
    lcd.sort_by(|a, b| a.lex_cmp(b));
    let matrix = PolyMat::from_fn(n, n, |i, j| {
        let e = &raw[i][j];
        let mut rest = lcd.clone();
        for x in &e.den_roots {
            let pos = rest.iter().position(|y| y == x).expect("lcd contains every factor");
            rest.remove(pos);
        }
        &e.num * &product_of_linears(&rest)
    });
    // Entries given in unreduced form may share factors with the
    // denominator; drop every factor that divides the whole matrix.
    let mut matrix = matrix;
    let mut denominator = Vec::new();
    for x in lcd {
        let lin = LaurentPoly::linear(&x);
        let divided: Option<Vec<LaurentPoly>> = matrix.entries().map(|p| p.div_exact(&lin)).collect();
        match divided {
            Some(d) => {
                let mut it = d.into_iter();
                matrix = PolyMat::from_fn(n, n, |_, _| it.next().unwrap());
            }
            None => denominator.push(x),
        }
    }
    if matrix.det().is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    Ok(Rationalized { matrix, denominator })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    fn poly(coeffs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(0, coeffs.iter().map(|&v| c(v)))
    }

    #[test]
    fn polynomial_passthrough() {
        let raw = vec![
            vec![RationalEntry::polynomial(poly(&[1, 1])), RationalEntry::polynomial(poly(&[2]))],
            vec![RationalEntry::polynomial(poly(&[0])), RationalEntry::polynomial(poly(&[3, 0, 1]))],
        ];
        let out = rationalize_difference(&raw).unwrap();
        assert!(out.denominator.is_empty());
        assert_eq!(out.matrix[(1, 1)], poly(&[3, 0, 1]));
    }

    #[test]
    fn single_pole() {
        let raw = vec![vec![RationalEntry {
            num: poly(&[1]),
            den_roots: vec![c(1)],
        }]];
        let out = rationalize_difference(&raw).unwrap();
        assert_eq!(out.matrix[(0, 0)], poly(&[1]));
        assert_eq!(out.denominator, vec![c(1)]);
    }

    #[test]
    fn two_poles_raise_degree() {
        // [[z/(z-1), 1], [1, z/(z-2)]]
        let raw = vec![
            vec![
                RationalEntry { num: poly(&[0, 1]), den_roots: vec![c(1)] },
                RationalEntry::polynomial(poly(&[1])),
            ],
            vec![
                RationalEntry::polynomial(poly(&[1])),
                RationalEntry { num: poly(&[0, 1]), den_roots: vec![c(2)] },
            ],
        ];
        let out = rationalize_difference(&raw).unwrap();
        assert_eq!(out.denominator.len(), 2);
        assert_eq!(out.matrix.high(), Some(2));
        // (z-1)(z-2) · z/(z-1) = z(z-2)
        assert_eq!(out.matrix[(0, 0)], poly(&[0, -2, 1]));
        assert_eq!(out.matrix[(0, 1)], poly(&[2, -3, 1]));
    }

    #[test]
    fn singular_rejected() {
        let one = RationalEntry::polynomial(poly(&[1]));
        let raw = vec![vec![one.clone(), one.clone()], vec![one.clone(), one]];
        assert!(matches!(rationalize_difference(&raw), Err(Error::ZeroDeterminant)));
    }
}
