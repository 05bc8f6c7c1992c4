//! Birkhoff factorization `M = U^{-1} z^K W` with `U` polynomial unimodular
//! and `W` holomorphic and invertible at infinity, by row reduction of the
//! numerator of `M`.

use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat, RationalMat};
use crate::poly::LaurentPoly;
use crate::scalar::ExactComplex;

/// `U M = z^K W` for a Laurent `M` invertible off the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SauvageFactorization {
    pub u: PolyMat,
    pub w: PolyMat,
    /// Partial indices, descending.
    pub k: Vec<i32>,
}

/// `U M = z^K W` for a rational `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffSplit {
    pub u: PolyMat,
    pub w: RationalMat,
    /// Partial indices, descending.
    pub k: Vec<i32>,
}

/// Unimodular `U` with `U P = R` row reduced: the matrix of leading row
/// coefficients of `R` is invertible.
pub fn row_reduce(p: &PolyMat) -> Result<(PolyMat, PolyMat)> {
    let n = p.rows();
    if !p.is_polynomial() {
        return Err(Error::InvalidInput("row reduction needs a polynomial matrix".into()));
    }
    if p.det().is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let mut u = PolyMat::identity(n);
    let mut r = p.clone();
    loop {
        let deg: Vec<i32> = (0..n).map(|i| r.row_degree(i).expect("nonzero row")).collect();
        let lead = Mat::from_fn(n, n, |i, j| r[(i, j)].coeff(deg[i]).cloned().unwrap_or_else(ExactComplex::zero));
        let Some(c) = lead.left_kernel().into_iter().next() else {
            return Ok((u, r));
        };
        // Replace the row of largest degree in the support; its leading
        // coefficients cancel.
        let support: Vec<usize> = (0..n).filter(|&j| !c[j].is_zero()).collect();
        let top = *support.iter().max_by_key(|&&j| (deg[j], j)).unwrap();
        let inv = c[top].inv();
        let mut e = PolyMat::identity(n);
        for &j in &support {
            e[(top, j)] = LaurentPoly::monomial(&c[j] * &inv, deg[top] - deg[j]);
        }
        r = e.mul(&r);
        u = e.mul(&u);
    }
}

/// Birkhoff split of a rational matrix with nonzero determinant.
pub fn birkhoff_split(m: &RationalMat) -> Result<BirkhoffSplit> {
    let n = m.rows();
    let (u, r) = row_reduce(&m.num)?;
    let den_deg = m.den.high().unwrap_or(0);
    let k: Vec<i32> = (0..n).map(|i| r.row_degree(i).unwrap() - den_deg).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (-k[i], i));
    let k: Vec<i32> = order.iter().map(|&i| k[i]).collect();
    let u = u.permute_rows(&order);
    let neg: Vec<i32> = k.iter().map(|x| -x).collect();
    let w = RationalMat::new(PolyMat::z_power_diag(&neg).mul(&r.permute_rows(&order)), m.den.clone());

    // z^K W = U M, and W is invertible at infinity.
    let lhs = RationalMat::from_laurent(&u).mul(m);
    let rhs = RationalMat::from_laurent(&PolyMat::z_power_diag(&k)).mul(&w);
    if lhs != rhs {
        return Err(Error::NormalizationLost("Birkhoff split identity failed".into()));
    }
    if !u.det().is_nonzero_constant() {
        return Err(Error::NormalizationLost("U is not unimodular".into()));
    }
    let w_inf = value_at_infinity(&w).ok_or_else(|| Error::NormalizationLost("W has a pole at infinity".into()))?;
    if w_inf.det().is_zero() {
        return Err(Error::NormalizationLost("W is singular at infinity".into()));
    }
    Ok(BirkhoffSplit { u, w, k })
}

/// `lim_{z→∞} M(z)` when finite.
pub(crate) fn value_at_infinity(m: &RationalMat) -> Option<Mat> {
    let dd = m.den.high().unwrap();
    let dl = m.den.leading().unwrap();
    let n = m.rows();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = &m.num[(i, j)];
            match p.high() {
                Some(h) if h > dd => return None,
                Some(h) if h == dd => out[(i, j)] = p.leading().unwrap() / dl,
                _ => {}
            }
        }
    }
    Some(out)
}

/// Birkhoff split of a Laurent matrix whose determinant is a monomial.
pub fn sauvage_factorize(m: &PolyMat) -> Result<SauvageFactorization> {
    let det = m.det();
    if det.as_monomial().is_none() {
        return Err(Error::NotUnitOffOrigin(format!("{det:?}")));
    }
    let split = birkhoff_split(&RationalMat::from_laurent(m))?;
    let w = split.w.to_laurent().expect("monomial denominator");
    Ok(SauvageFactorization { u: split.u, w, k: split.k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i64, im: i64) -> ExactComplex {
        ExactComplex::new(re, im)
    }

    fn check(m: &PolyMat, f: &SauvageFactorization) {
        let lhs = f.u.mul(m);
        let rhs = PolyMat::z_power_diag(&f.k).mul(&f.w);
        assert_eq!(lhs, rhs);
        assert!(f.u.is_polynomial());
        assert!(f.u.det().is_nonzero_constant());
        assert!(f.w.high().unwrap() <= 0);
        assert!(f.w.coeff(0).det() != ExactComplex::zero());
        assert!(f.w.det().is_nonzero_constant());
        assert_eq!(f.k.iter().sum::<i32>(), m.det().low().unwrap());
        assert!(f.k.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pure_power() {
        let m = PolyMat::z_power_diag(&[2, -1, 0]);
        let f = sauvage_factorize(&m).unwrap();
        check(&m, &f);
        assert_eq!(f.k, vec![2, 0, -1]);
    }

    #[test]
    fn mixed_product() {
        // M = U0 z^K0 W0 with U0 unimodular and W0 = I + O(1/z).
        let z = LaurentPoly::z();
        let one = LaurentPoly::one();
        let u0 = PolyMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => &(&z * &z) + &LaurentPoly::constant(c(1, 1)),
            (0, 0) | (1, 1) => one.clone(),
            _ => LaurentPoly::zero(),
        });
        let w0 = PolyMat::from_fn(2, 2, |i, j| match (i, j) {
            (1, 0) => LaurentPoly::monomial(c(3, -1), -1),
            (0, 1) => LaurentPoly::zero(),
            _ => one.clone(),
        });
        let m = u0.mul(&PolyMat::z_power_diag(&[1, -2])).mul(&w0);
        let f = sauvage_factorize(&m).unwrap();
        check(&m, &f);
        let mut k = f.k.clone();
        k.sort();
        assert_eq!(k, vec![-2, 1]);
    }

    #[test]
    fn not_unit_rejected() {
        let m = PolyMat::diag(&[LaurentPoly::linear(&c(1, 0)), LaurentPoly::one()]);
        assert!(matches!(sauvage_factorize(&m), Err(Error::NotUnitOffOrigin(_))));
    }

    #[test]
    fn rational_split() {
        let m = RationalMat::new(
            PolyMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => LaurentPoly::z(),
                (0, 1) => LaurentPoly::linear(&c(2, 0)),
                (1, 1) => LaurentPoly::one(),
                _ => LaurentPoly::zero(),
            }),
            LaurentPoly::linear(&c(1, 0)),
        );
        let s = birkhoff_split(&m).unwrap();
        assert!(s.u.det().is_nonzero_constant());
        // det M = z/(z-1)^2 has degree -1 at infinity.
        assert_eq!(s.k.iter().sum::<i32>(), -1);
    }
}
