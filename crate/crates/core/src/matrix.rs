//! Dense matrices over a [`Scalar`], matrices of Laurent polynomials and
//! rational matrix functions with a scalar polynomial denominator.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::LaurentPoly;
use crate::scalar::{BigComplex, ExactComplex, Scalar};

#[derive(Clone, PartialEq)]
pub struct Mat<T: Scalar = ExactComplex> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?}  ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros_like(rows: usize, cols: usize, proto: &T) -> Self {
        Mat::from_fn(rows, cols, |_, _| proto.zero_like())
    }

    pub fn identity_like(n: usize, proto: &T) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { proto.one_like() } else { proto.zero_like() })
    }

    pub fn diag_from(d: &[T]) -> Self {
        let n = d.len();
        Mat::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { d[i].zero_like() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in add");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + o[(i, j)].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in sub");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - o[(i, j)].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in mul");
        let proto = self.data.first().or(o.data.first()).expect("empty product");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = proto.zero_like();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                let b = &o[(k, j)];
                if !a.is_zero() && !b.is_zero() {
                    acc = acc + a.clone() * b.clone();
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for (k, vk) in v.iter().enumerate() {
                    acc = acc + self[(i, k)].clone() * vk.clone();
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        self.transpose().mul_vec(v)
    }

    /// `P·self` for the permutation sending row `perm[i]` to row `i`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(perm[i], j)].clone())
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, perm[j])].clone())
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in from..self.rows {
            let x = &self[(i, col)];
            if x.is_zero() {
                continue;
            }
            let k = x.pivot_key();
            if best.map_or(true, |(_, bk)| k > bk) {
                best = Some((i, k));
            }
        }
        best.map(|(i, _)| i)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = m.pivot_row(c, r) else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].one_like() / m[(r, c)].clone();
            for j in 0..m.cols {
                let v = m[(r, j)].clone() * inv.clone();
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in 0..m.cols {
                    let v = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{v : self·v = 0}`.
    pub fn right_kernel(&self) -> Vec<Vec<T>> {
        let (m, pivots) = self.rref();
        let proto = self.data[0].clone();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![proto.zero_like(); self.cols];
            v[free] = proto.one_like();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(r, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel `{w : w·self = 0}`.
    pub fn left_kernel(&self) -> Vec<Vec<T>> {
        self.transpose().right_kernel()
    }

    pub fn det(&self) -> T {
        assert!(self.is_square(), "det of non-square matrix");
        let mut m = self.clone();
        let proto = self.data.first().expect("det of empty matrix").clone();
        let mut det = proto.one_like();
        for c in 0..m.cols {
            let Some(p) = m.pivot_row(c, c) else {
                return proto.zero_like();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for i in (c + 1)..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() / piv.clone();
                for j in c..m.cols {
                    let v = m[(i, j)].clone() - f.clone() * m[(c, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of non-square matrix");
        let n = self.rows;
        let proto = self.data.first()?.clone();
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                proto.one_like()
            } else {
                proto.zero_like()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    /// Solves `self·x = b`, `None` when singular.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        Some(self.inverse()?.mul_vec(b))
    }
}

impl Mat<ExactComplex> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::zeros_like(rows, cols, &ExactComplex::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::identity_like(n, &ExactComplex::zero())
    }

    pub fn to_big(&self, prec: u32) -> Mat<BigComplex> {
        self.map(|x| x.to_big(prec))
    }
}

impl Mat<BigComplex> {
    /// Largest entry modulus as `f64`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(64, |x| x.prec())
    }
}

/// Serialized as nested row arrays.
impl<T: Scalar + Serialize> Serialize for Mat<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<T>> = (0..self.rows).map(|i| self.row(i)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat<ExactComplex> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<ExactComplex>> = Vec::deserialize(d)?;
        let c = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Mat::from_rows(rows))
    }
}

/// Matrix whose entries are exact Laurent polynomials.
#[derive(Clone, PartialEq)]
pub struct PolyMat {
    rows: usize,
    cols: usize,
    data: Vec<LaurentPoly>,
}

impl Index<(usize, usize)> for PolyMat {
    type Output = LaurentPoly;
    fn index(&self, (i, j): (usize, usize)) -> &LaurentPoly {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for PolyMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut LaurentPoly {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for PolyMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(f, "  ({i},{j}): {:?}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl PolyMat {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> LaurentPoly) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        PolyMat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMat::from_fn(rows, cols, |_, _| LaurentPoly::zero())
    }

    pub fn identity(n: usize) -> Self {
        PolyMat::from_fn(n, n, |i, j| if i == j { LaurentPoly::one() } else { LaurentPoly::zero() })
    }

    pub fn constant(m: &Mat) -> Self {
        PolyMat::from_fn(m.rows(), m.cols(), |i, j| LaurentPoly::constant(m[(i, j)].clone()))
    }

    /// `Σ_e coeffs[e] z^e` from a list of `(exponent, matrix)` pairs.
    pub fn from_coeff_mats(n_rows: usize, n_cols: usize, coeffs: &[(i32, Mat)]) -> Self {
        let mut out = PolyMat::zeros(n_rows, n_cols);
        for (e, m) in coeffs {
            assert_eq!((m.rows(), m.cols()), (n_rows, n_cols), "coefficient shape mismatch");
            for i in 0..n_rows {
                for j in 0..n_cols {
                    out[(i, j)].add_term(*e, m[(i, j)].clone());
                }
            }
        }
        out
    }

    /// `diag(z^{k_1}, …, z^{k_n})`.
    pub fn z_power_diag(k: &[i32]) -> Self {
        let n = k.len();
        PolyMat::from_fn(n, n, |i, j| {
            if i == j {
                LaurentPoly::monomial(ExactComplex::one(), k[i])
            } else {
                LaurentPoly::zero()
            }
        })
    }

    /// Diagonal matrix with the given polynomial entries.
    pub fn diag(d: &[LaurentPoly]) -> Self {
        let n = d.len();
        PolyMat::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { LaurentPoly::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|p| p.is_zero())
    }

    pub fn high(&self) -> Option<i32> {
        self.data.iter().filter_map(|p| p.high()).max()
    }

    pub fn low(&self) -> Option<i32> {
        self.data.iter().filter_map(|p| p.low()).min()
    }

    pub fn is_polynomial(&self) -> bool {
        self.data.iter().all(|p| p.is_polynomial())
    }

    /// Coefficient matrix of `z^e`.
    pub fn coeff(&self, e: i32) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].coeff(e).cloned().unwrap_or_else(ExactComplex::zero)
        })
    }

    /// All coefficient matrices from `low` to `high`.
    pub fn coeff_mats(&self) -> Vec<(i32, Mat)> {
        match (self.low(), self.high()) {
            (Some(l), Some(h)) => (l..=h).map(|e| (e, self.coeff(e))).collect(),
            _ => Vec::new(),
        }
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        PolyMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        PolyMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in add");
        PolyMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &o[(i, j)])
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in sub");
        PolyMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &o[(i, j)])
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in mul");
        PolyMat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = LaurentPoly::zero();
            for k in 0..self.cols {
                if self[(i, k)].is_zero() || o[(k, j)].is_zero() {
                    continue;
                }
                acc = &acc + &(&self[(i, k)] * &o[(k, j)]);
            }
            acc
        })
    }

    pub fn scale(&self, p: &LaurentPoly) -> Self {
        self.map(|x| x * p)
    }

    pub fn scale_const(&self, c: &ExactComplex) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Multiplies every entry by `z^k`.
    pub fn shift_exponents(&self, k: i32) -> Self {
        self.map(|x| x.shift_exponents(k))
    }

    /// `M(q z)`.
    pub fn dilate(&self, q: &ExactComplex) -> Self {
        self.map(|x| x.dilate(q))
    }

    /// `M(z + c)`; entries must be polynomials.
    pub fn translate(&self, c: &ExactComplex) -> Self {
        self.map(|x| x.translate(c))
    }

    pub fn eval(&self, x: &ExactComplex) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].eval(x))
    }

    pub fn eval_big(&self, x: &BigComplex) -> Mat<BigComplex> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].eval_big(x))
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        PolyMat::from_fn(self.rows, self.cols, |i, j| self[(perm[i], j)].clone())
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        PolyMat::from_fn(self.rows, self.cols, |i, j| self[(i, perm[j])].clone())
    }

    /// Determinant by fraction-free (Bareiss) elimination. All divisions are
    /// exact in the Laurent ring.
    pub fn det(&self) -> LaurentPoly {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return LaurentPoly::one();
        }
        let mut m = self.clone();
        let mut sign = false;
        let mut prev = LaurentPoly::one();
        for k in 0..n {
            if m[(k, k)].is_zero() {
                let Some(p) = ((k + 1)..n).find(|&i| !m[(i, k)].is_zero()) else {
                    return LaurentPoly::zero();
                };
                for j in 0..n {
                    m.data.swap(k * n + j, p * n + j);
                }
                sign = !sign;
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let num = &(&m[(i, j)] * &m[(k, k)]) - &(&m[(i, k)] * &m[(k, j)]);
                    m[(i, j)] = num
                        .div_exact(&prev)
                        .expect("Bareiss division must be exact");
                }
                m[(i, k)] = LaurentPoly::zero();
            }
            prev = m[(k, k)].clone();
        }
        let d = m[(n - 1, n - 1)].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    fn minor(&self, r: usize, c: usize) -> PolyMat {
        PolyMat::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let ii = if i < r { i } else { i + 1 };
            let jj = if j < c { j } else { j + 1 };
            self[(ii, jj)].clone()
        })
    }

    /// Classical adjugate, `adj(M)·M = det(M)·I`.
    pub fn adjugate(&self) -> PolyMat {
        assert_eq!(self.rows, self.cols, "adjugate of non-square matrix");
        let n = self.rows;
        if n == 1 {
            return PolyMat::identity(1);
        }
        PolyMat::from_fn(n, n, |i, j| {
            let c = self.minor(j, i).det();
            if (i + j) % 2 == 1 {
                -c
            } else {
                c
            }
        })
    }

    /// Inverse as a Laurent matrix, defined when `det = c·z^m`.
    pub fn inverse_laurent(&self) -> Result<PolyMat> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        let Some((m, c)) = det.as_monomial() else {
            return Err(Error::NotUnitOffOrigin(format!("{det:?}")));
        };
        let inv = LaurentPoly::monomial(c.inv(), -m);
        Ok(self.adjugate().scale(&inv))
    }

    /// Row degree (highest exponent in row `i`), `None` for a zero row.
    pub fn row_degree(&self, i: usize) -> Option<i32> {
        (0..self.cols).filter_map(|j| self[(i, j)].high()).max()
    }

    pub fn to_big_coeffs(&self, prec: u32) -> Vec<(i32, Mat<BigComplex>)> {
        self.coeff_mats().into_iter().map(|(e, m)| (e, m.to_big(prec))).collect()
    }

    pub fn bit_size(&self) -> u64 {
        self.data.iter().map(|p| p.bit_size()).max().unwrap_or(0)
    }
}

/// Serialized as nested row arrays of `{"exponent": coefficient}` maps.
impl Serialize for PolyMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[LaurentPoly]> = self.data.chunks(self.cols.max(1)).take(self.rows).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<LaurentPoly>> = Vec::deserialize(d)?;
        let c = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(PolyMat {
            rows: rows.len(),
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

/// `num(z) / den(z)` with a polynomial matrix numerator and a nonzero
/// scalar polynomial denominator, kept with no common polynomial factor.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalMat {
    pub num: PolyMat,
    pub den: LaurentPoly,
}

impl RationalMat {
    pub fn new(num: PolyMat, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        // Move negative exponents into the denominator.
        let shift = num.low().map_or(0, |l| (-l).max(0)).max(den.low().map_or(0, |l| -l));
        let num = num.shift_exponents(shift);
        let den = den.shift_exponents(shift);
        let mut r = RationalMat { num, den };
        r.reduce();
        r
    }

    pub fn from_laurent(m: &PolyMat) -> Self {
        RationalMat::new(m.clone(), LaurentPoly::one())
    }

    fn reduce(&mut self) {
        let mut g = self.den.clone();
        for p in self.num.entries() {
            if g.high() == Some(0) {
                break;
            }
            g = g.gcd(p);
        }
        let g = g.monic();
        if g.high().unwrap_or(0) > 0 {
            self.num = self.num.map(|p| p.div_exact(&g).expect("gcd divides"));
            self.den = self.den.div_exact(&g).expect("gcd divides");
        }
        // Monic denominator.
        let lead = self.den.leading().unwrap().inv();
        self.den = self.den.scale(&lead);
        self.num = self.num.scale_const(&lead);
    }

    pub fn rows(&self) -> usize {
        self.num.rows()
    }

    pub fn mul(&self, o: &Self) -> Self {
        RationalMat::new(self.num.mul(&o.num), &self.den * &o.den)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.num.det();
        if d.is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        let adj = self.num.adjugate().scale(&self.den);
        Ok(RationalMat::new(adj, d))
    }

    /// Substitutes `z → q z`.
    pub fn dilate(&self, q: &ExactComplex) -> Self {
        RationalMat::new(self.num.dilate(q), self.den.dilate(q))
    }

    /// Substitutes `z → z + c`.
    pub fn translate(&self, c: &ExactComplex) -> Self {
        RationalMat::new(self.num.translate(c), self.den.translate(c))
    }

    /// The Laurent matrix equal to `self`, when the reduced denominator is
    /// a monomial.
    pub fn to_laurent(&self) -> Option<PolyMat> {
        let (e, c) = self.den.as_monomial()?;
        Some(self.num.shift_exponents(-e).scale_const(&c.inv()))
    }

    pub fn eval(&self, x: &ExactComplex) -> Option<Mat> {
        let d = self.den.eval(x);
        let inv = d.checked_inv()?;
        Some(self.num.eval(x).scale(&inv))
    }

    pub fn eval_big(&self, x: &BigComplex) -> Mat<BigComplex> {
        let d = self.den.eval_big(x);
        let inv = d.one_like() / d;
        self.num.eval_big(x).scale(&inv)
    }

    /// Determinant as `(numerator, denominator)`.
    pub fn det(&self) -> (LaurentPoly, LaurentPoly) {
        let n = self.num.rows() as u32;
        let mut den = LaurentPoly::one();
        for _ in 0..n {
            den = &den * &self.den;
        }
        (self.num.det(), den)
    }
}

/// Exact determinant of a Laurent polynomial matrix.
pub fn poly_det(m: &PolyMat) -> LaurentPoly {
    m.det()
}

/// Nonzero left null vector of an exact square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelVector {
    /// Normalized so that its first nonzero entry is 1.
    pub v: Vec<ExactComplex>,
    /// Indices of nonzero entries, increasing.
    pub support: Vec<usize>,
}

/// A left null vector `w` with `w·m = 0`, or `None` when `m` is invertible.
pub fn exact_kernel_vector(m: &Mat) -> Option<KernelVector> {
    assert!(m.is_square(), "kernel vector of non-square matrix");
    let ker = m.left_kernel();
    let v = ker.into_iter().next()?;
    Some(normalize_kernel_vector(v))
}

pub(crate) fn normalize_kernel_vector(v: Vec<ExactComplex>) -> KernelVector {
    let first = v.iter().find(|x| !x.is_zero()).expect("nonzero kernel vector").inv();
    let v: Vec<ExactComplex> = v.into_iter().map(|x| x * first.clone()).collect();
    let support = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    KernelVector { v, support }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    fn exact(rows: &[&[i64]]) -> Mat {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect())
    }

    #[test]
    fn det_and_inverse() {
        let m = exact(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), c(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        assert!(exact(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn kernels() {
        let m = exact(&[&[1, 2, 3], &[2, 4, 6]]);
        let rk = m.right_kernel();
        assert_eq!(rk.len(), 2);
        for v in &rk {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        let lk = m.left_kernel();
        assert_eq!(lk.len(), 1);
        assert!(m.vec_mul(&lk[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn numeric_det_matches_exact() {
        let m = exact(&[&[2, 1], &[7, 5]]);
        let d = m.to_big(128).det();
        assert!((d.abs_f64() - 3.0).abs() < 1e-30);
    }

    #[test]
    fn poly_det_adjugate() {
        // [[z, 1], [0, z^-1]] has det 1.
        let m = PolyMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => LaurentPoly::z(),
            (0, 1) => LaurentPoly::one(),
            (1, 1) => LaurentPoly::monomial(c(1), -1),
            _ => LaurentPoly::zero(),
        });
        assert_eq!(m.det(), LaurentPoly::one());
        let inv = m.inverse_laurent().unwrap();
        assert_eq!(m.mul(&inv), PolyMat::identity(2));
    }

    #[test]
    fn bareiss_three_by_three() {
        let z = LaurentPoly::z();
        let one = LaurentPoly::one();
        let m = PolyMat::from_fn(3, 3, |i, j| {
            if i == j {
                &z + &one
            } else if j == i + 1 {
                z.clone()
            } else {
                LaurentPoly::zero()
            }
        });
        let d = m.det();
        let zp1 = &z + &one;
        assert_eq!(d, &(&zp1 * &zp1) * &zp1);
        let adj = m.adjugate();
        assert_eq!(adj.mul(&m), PolyMat::identity(3).scale(&d));
    }

    #[test]
    fn non_unit_determinant_rejected() {
        let m = PolyMat::diag(&[LaurentPoly::linear(&c(1)), LaurentPoly::one()]);
        assert!(matches!(m.inverse_laurent(), Err(Error::NotUnitOffOrigin(_))));
        let r = RationalMat::from_laurent(&m).inverse().unwrap();
        assert_eq!(r.mul(&RationalMat::from_laurent(&m)).to_laurent().unwrap(), PolyMat::identity(2));
    }

    #[test]
    fn rational_translate_cancels() {
        // diag(1/(z-1), 1) translated by 1 is diag(1/z, 1), a Laurent matrix.
        let m = RationalMat::new(
            PolyMat::diag(&[LaurentPoly::one(), LaurentPoly::linear(&c(1))]),
            LaurentPoly::linear(&c(1)),
        );
        let t = m.translate(&c(1)).to_laurent().unwrap();
        assert_eq!(t, PolyMat::z_power_diag(&[-1, 0]));
    }

    #[test]
    fn kernel_vector_examples() {
        let k = exact_kernel_vector(&exact(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(k.v, vec![c(1), c(-1)]);
        assert_eq!(k.support, vec![0, 1]);
        assert!(exact_kernel_vector(&exact(&[&[1, 2], &[3, 4]])).is_none());
        let k = exact_kernel_vector(&exact(&[&[0, 0], &[0, 1]])).unwrap();
        assert_eq!(k.v, vec![c(1), c(0)]);
        assert_eq!(k.support, vec![0]);
    }

    #[test]
    fn worked_determinant() {
        let z = LaurentPoly::z();
        let m = PolyMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => &z + &LaurentPoly::constant(c(2)),
            (1, 1) => &z.scale(&ExactComplex::i()) + &LaurentPoly::constant(ExactComplex::new(0, 3)),
            _ => LaurentPoly::one(),
        });
        let expect = LaurentPoly::from_coeffs(
            0,
            [ExactComplex::new(-1, 6), ExactComplex::new(0, 5), ExactComplex::i()],
        );
        assert_eq!(poly_det(&m), expect);
        assert_eq!(poly_det(&PolyMat::z_power_diag(&[1, -1])), LaurentPoly::one());
    }
}
