//! Local solutions at `0` and `∞`.
//!
//! At `0`: `Y_0 = A(z) z^{diag ρ}` with `A = Σ A_k z^k`, `q^{ρ_i} = λ_i`
//! the eigenvalues of `Q_0`, and
//! `A_k q^k Λ - Q_0 A_k = Σ_{j≥1} Q_j A_{k-j}`.
//!
//! At `∞`: `Y_∞ = q^{(μ/2)(t²-t)} B(z) z^{-diag σ}` with `B = Σ B_k z^{-k}`,
//! `q^{-σ_i} = λ_i` the eigenvalues of `Q_μ`, and
//! `B_k q^{-k} Λ - Q_μ B_k = Σ_{j≥1} Q_{μ-j} B_{k-j}`.
//!
//! In both cases the leading coefficient is the eigenbasis `V` and
//! `A_k = V X_k` reduces each step to the scalar equations
//! `X_k[i,l] (s^k λ_l - λ_i) = (V^{-1} R_k)[i,l]` with `s = q^{±1}`.

use serde::Serialize;

use super::QDifferenceSystem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::roots::{exact_eigen, numeric_eigen, poly_roots};
use crate::scalar::{check_precision, BigComplex, ExactComplex, Scalar};

const GUARD_BITS: u32 = 64;
const MAX_ORDER: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Zero,
    Infinity,
}

#[derive(Clone, Debug)]
pub struct QLocalSolution<T: Scalar = ExactComplex> {
    pub site: Site,
    pub mu: i32,
    pub q: T,
    /// `q^{ρ_i}` at `0`, `q^{-σ_i}` at `∞`.
    pub eigenvalues: Vec<T>,
    /// `A_0 … A_N` or `B_0 … B_N`.
    pub coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> QLocalSolution<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn check_site(s: &QDifferenceSystem, site: Site) -> Result<()> {
    match site {
        Site::Zero => {
            if !s.is_polynomial() {
                return Err(Error::HypothesisViolated("series at 0 needs a polynomial Q".into()));
            }
            if s.coeff(0).det().is_zero() {
                return Err(Error::HypothesisViolated("det Q_0 = 0".into()));
            }
        }
        Site::Infinity => {
            if s.leading().det().is_zero() {
                return Err(Error::HypothesisViolated("det Q_mu = 0".into()));
            }
        }
    }
    Ok(())
}

/// Coefficient matrix entering the recursion at distance `j ≥ 1` from the
/// leading one.
fn neighbour(s: &QDifferenceSystem, site: Site, j: usize) -> Option<Mat> {
    let e = match site {
        Site::Zero => j as i32,
        Site::Infinity => s.mu() - j as i32,
    };
    if e > s.mu() || e < s.low() {
        None
    } else {
        Some(s.coeff(e))
    }
}

fn lead_matrix(s: &QDifferenceSystem, site: Site) -> Mat {
    match site {
        Site::Zero => s.coeff(0),
        Site::Infinity => s.leading(),
    }
}

/// Series at `site` to order `N` over the exact field. Needs exact
/// eigenvalues of the leading matrix.
pub fn local_series_q(s: &QDifferenceSystem, site: Site, order: usize) -> Result<QLocalSolution> {
    check_site(s, site)?;
    let (vals, v) = exact_eigen(&lead_matrix(s, site))?;
    local_series_q_in(s, site, order, vals, v)
}

/// Series at `site` over any scalar field, from a given eigen-decomposition
/// of the leading matrix.
pub fn local_series_q_in<T: Scalar>(
    s: &QDifferenceSystem,
    site: Site,
    order: usize,
    eigenvalues: Vec<T>,
    basis: Mat<T>,
) -> Result<QLocalSolution<T>> {
    check_site(s, site)?;
    let proto = eigenvalues[0].clone();
    let mut rec = Recursion::new(s, site, eigenvalues, basis)?;
    while rec.coeffs.len() <= order {
        rec.push()?;
    }
    Ok(QLocalSolution {
        site,
        mu: s.mu(),
        q: proto.from_exact_like(s.q()),
        eigenvalues: rec.lambda,
        coeffs: rec.coeffs,
    })
}

struct Recursion<T: Scalar> {
    site: Site,
    neighbours: Vec<Mat<T>>,
    lambda: Vec<T>,
    vinv: Mat<T>,
    basis: Mat<T>,
    step: T,
    step_power: T,
    coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> Recursion<T> {
    fn new(s: &QDifferenceSystem, site: Site, lambda: Vec<T>, basis: Mat<T>) -> Result<Self> {
        let proto = lambda[0].clone();
        let vinv = basis
            .inverse()
            .ok_or_else(|| Error::NonDiagonalizable("eigenbasis is singular".into()))?;
        let q = proto.from_exact_like(s.q());
        let step = match site {
            Site::Zero => q,
            Site::Infinity => proto.one_like() / q,
        };
        let span = (s.mu() - s.low()) as usize;
        let neighbours = (1..=span)
            .map(|j| neighbour(s, site, j).expect("within span").map(|x| proto.from_exact_like(x)))
            .collect();
        Ok(Recursion {
            site,
            neighbours,
            lambda,
            vinv,
            basis: basis.clone(),
            step_power: proto.one_like(),
            step,
            coeffs: vec![basis],
        })
    }

    fn push(&mut self) -> Result<()> {
        let k = self.coeffs.len();
        let n = self.basis.rows();
        let proto = self.lambda[0].clone();
        let mut rhs = Mat::zeros_like(n, n, &proto);
        for (j, nb) in self.neighbours.iter().enumerate().take(k) {
            rhs = rhs.add(&nb.mul(&self.coeffs[k - 1 - j]));
        }
        let w = self.vinv.mul(&rhs);
        self.step_power = self.step_power.clone() * self.step.clone();
        let mut x = Mat::zeros_like(n, n, &proto);
        for i in 0..n {
            for l in 0..n {
                let a = self.step_power.clone() * self.lambda[l].clone();
                let den = a.clone() - self.lambda[i].clone();
                let scale = a.pivot_key().max(self.lambda[i].pivot_key());
                if den.is_zero() || den.pivot_key() < scale - 60.0 {
                    let which = match self.site {
                        Site::Zero => "q^k λ_l = λ_i at 0",
                        Site::Infinity => "q^-k λ_l = λ_i at infinity",
                    };
                    return Err(Error::Resonance(format!("{which} for k = {k}, i = {i}, l = {l}")));
                }
                x[(i, l)] = w[(i, l)].clone() / den;
            }
        }
        self.coeffs.push(self.basis.mul(&x));
        Ok(())
    }
}

/// Residuals of the defining recursion; identically zero matrices in exact
/// arithmetic.
pub fn recursion_residuals<T: Scalar>(s: &QDifferenceSystem, sol: &QLocalSolution<T>) -> Vec<Mat<T>> {
    let proto = sol.eigenvalues[0].clone();
    let lam = Mat::diag_from(&sol.eigenvalues);
    let step = match sol.site {
        Site::Zero => sol.q.clone(),
        Site::Infinity => proto.one_like() / sol.q.clone(),
    };
    let mut power = proto.one_like();
    let mut out = Vec::with_capacity(sol.coeffs.len());
    for k in 0..sol.coeffs.len() {
        let mut r = sol.coeffs[k].mul(&lam).scale(&power);
        for m in 0..=k {
            let e = match sol.site {
                Site::Zero => (k - m) as i32,
                Site::Infinity => s.mu() - (k - m) as i32,
            };
            if e > s.mu() || e < s.low() {
                continue;
            }
            let c = s.coeff(e).map(|x| proto.from_exact_like(x));
            r = r.sub(&c.mul(&sol.coeffs[m]));
        }
        out.push(r);
        power = power * step.clone();
    }
    out
}

/// Eigen-decomposition promoted from the exact one when it exists.
fn eigen_big(m: &Mat, wp: u32) -> Result<(Vec<BigComplex>, Mat<BigComplex>)> {
    match exact_eigen(m) {
        Ok((vals, v)) => Ok((vals.iter().map(|x| x.to_big(wp)).collect(), v.to_big(wp))),
        Err(Error::NonExactRoot(_)) => numeric_eigen(&m.to_big(wp)),
        Err(e) => Err(e),
    }
}

/// Horner sum `Σ C_k x^k`.
fn matrix_series(coeffs: &[Mat<BigComplex>], x: &BigComplex) -> Mat<BigComplex> {
    let mut acc = coeffs.last().expect("nonempty series").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.scale(x).add(c);
    }
    acc
}

/// Grows the recursion until `‖C_k‖ r^k` stays below `2^{-wp} ‖C_0‖`
/// for four consecutive orders.
fn converged_series(mut rec: Recursion<BigComplex>, radius: f64, wp: u32) -> Result<Vec<Mat<BigComplex>>> {
    let base = rec.coeffs[0].max_abs().log2();
    let lr = radius.log2();
    let mut quiet = 0;
    while quiet < 4 {
        if rec.coeffs.len() > MAX_ORDER {
            return Err(Error::PrecisionExhausted(format!(
                "local series did not converge within {MAX_ORDER} terms"
            )));
        }
        rec.push()?;
        let k = rec.coeffs.len() - 1;
        let size = rec.coeffs[k].max_abs();
        let term = if size == 0.0 { f64::NEG_INFINITY } else { size.log2() + k as f64 * lr };
        if term < base - wp as f64 {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    Ok(rec.coeffs)
}

fn q_coeffs(s: &QDifferenceSystem, wp: u32) -> Vec<(i32, Mat<BigComplex>)> {
    s.matrix().to_big_coeffs(wp)
}

fn eval_q(coeffs: &[(i32, Mat<BigComplex>)], z: &BigComplex) -> Mat<BigComplex> {
    let n = coeffs[0].1.rows();
    let mut acc = Mat::zeros_like(n, n, z);
    for (e, c) in coeffs {
        acc = acc.add(&c.scale(&z.powi(*e as i64)));
    }
    acc
}

/// Numeric `Y_0` on the whole `t` plane.
#[derive(Clone, Debug)]
pub struct ZeroSolution {
    prec: u32,
    wp: u32,
    ln_q: BigComplex,
    log2_q: f64,
    q_coeffs: Vec<(i32, Mat<BigComplex>)>,
    lambda: Vec<BigComplex>,
    rho: Vec<BigComplex>,
    coeffs: Vec<Mat<BigComplex>>,
}

impl ZeroSolution {
    pub fn new(s: &QDifferenceSystem, precision: u32) -> Result<Self> {
        let prec = check_precision(precision)?;
        let wp = prec + GUARD_BITS;
        check_site(s, Site::Zero)?;
        let (lambda, v) = eigen_big(&s.coeff(0), wp)?;
        let rec = Recursion::new(s, Site::Zero, lambda.clone(), v)?;
        let coeffs = converged_series(rec, 1.0, wp)?;
        let ln_q = s.q_big(wp).ln();
        let rho = lambda.iter().map(|l| l.ln() / ln_q.clone()).collect();
        Ok(ZeroSolution {
            prec,
            wp,
            log2_q: s.q_big(wp).log2_abs(),
            ln_q,
            q_coeffs: q_coeffs(s, wp),
            lambda,
            rho,
            coeffs,
        })
    }

    /// `ρ_i = ln λ_i / ln q`, principal logarithms.
    pub fn rho(&self) -> &[BigComplex] {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[BigComplex] {
        &self.lambda
    }

    pub fn series_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Y_0(t)`: series inside `|z| ≤ 1`, then `Y_0(t) = Q(z/q) Y_0(t-1)`.
    pub fn eval_t(&self, t: &BigComplex) -> Mat<BigComplex> {
        let t = t.with_prec(self.wp);
        let z = (t.clone() * self.ln_q.clone()).exp();
        let steps = (z.log2_abs() / self.log2_q).ceil().max(0.0) as i64;
        let tm = t.clone() - BigComplex::one(self.wp).mul_i64(steps);
        let zm = (tm.clone() * self.ln_q.clone()).exp();
        let a = matrix_series(&self.coeffs, &zm);
        let n = a.rows();
        let power: Vec<BigComplex> = self.rho.iter().map(|r| (r.clone() * tm.clone() * self.ln_q.clone()).exp()).collect();
        let mut y = Mat::from_fn(n, n, |i, j| a[(i, j)].clone() * power[j].clone());
        for j in (1..=steps).rev() {
            let zj = ((t.clone() - BigComplex::one(self.wp).mul_i64(j)) * self.ln_q.clone()).exp();
            y = eval_q(&self.q_coeffs, &zj).mul(&y);
        }
        y.map(|x| x.with_prec(self.prec))
    }

    /// `Y_0` at `z` with `t = ln z / ln q` (principal branch).
    pub fn eval_z(&self, z: &BigComplex) -> Mat<BigComplex> {
        self.eval_t(&(z.with_prec(self.wp).ln() / self.ln_q.clone()))
    }

    /// `‖Y(t+1) - Q(z)Y(t)‖ / ‖Y(t+1)‖`.
    pub fn functional_residual(&self, t: &BigComplex) -> f64 {
        functional_residual(&self.q_coeffs, &self.ln_q, t, |t| self.eval_t(t))
    }
}

fn functional_residual(
    q_coeffs: &[(i32, Mat<BigComplex>)],
    ln_q: &BigComplex,
    t: &BigComplex,
    eval: impl Fn(&BigComplex) -> Mat<BigComplex>,
) -> f64 {
    let wp = ln_q.prec();
    let t = t.with_prec(wp);
    let z = (t.clone() * ln_q.clone()).exp();
    let y0 = eval(&t).map(|x| x.with_prec(wp));
    let y1 = eval(&(t + BigComplex::one(wp))).map(|x| x.with_prec(wp));
    let r = y1.sub(&eval_q(q_coeffs, &z).mul(&y0));
    r.max_abs() / y1.max_abs().max(f64::MIN_POSITIVE)
}

/// Numeric `Y_∞` and `Y_∞^{-1}` on the whole `t` plane.
#[derive(Clone, Debug)]
pub struct InfinitySolution {
    prec: u32,
    wp: u32,
    mu: i32,
    ln_q: BigComplex,
    log2_q: f64,
    q_coeffs: Vec<(i32, Mat<BigComplex>)>,
    lambda: Vec<BigComplex>,
    sigma: Vec<BigComplex>,
    coeffs: Vec<Mat<BigComplex>>,
    /// Series are summed only where `|z| ≥ radius`.
    radius: f64,
}

impl InfinitySolution {
    pub fn new(s: &QDifferenceSystem, precision: u32) -> Result<Self> {
        let prec = check_precision(precision)?;
        let wp = prec + GUARD_BITS;
        check_site(s, Site::Infinity)?;
        let (lambda, v) = eigen_big(&s.leading(), wp)?;
        let det = s.det();
        let max_root = if det.high() > det.low() {
            poly_roots(&det, wp)?.flat().iter().map(|r| r.abs_f64()).fold(0.0, f64::max)
        } else {
            0.0
        };
        let radius = 4.0 * max_root.max(1.0);
        let rec = Recursion::new(s, Site::Infinity, lambda.clone(), v)?;
        let coeffs = converged_series(rec, 1.0 / radius, wp)?;
        let ln_q = s.q_big(wp).ln();
        let sigma = lambda.iter().map(|l| -(l.ln() / ln_q.clone())).collect();
        Ok(InfinitySolution {
            prec,
            wp,
            mu: s.mu(),
            log2_q: s.q_big(wp).log2_abs(),
            ln_q,
            q_coeffs: q_coeffs(s, wp),
            lambda,
            sigma,
            coeffs,
            radius,
        })
    }

    /// `σ_i = -ln λ_i / ln q`, principal logarithms.
    pub fn sigma(&self) -> &[BigComplex] {
        &self.sigma
    }

    pub fn eigenvalues(&self) -> &[BigComplex] {
        &self.lambda
    }

    pub fn series_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `q^{(μ/2)(t²-t)}`.
    pub fn theta(&self, t: &BigComplex) -> BigComplex {
        let e = (t.clone() * t.clone() - t.clone()) * self.ln_q.clone();
        e.mul_i64(self.mu as i64).div_i64(2).exp()
    }

    fn steps_up(&self, t: &BigComplex) -> i64 {
        let z = (t.clone() * self.ln_q.clone()).exp();
        ((self.radius.log2() - z.log2_abs()) / self.log2_q).ceil().max(0.0) as i64
    }

    /// `Y_∞(t)^{-1} = Y_∞(t+m)^{-1} Q(zq^{m-1}) ⋯ Q(z)` with the series
    /// summed at `t + m`.
    pub fn eval_inverse_t(&self, t: &BigComplex) -> Result<Mat<BigComplex>> {
        let t = t.with_prec(self.wp);
        let m = self.steps_up(&t);
        let tm = t.clone() + BigComplex::one(self.wp).mul_i64(m);
        let zm = (tm.clone() * self.ln_q.clone()).exp();
        let b = matrix_series(&self.coeffs, &(BigComplex::one(self.wp) / zm));
        let binv = b
            .inverse()
            .ok_or_else(|| Error::SingularityOnPath("B(z) is singular at the summation point".into()))?;
        let n = binv.rows();
        let theta_inv = BigComplex::one(self.wp) / self.theta(&tm);
        let power: Vec<BigComplex> =
            self.sigma.iter().map(|s| (s.clone() * tm.clone() * self.ln_q.clone()).exp()).collect();
        let mut y = Mat::from_fn(n, n, |i, j| power[i].clone() * binv[(i, j)].clone() * theta_inv.clone());
        for j in (0..m).rev() {
            let zj = ((t.clone() + BigComplex::one(self.wp).mul_i64(j)) * self.ln_q.clone()).exp();
            y = y.mul(&eval_q(&self.q_coeffs, &zj));
        }
        Ok(y.map(|x| x.with_prec(self.prec)))
    }

    /// `Y_∞(t)`.
    pub fn eval_t(&self, t: &BigComplex) -> Result<Mat<BigComplex>> {
        let inv = self.eval_inverse_t(&t.with_prec(self.wp))?.map(|x| x.with_prec(self.wp));
        let y = inv
            .inverse()
            .ok_or_else(|| Error::SingularityOnPath(format!("Y_inf is singular at t = {:?}", t.with_prec(53))))?;
        Ok(y.map(|x| x.with_prec(self.prec)))
    }

    pub fn eval_z(&self, z: &BigComplex) -> Result<Mat<BigComplex>> {
        self.eval_t(&(z.with_prec(self.wp).ln() / self.ln_q.clone()))
    }

    /// `‖Y(t+1) - Q(z)Y(t)‖ / ‖Y(t+1)‖`.
    pub fn functional_residual(&self, t: &BigComplex) -> Result<f64> {
        let t = t.with_prec(self.wp);
        self.eval_t(&t)?;
        self.eval_t(&(t.clone() + BigComplex::one(self.wp)))?;
        Ok(functional_residual(&self.q_coeffs, &self.ln_q, &t, |t| self.eval_t(t).expect("checked above")))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{c, mu_one_instance};
    use super::*;

    fn big(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(192, re, im)
    }

    #[test]
    fn constant_diagonal_system() {
        // μ = 0, Q = diag(2, 3), q = 2: ρ = (1, log₂3), A = I, σ = -ρ.
        let s = QDifferenceSystem::from_coeffs(c(2, 0), &[(0, Mat::diag_from(&[c(2, 0), c(3, 0)]))]).unwrap();
        let at0 = local_series_q(&s, Site::Zero, 6).unwrap();
        assert!(at0.coeffs.iter().skip(1).all(|m| m.is_zero()));
        assert_eq!(at0.coeffs[0], Mat::identity(2));
        let zero = ZeroSolution::new(&s, 128).unwrap();
        assert!((zero.rho()[0].clone() - BigComplex::one(128)).abs_f64() < 1e-35);
        assert!((zero.rho()[1].re().to_f64() - 3f64.log2()).abs() < 1e-14);
        let inf = InfinitySolution::new(&s, 128).unwrap();
        for k in 0..2 {
            assert!((inf.sigma()[k].clone() + zero.rho()[k].clone()).abs_f64() < 1e-35);
        }
        let t = big(0.7, 0.4);
        let y = zero.eval_t(&t);
        let ln_q = big(2.0, 0.0).ln();
        for k in 0..2 {
            let expect = (zero.rho()[k].with_prec(192) * t.clone() * ln_q.clone()).exp();
            assert!((y[(k, k)].clone() - expect).abs_f64() < 1e-20);
        }
    }

    #[test]
    fn scalar_infinity_closed_form() {
        // n = 1, Q = q^{-σ} z^μ: Y_∞ = q^{(μ/2)(t²-t)} z^{-σ}.
        let s = QDifferenceSystem::from_coeffs(c(2, 0), &[(2, Mat::diag_from(&[ExactComplex::ratio(1, 8)]))]).unwrap();
        let inf = InfinitySolution::new(&s, 128).unwrap();
        assert!((inf.sigma()[0].clone() - big(3.0, 0.0)).abs_f64() < 1e-30);
        let t = big(0.3, -1.1);
        let ln_q = big(2.0, 0.0).ln();
        let expect = ((t.clone() * t.clone() - t.clone()) * ln_q.clone()).exp() * (-(big(3.0, 0.0) * t.clone() * ln_q)).exp();
        let y = inf.eval_t(&t).unwrap();
        assert!((y[(0, 0)].clone() - expect.clone()).abs_f64() / expect.abs_f64() < 1e-30);
    }

    #[test]
    fn exact_recursion_holds() {
        let s = mu_one_instance();
        for site in [Site::Zero, Site::Infinity] {
            let sol = local_series_q(&s, site, 10).unwrap();
            assert_eq!(sol.order(), 10);
            assert!(recursion_residuals(&s, &sol).iter().all(|r| r.is_zero()), "{site:?}");
        }
        let inf = local_series_q(&s, Site::Infinity, 3).unwrap();
        assert_eq!(inf.coeffs[0], Mat::identity(2));
    }

    #[test]
    fn functional_equation_numeric() {
        let s = mu_one_instance();
        let zero = ZeroSolution::new(&s, 128).unwrap();
        let inf = InfinitySolution::new(&s, 128).unwrap();
        for t in [big(0.2, 0.3), big(-1.4, 2.0), big(2.6, -4.5), big(5.0, 7.0)] {
            assert!(zero.functional_residual(&t) < 1e-30, "zero at {t:?}");
            assert!(inf.functional_residual(&t).unwrap() < 1e-30, "inf at {t:?}");
        }
    }

    #[test]
    fn numeric_spectrum_matches_exact_series() {
        // Q_0 with irrational eigenvalues takes the numeric path.
        let q0 = Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(1, 0), c(0, 0)]]);
        let q1 = Mat::diag_from(&[c(1, 0), c(0, 1)]);
        let s = QDifferenceSystem::from_coeffs(c(2, 0), &[(0, q0), (1, q1)]).unwrap();
        assert!(matches!(local_series_q(&s, Site::Zero, 4), Err(Error::NonExactRoot(_))));
        let zero = ZeroSolution::new(&s, 128).unwrap();
        assert!(zero.functional_residual(&big(0.9, 0.8)) < 1e-30);
    }
}
