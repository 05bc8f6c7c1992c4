//! Solutions of the scalar equation `g(qz) = (z - m) g(z)`.
//!
//! For `m = 0` the solution is `f(t) = q^{(t²-t)/2}`. For `m ≠ 0` the
//! substitution `z = m z̄`, `g = e^{πi t̄} m^{t̄} ȳ(z̄)` with `t̄ = log_q z̄`
//! leads to `ȳ(q z̄) = (1 - z̄) ȳ(z̄)`, solved near `0` by
//! `ȳ₀ = Π_{k≥1} (1 - z̄/q^k)` and near `∞` by
//! `ȳ_∞ = q^{(t̄²-t̄)/2} e^{-πi t̄} Π_{k≥0} (1 - z̄^{-1} q^{-k})^{-1}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{check_precision, BigComplex, ExactComplex};

const GUARD_BITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    /// `ȳ₀`, entire in `z̄`.
    Zero,
    /// `ȳ_∞`, analytic near `z̄ = ∞` after removing the theta prefactor.
    Infinity,
}

/// One solution of `g(qz) = (z - m) g(z)`, evaluated in the `t` plane.
#[derive(Clone, Debug)]
pub struct ScalarQSolution {
    q: BigComplex,
    ln_q: BigComplex,
    m: BigComplex,
    /// `log_q m` on the principal branch; zero when `m = 0`.
    log_q_m: BigComplex,
    ln_m: BigComplex,
    kind: ScalarKind,
    prec: u32,
    wp: u32,
}

/// Builds the solution of `g(qz) = (z - m) g(z)` of the requested kind.
/// The kind is irrelevant for `m = 0`.
pub fn scalar_q_solution(m: &BigComplex, q: &BigComplex, kind: ScalarKind, precision: u32) -> Result<ScalarQSolution> {
    let prec = check_precision(precision)?;
    let wp = prec + GUARD_BITS;
    let q = q.with_prec(wp);
    if q.abs_f64() <= 1.0 {
        return Err(Error::InvalidInput("scalar q-solution needs |q| > 1".into()));
    }
    let m = m.with_prec(wp);
    let ln_q = q.ln();
    let (ln_m, log_q_m) = if m.0.is_zero() {
        (BigComplex::zero(wp), BigComplex::zero(wp))
    } else {
        let l = m.ln();
        (l.clone(), l / ln_q.clone())
    };
    Ok(ScalarQSolution {
        q,
        ln_q,
        m,
        log_q_m,
        ln_m,
        kind,
        prec,
        wp,
    })
}

/// `f(t) = q^{(t²-t)/2}` for integer `t`, exactly.
pub fn theta_exact(q: &ExactComplex, t: i64) -> ExactComplex {
    q.powi((t * t - t) / 2)
}

impl ScalarQSolution {
    pub fn is_monomial(&self) -> bool {
        self.m.0.is_zero()
    }

    pub fn q(&self) -> &BigComplex {
        &self.q
    }

    pub fn m(&self) -> &BigComplex {
        &self.m
    }

    /// `f(t) = q^{(t²-t)/2} = e^{(t²-t) ln q / 2}`.
    pub fn theta(&self, t: &BigComplex) -> BigComplex {
        let t = t.with_prec(self.wp);
        let e = (t.clone() * t.clone() - t) * self.ln_q.clone();
        e.div_i64(2).exp().with_prec(self.prec)
    }

    /// `ȳ(z̄)` at `t̄ = log_q z̄` (only meaningful for `m ≠ 0`).
    pub fn normal_form(&self, tbar: &BigComplex) -> Result<BigComplex> {
        let tbar = tbar.with_prec(self.wp);
        let zbar = (tbar.clone() * self.ln_q.clone()).exp();
        let v = match self.kind {
            ScalarKind::Zero => self.product_zero(&zbar)?,
            ScalarKind::Infinity => {
                let prod = self.product_infinity(&zbar)?;
                let pi_i = BigComplex::i(self.wp) * BigComplex::pi(self.wp);
                let theta = ((tbar.clone() * tbar.clone() - tbar.clone()) * self.ln_q.clone()).div_i64(2).exp();
                theta * (-(pi_i * tbar)).exp() / prod
            }
        };
        Ok(v.with_prec(self.prec))
    }

    /// `g` at `t = log_q z`, where `z = e^{t ln q}`.
    pub fn eval_t(&self, t: &BigComplex) -> Result<BigComplex> {
        if self.is_monomial() {
            return Ok(self.theta(t));
        }
        let t = t.with_prec(self.wp);
        // z = m z̄ with t̄ = t - log_q m, consistent with z = e^{t ln q}.
        let tbar = t - self.log_q_m.clone();
        let ybar = self.normal_form(&tbar)?.with_prec(self.wp);
        let pi_i = BigComplex::i(self.wp) * BigComplex::pi(self.wp);
        let pre = (pi_i * tbar.clone() + tbar * self.ln_m.clone()).exp();
        Ok((pre * ybar).with_prec(self.prec))
    }

    /// `g` at `z` with `t = ln z / ln q` on the principal branch.
    pub fn eval_z(&self, z: &BigComplex) -> Result<BigComplex> {
        let t = z.with_prec(self.wp).ln() / self.ln_q.clone();
        self.eval_t(&t)
    }

    /// Relative residual of `g(t+1) = (z - m) g(t)`.
    pub fn functional_residual(&self, t: &BigComplex) -> Result<f64> {
        let t = t.with_prec(self.wp);
        let z = (t.clone() * self.ln_q.clone()).exp();
        let g0 = self.eval_t(&t)?;
        let g1 = self.eval_t(&(t + BigComplex::one(self.wp)))?;
        let rhs = (z - self.m.clone()) * g0;
        let den = g1.abs_f64().max(rhs.abs_f64()).max(f64::MIN_POSITIVE);
        Ok((g1 - rhs).abs_f64() / den)
    }

    fn near_one(&self, x: &BigComplex) -> bool {
        (x.clone() - BigComplex::one(self.wp)).log2_abs() < -((self.prec / 2) as f64)
    }

    /// `Π_{k≥1} (1 - z̄/q^k)`, stopping once `|z̄/q^k| < 2^{-wp}`.
    fn product_zero(&self, zbar: &BigComplex) -> Result<BigComplex> {
        let mut acc = BigComplex::one(self.wp);
        let mut x = zbar.clone() / self.q.clone();
        let limit = -(self.wp as f64);
        for _ in 0..100_000 {
            if self.near_one(&x) {
                return Err(Error::Domain(format!("y0 vanishes at the lattice point z = {:?}", zbar.with_prec(53))));
            }
            acc = acc * (BigComplex::one(self.wp) - x.clone());
            if x.log2_abs() < limit {
                return Ok(acc);
            }
            x = x / self.q.clone();
        }
        Err(Error::PrecisionExhausted("product for y0 did not converge".into()))
    }

    /// `Π_{k≥0} (1 - z̄^{-1} q^{-k})`.
    fn product_infinity(&self, zbar: &BigComplex) -> Result<BigComplex> {
        if zbar.0.is_zero() {
            return Err(Error::Domain("y_inf is undefined at z = 0".into()));
        }
        let mut acc = BigComplex::one(self.wp);
        let mut x = BigComplex::one(self.wp) / zbar.clone();
        let limit = -(self.wp as f64);
        for _ in 0..100_000 {
            if self.near_one(&x) {
                return Err(Error::Domain(format!("y_inf has a pole at z = {:?}", zbar.with_prec(53))));
            }
            acc = acc * (BigComplex::one(self.wp) - x.clone());
            if x.log2_abs() < limit {
                return Ok(acc);
            }
            x = x / self.q.clone();
        }
        Err(Error::PrecisionExhausted("product for y_inf did not converge".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(192, re, im)
    }

    #[test]
    fn theta_shift_exact() {
        let q = ExactComplex::real(2);
        assert_eq!(&theta_exact(&q, 4) / &theta_exact(&q, 3), ExactComplex::real(8));
    }

    #[test]
    fn y0_at_origin_is_one() {
        let s = scalar_q_solution(&big(1.0, 0.0), &big(2.0, 0.0), ScalarKind::Zero, 128).unwrap();
        // z̄ → 0 is t̄ → -∞.
        let v = s.normal_form(&big(-400.0, 0.0)).unwrap();
        assert!((v - BigComplex::one(128)).abs_f64() < 1e-30);
    }

    #[test]
    fn normal_form_relation() {
        // ȳ₀(q z̄) = (1 - z̄) ȳ₀(z̄) at z̄ = 1/2, q = 2, against a truncated product.
        let s = scalar_q_solution(&big(1.0, 0.0), &big(2.0, 0.0), ScalarKind::Zero, 128).unwrap();
        let tbar = big(-1.0, 0.0);
        let v0 = s.normal_form(&tbar).unwrap();
        let v1 = s.normal_form(&(tbar + BigComplex::one(192))).unwrap();
        assert!((v1.clone() - v0.mul_f64(0.5)).abs_f64() < 1e-12);
        let oracle: f64 = (1..200).map(|k| 1.0 - 0.5 / 2f64.powi(k)).product();
        assert!((v0.re().to_f64() - oracle).abs() < 1e-12);
    }

    #[test]
    fn lattice_zero_is_domain_error() {
        let s = scalar_q_solution(&big(1.0, 0.0), &big(2.0, 0.0), ScalarKind::Zero, 128).unwrap();
        assert!(matches!(s.normal_form(&big(3.0, 0.0)), Err(Error::Domain(_))));
        let s = scalar_q_solution(&big(1.0, 0.0), &big(2.0, 0.0), ScalarKind::Infinity, 128).unwrap();
        assert!(matches!(s.normal_form(&big(-2.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn functional_equations() {
        for q in [big(2.0, 0.0), big(2.0, 0.5)] {
            for kind in [ScalarKind::Zero, ScalarKind::Infinity] {
                for m in [big(0.0, 0.0), big(1.5, -0.25), big(-0.3, 2.0)] {
                    let s = scalar_q_solution(&m, &q, kind, 128).unwrap();
                    for t in [big(0.3, 0.1), big(-1.7, 0.4), big(2.2, -0.3)] {
                        let r = s.functional_residual(&t).unwrap();
                        assert!(r < 1e-25, "kind {kind:?} m {m:?} t {t:?}: {r:e}");
                    }
                }
            }
        }
    }
}
