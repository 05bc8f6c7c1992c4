//! The connection matrix `P = Y_∞^{-1} Y_0` and its circuit relations
//!
//! `p_ij(t+1) = p_ij(t)`,
//! `p_ij(t+ω′) = (-1)^μ e^{-2πiμt} e^{2π²μ/ln q} e^{2πi(σ_i+ρ_j)} p_ij(t)`.

use serde::Serialize;

use super::local::{InfinitySolution, ZeroSolution};
use super::QDifferenceSystem;
use crate::error::Result;
use crate::matrix::Mat;
use crate::scalar::{check_precision, BigComplex};

#[derive(Clone, Debug)]
pub struct MonodromyEvaluator {
    prec: u32,
    mu: i32,
    ln_q: BigComplex,
    omega_prime: BigComplex,
    zero: ZeroSolution,
    inf: InfinitySolution,
}

impl MonodromyEvaluator {
    pub fn new(s: &QDifferenceSystem, precision: u32) -> Result<Self> {
        let prec = check_precision(precision)?;
        let zero = ZeroSolution::new(s, prec)?;
        let inf = InfinitySolution::new(s, prec)?;
        let ln_q = s.q_big(prec).ln();
        let omega_prime = BigComplex::two_pi_i(prec) / ln_q.clone();
        Ok(MonodromyEvaluator {
            prec,
            mu: s.mu(),
            ln_q,
            omega_prime,
            zero,
            inf,
        })
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn mu(&self) -> i32 {
        self.mu
    }

    pub fn n(&self) -> usize {
        self.rho().len()
    }

    pub fn rho(&self) -> &[BigComplex] {
        self.zero.rho()
    }

    pub fn sigma(&self) -> &[BigComplex] {
        self.inf.sigma()
    }

    pub fn ln_q(&self) -> &BigComplex {
        &self.ln_q
    }

    /// `ω′ = 2πi / ln q`.
    pub fn omega_prime(&self) -> &BigComplex {
        &self.omega_prime
    }

    pub fn zero_solution(&self) -> &ZeroSolution {
        &self.zero
    }

    pub fn infinity_solution(&self) -> &InfinitySolution {
        &self.inf
    }

    /// `P(t) = Y_∞(t)^{-1} Y_0(t)`.
    pub fn eval_t(&self, t: &BigComplex) -> Result<Mat<BigComplex>> {
        Ok(self.inf.eval_inverse_t(t)?.mul(&self.zero.eval_t(t)))
    }

    /// `(-1)^μ e^{-2πiμt} e^{2π²μ/ln q} e^{2πi(σ_i+ρ_j)}`.
    pub fn circuit_multiplier(&self, t: &BigComplex, i: usize, j: usize) -> BigComplex {
        let p = self.prec;
        let two_pi_i = BigComplex::two_pi_i(p);
        let pi = BigComplex::pi(p);
        let mu = self.mu as i64;
        let sign = if mu % 2 == 0 { 1 } else { -1 };
        let e = -(two_pi_i.clone() * t.clone()).mul_i64(mu)
            + (pi.clone() * pi).mul_i64(2 * mu) / self.ln_q.clone()
            + two_pi_i * (self.sigma()[i].clone() + self.rho()[j].clone());
        e.exp().mul_i64(sign)
    }

    /// Relative residuals `(periodicity, circuit)` at `t`, maximized over
    /// entries.
    pub fn relation_residuals(&self, t: &BigComplex) -> Result<(f64, f64)> {
        let p0 = self.eval_t(t)?;
        let p1 = self.eval_t(&(t.clone() + BigComplex::one(self.prec)))?;
        let pw = self.eval_t(&(t.clone() + self.omega_prime.clone()))?;
        let scale = p0.max_abs().max(f64::MIN_POSITIVE);
        let periodicity = p1.sub(&p0).max_abs() / scale;
        let n = p0.rows();
        let mut circuit = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let rhs = self.circuit_multiplier(t, i, j) * p0[(i, j)].clone();
                let lhs = pw[(i, j)].clone();
                let den = lhs.abs_f64().max(rhs.abs_f64());
                if den == 0.0 {
                    continue;
                }
                circuit = circuit.max((lhs - rhs).abs_f64() / den);
            }
        }
        Ok((periodicity, circuit))
    }
}

/// Sample points `t₀ + a/m + (b/m) ω′`, `0 ≤ a, b < m`.
pub fn parallelogram_grid(t0: &BigComplex, omega_prime: &BigComplex, per_side: usize) -> Vec<BigComplex> {
    let m = per_side.max(1) as i64;
    let mut out = Vec::with_capacity((m * m) as usize);
    for b in 0..m {
        for a in 0..m {
            let x = BigComplex::one(t0.prec()).mul_i64(a).div_i64(m);
            let y = omega_prime.mul_i64(b).div_i64(m);
            out.push(t0.clone() + x + y);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct QMonodromyReport {
    pub precision: u32,
    pub n: usize,
    pub mu: i32,
    pub q: BigComplex,
    pub omega_prime: BigComplex,
    pub rho: Vec<BigComplex>,
    pub sigma: Vec<BigComplex>,
    /// Corner of the fundamental parallelogram.
    pub t0: BigComplex,
    pub samples: Vec<(BigComplex, Mat<BigComplex>)>,
    /// `max ‖P(t+1) - P(t)‖ / ‖P(t)‖` over the samples.
    pub periodicity_residual: f64,
    /// Largest entrywise relative residual of the `t → t+ω′` relation.
    pub circuit_residual: f64,
    /// Terms used by the local series at `0` and `∞`.
    pub series_orders: (usize, usize),
    /// Principal logarithms throughout: `ρ = ln λ/ln q`, `σ = -ln λ/ln q`.
    pub branch: String,
}

/// Samples `P` on a `per_side × per_side` grid of the parallelogram at `t0`
/// and checks both relations at every sample.
pub fn monodromy_q(s: &QDifferenceSystem, t0: &BigComplex, per_side: usize, precision: u32) -> Result<QMonodromyReport> {
    let ev = MonodromyEvaluator::new(s, precision)?;
    let grid = parallelogram_grid(&t0.with_prec(ev.prec), &ev.omega_prime, per_side);
    let mut samples = Vec::with_capacity(grid.len());
    let mut periodicity = 0.0f64;
    let mut circuit = 0.0f64;
    for t in grid {
        let (a, b) = ev.relation_residuals(&t)?;
        periodicity = periodicity.max(a);
        circuit = circuit.max(b);
        samples.push((t.clone(), ev.eval_t(&t)?));
    }
    Ok(QMonodromyReport {
        precision: ev.prec,
        n: ev.n(),
        mu: ev.mu,
        q: s.q_big(ev.prec),
        omega_prime: ev.omega_prime.clone(),
        rho: ev.rho().to_vec(),
        sigma: ev.sigma().to_vec(),
        t0: t0.with_prec(ev.prec),
        samples,
        periodicity_residual: periodicity,
        circuit_residual: circuit,
        series_orders: (ev.zero.series_order(), ev.inf.series_order()),
        branch: "principal ln for q, rho and sigma; t = ln z / ln q".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{c, mu_one_instance};
    use super::*;

    #[test]
    fn constant_diagonal_is_identity() {
        let s = QDifferenceSystem::from_coeffs(c(2, 0), &[(0, Mat::diag_from(&[c(2, 0), c(3, 0)]))]).unwrap();
        let r = monodromy_q(&s, &BigComplex::from_f64(128, -0.5, -0.3), 3, 128).unwrap();
        for (_, p) in &r.samples {
            assert!(p.sub(&Mat::identity(2).to_big(128)).max_abs() < 1e-20);
        }
    }

    #[test]
    fn relations_hold_mu_one() {
        let s = mu_one_instance();
        let r = monodromy_q(&s, &BigComplex::from_f64(128, -0.45, -4.1), 3, 128).unwrap();
        assert!(r.periodicity_residual < 1e-10, "{:e}", r.periodicity_residual);
        assert!(r.circuit_residual < 1e-8, "{:e}", r.circuit_residual);
        assert!(r.samples.iter().all(|(_, p)| p.max_abs() > 1e-6));
    }
}
