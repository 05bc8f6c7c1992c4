//! Linear q-difference systems `Y(qz) = Q(z) Y(z)` with `|q| > 1`.
//!
//! Numeric work happens in the variable `t = log_q z` with the principal
//! logarithm of `q`: `z = e^{t ln q}`, so `z → qz` is `t → t + 1` and a
//! positive circuit around the origin is `t → t + ω′`, `ω′ = 2πi/ln q`.

mod local;
mod monodromy;
mod rationalize;
mod scalar_solution;
mod sigma_fit;

pub use local::{
    local_series_q, local_series_q_in, recursion_residuals, InfinitySolution, QLocalSolution, Site, ZeroSolution,
};
pub use monodromy::{monodromy_q, parallelogram_grid, MonodromyEvaluator, QMonodromyReport};
pub use rationalize::{rationalize_q, QRationalized};
pub use scalar_solution::{scalar_q_solution, theta_exact, ScalarKind, ScalarQSolution};
pub use sigma_fit::{det_zeros, fit_sigma_form, fit_sigma_form_entry, DetZeros, EntryTarget, SigmaFit};

use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat};
use crate::poly::LaurentPoly;
use crate::scalar::{BigComplex, ExactComplex, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct QDifferenceSystem {
    q: ExactComplex,
    qm: PolyMat,
    mu: i32,
    low: i32,
}

impl QDifferenceSystem {
    /// Validates `|q| > 1`, squareness and `det Q ≢ 0`.
    pub fn new(q: ExactComplex, qm: PolyMat) -> Result<Self> {
        if qm.rows() != qm.cols() || qm.rows() == 0 {
            return Err(Error::InvalidInput("coefficient matrix must be square and nonempty".into()));
        }
        if q.norm_sqr() <= 1 {
            return Err(Error::InvalidInput(format!("need |q| > 1, got q = {q}")));
        }
        if qm.det().is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        let mu = qm.high().expect("nonzero determinant");
        let low = qm.low().expect("nonzero determinant");
        Ok(QDifferenceSystem { q, qm, mu, low })
    }

    /// Builds `Q(z) = Σ_j Q_j z^j` from `(j, Q_j)` pairs.
    pub fn from_coeffs(q: ExactComplex, coeffs: &[(i32, Mat)]) -> Result<Self> {
        let n = coeffs.first().map_or(0, |(_, m)| m.rows());
        QDifferenceSystem::new(q, PolyMat::from_coeff_mats(n, n, coeffs))
    }

    pub fn n(&self) -> usize {
        self.qm.rows()
    }

    pub fn q(&self) -> &ExactComplex {
        &self.q
    }

    pub fn q_big(&self, prec: u32) -> BigComplex {
        self.q.to_big(prec)
    }

    /// Top degree `μ`.
    pub fn mu(&self) -> i32 {
        self.mu
    }

    /// Lowest exponent `-s` (zero or positive for polynomial `Q`).
    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn matrix(&self) -> &PolyMat {
        &self.qm
    }

    pub fn coeff(&self, j: i32) -> Mat {
        self.qm.coeff(j)
    }

    pub fn leading(&self) -> Mat {
        self.qm.coeff(self.mu)
    }

    pub fn is_polynomial(&self) -> bool {
        self.low >= 0
    }

    pub fn det(&self) -> LaurentPoly {
        self.qm.det()
    }

    /// True when `Q_μ` is diagonal, i.e. `Q_μ = q^{-diag σ}` and `B_0 = I`.
    pub fn is_normalized(&self) -> bool {
        self.leading().is_diagonal()
    }

    /// `σ_i = -ln (Q_μ)_{ii} / ln q` on the principal branch; requires a
    /// diagonal leading coefficient.
    pub fn sigma(&self, prec: u32) -> Result<Vec<BigComplex>> {
        if !self.is_normalized() {
            return Err(Error::HypothesisViolated("leading coefficient Q_mu is not diagonal".into()));
        }
        let ln_q = self.q_big(prec).ln();
        Ok(self
            .leading()
            .diagonal()
            .iter()
            .map(|x| -(x.to_big(prec).ln() / ln_q.clone()))
            .collect())
    }

    /// Diagnostics for the hypotheses used by the local theory: nonsingular
    /// `Q_0` on a polynomial system and non-resonant spectra at both sites.
    pub fn hypothesis_violations(&self, prec: u32) -> Vec<String> {
        let mut out = Vec::new();
        let q = self.q_big(prec);
        if !self.is_polynomial() {
            out.push(format!("Q has negative powers down to z^{}", self.low));
        } else if self.coeff(0).det().is_zero() {
            out.push("det Q_0 = 0".into());
        } else if let Ok(vals) = crate::roots::eigenvalues(&self.coeff(0).to_big(prec)) {
            if let Some((i, j)) = q_congruent_pair(&vals, &q) {
                out.push(format!("eigenvalues {i} and {j} of Q_0 differ by an integer power of q"));
            }
        }
        if let Ok(vals) = crate::roots::eigenvalues(&self.leading().to_big(prec)) {
            if let Some((i, j)) = q_congruent_pair(&vals, &q) {
                out.push(format!("eigenvalues {i} and {j} of Q_mu differ by an integer power of q"));
            }
        }
        out
    }
}

/// Margin used when deciding whether a ratio is an integer power of `q`.
pub const CONGRUENCE_MARGIN: f64 = 1e-6;

/// Distance of `log_q(a/b)` from the nearest integer, measured in the
/// `t`-plane. Zero means `a/b ∈ q^ℤ`.
pub fn q_power_distance(a: &BigComplex, b: &BigComplex, q: &BigComplex) -> f64 {
    let ratio = a.clone() / b.clone();
    let t = ratio.ln() / q.ln();
    // a/b = q^k iff t ≡ k modulo ω′ = 2πi/ln q.
    let omega_prime = BigComplex::two_pi_i(t.prec()) / q.ln();
    let wi = omega_prime.im().to_f64();
    let wr = omega_prime.re().to_f64();
    let y = t.im().to_f64() / wi;
    let x = t.re().to_f64() - y * wr;
    let dy = y - y.round();
    let dx = x - x.round();
    (dx * dx + dy * dy).sqrt()
}

/// First pair `(i, j)` whose ratio lies within the margin of `q^ℤ`.
pub fn q_congruent_pair(vals: &[BigComplex], q: &BigComplex) -> Option<(usize, usize)> {
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            if vals[i].is_zero() || vals[j].is_zero() {
                continue;
            }
            if q_power_distance(&vals[i], &vals[j], q) < CONGRUENCE_MARGIN {
                return Some((i, j));
            }
        }
    }
    None
}
