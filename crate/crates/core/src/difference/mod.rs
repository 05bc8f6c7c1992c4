//! Linear difference systems `Y(z+1) = A(z) Y(z)` with polynomial `A`.

mod formal;
mod fuchs;
mod genuine;
mod monodromy;
mod rationalize;

pub use formal::{formal_solution_difference, formal_solution_difference_in, series_residual, substitution_residuals, DiffFormalSolution};
pub use fuchs::{verify_fuchs, FuchsReport};
pub use genuine::{genuine_solution, Evaluation, GenuineSolutionSample, GenuineSolver, Side};
pub use monodromy::{fit_difference_entry, monodromy_difference, monodromy_samples_difference, DiffMonodromyReport, EntryFit};
pub use rationalize::{rationalize_difference, RationalEntry, Rationalized};

use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat};
use crate::scalar::ExactComplex;

#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSystem {
    a: PolyMat,
    r: i32,
    rho: Vec<ExactComplex>,
}

impl DifferenceSystem {
    /// Validates the structural requirements: square polynomial matrix
    /// whose top coefficient `A_r` is diagonal and invertible.
    ///
    /// The non-real-ratio hypothesis on the `ρ_i` is reported separately by
    /// [`DifferenceSystem::hypothesis_violations`].
    pub fn new(a: PolyMat) -> Result<Self> {
        if !a.is_polynomial() {
            return Err(Error::InvalidInput("difference coefficient must be polynomial".into()));
        }
        DifferenceSystem::new_laurent(a)
    }

    /// As [`DifferenceSystem::new`] but allowing negative powers of `z`,
    /// as produced by intermediate gauge transformations. Formal solutions
    /// and the `d_k` are defined; genuine solutions need a polynomial `A`.
    pub fn new_laurent(a: PolyMat) -> Result<Self> {
        if a.rows() != a.cols() || a.rows() == 0 {
            return Err(Error::InvalidInput("coefficient matrix must be square and nonempty".into()));
        }
        if a.det().is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        let r = a.high().ok_or(Error::ZeroDeterminant)?;
        let top = a.coeff(r);
        if !top.is_diagonal() {
            return Err(Error::HypothesisViolated(
                "leading coefficient A_r must be diagonal".into(),
            ));
        }
        let rho = top.diagonal();
        if rho.iter().any(|x| x.is_zero()) {
            return Err(Error::HypothesisViolated("product of the ρ_i must be nonzero".into()));
        }
        Ok(DifferenceSystem { a, r, rho })
    }

    /// Builds the system from `A_0, …, A_r`.
    pub fn from_coeffs(coeffs: &[Mat]) -> Result<Self> {
        let n = coeffs.first().map_or(0, |m| m.rows());
        let pairs: Vec<(i32, Mat)> = coeffs.iter().cloned().enumerate().map(|(e, m)| (e as i32, m)).collect();
        DifferenceSystem::new(PolyMat::from_coeff_mats(n, n, &pairs))
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn r(&self) -> i32 {
        self.r
    }

    pub fn a(&self) -> &PolyMat {
        &self.a
    }

    pub fn rho(&self) -> &[ExactComplex] {
        &self.rho
    }

    /// Lowest power of `z` present; negative for Laurent systems.
    pub fn low(&self) -> i32 {
        self.a.low().unwrap_or(0)
    }

    pub fn is_polynomial(&self) -> bool {
        self.a.is_polynomial()
    }

    pub fn coeff(&self, j: i32) -> Mat {
        self.a.coeff(j)
    }

    /// Characteristic constants `d_k = (A_{r-1})_{kk} / ρ_k`.
    pub fn d(&self) -> Vec<ExactComplex> {
        let below = self.a.coeff(self.r - 1);
        (0..self.n()).map(|k| &below[(k, k)] / &self.rho[k]).collect()
    }

    /// Violations of the hypotheses `ρ_i/ρ_j ∉ ℝ` (for `i ≠ j`).
    pub fn hypothesis_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let ratio = &self.rho[i] / &self.rho[j];
                if ratio.is_real() {
                    out.push(format!("rho_{i}/rho_{j} = {ratio} is real"));
                }
            }
        }
        out
    }

    /// Errors unless every hypothesis of the genuine-solution theory holds.
    pub fn require_hypotheses(&self) -> Result<()> {
        match self.hypothesis_violations().first() {
            Some(v) => Err(Error::HypothesisViolated(v.clone())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    pub(crate) fn worked_instance() -> DifferenceSystem {
        let a0 = Mat::from_rows(vec![vec![c(2), c(1)], vec![c(1), ExactComplex::new(0, 3)]]);
        let a1 = Mat::diag_from(&[c(1), ExactComplex::i()]);
        DifferenceSystem::from_coeffs(&[a0, a1]).unwrap()
    }

    #[test]
    fn d_from_diagonal() {
        let s = worked_instance();
        assert_eq!(s.d(), vec![c(2), c(3)]);
        assert!(s.hypothesis_violations().is_empty());
    }

    #[test]
    fn real_ratio_flagged() {
        let s = DifferenceSystem::from_coeffs(&[Mat::diag_from(&[c(1), c(2)])]).unwrap();
        assert_eq!(s.hypothesis_violations().len(), 1);
        assert!(s.require_hypotheses().is_err());
    }

    #[test]
    fn non_diagonal_top_rejected() {
        let top = Mat::from_rows(vec![vec![c(1), c(1)], vec![c(0), c(1)]]);
        assert!(DifferenceSystem::from_coeffs(&[top]).is_err());
    }
}
