use serde::Serialize;

use super::DifferenceSystem;
use crate::error::{Error, Result};
use crate::scalar::ExactComplex;

#[derive(Clone, Debug, Serialize)]
pub struct FuchsReport {
    pub d_sum: ExactComplex,
    /// Sum of the roots of `det A`, from Vieta.
    pub root_sum: ExactComplex,
    /// `d_sum + root_sum`; zero for every valid system.
    pub residual: ExactComplex,
    pub det_degree: i32,
}

/// Exact check of `Σ d_i + Σ q_j = 0`, where `q_j` are the roots of
/// `det A(z)`.
pub fn verify_fuchs(s: &DifferenceSystem) -> Result<FuchsReport> {
    let det = s.a().det();
    if det.is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let top = det.high().unwrap();
    let lead = det.leading().unwrap().clone();
    let below = det.coeff(top - 1).cloned().unwrap_or_else(ExactComplex::zero);
    let root_sum = -(&below / &lead);
    let d_sum = s.d().into_iter().fold(ExactComplex::zero(), |a, b| a + b);
    Ok(FuchsReport {
        residual: &d_sum + &root_sum,
        d_sum,
        root_sum,
        det_degree: top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difference::tests::worked_instance;
    use crate::matrix::Mat;

    #[test]
    fn worked_instance_balances() {
        let rep = verify_fuchs(&worked_instance()).unwrap();
        assert_eq!(rep.d_sum, ExactComplex::real(5));
        assert_eq!(rep.root_sum, ExactComplex::real(-5));
        assert!(rep.residual.is_zero());
        assert_eq!(rep.residual.to_string(), "0");
    }

    #[test]
    fn pure_diagonal() {
        let a1 = Mat::diag_from(&[ExactComplex::real(1), ExactComplex::i()]);
        let s = DifferenceSystem::from_coeffs(&[Mat::zeros(2, 2), a1]).unwrap();
        assert!(verify_fuchs(&s).unwrap().residual.is_zero());
    }
}
