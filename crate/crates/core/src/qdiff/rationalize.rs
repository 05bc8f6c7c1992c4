//! Polynomial form of a rational q-difference system.
//!
//! With common denominator `(z-a_1)⋯(z-a_l)` the substitution
//! `Y = g_1⋯g_l Ŷ`, `g_i(qz) = (z-a_i) g_i(z)`, turns `Ŷ(qz) = Q̂(z)Ŷ(z)`
//! into `Y(qz) = Π(z-a_i) Q̂(z) Y(z)`.

use super::scalar_solution::{scalar_q_solution, ScalarKind, ScalarQSolution};
use super::QDifferenceSystem;
use crate::difference::{rationalize_difference, RationalEntry};
use crate::error::Result;
use crate::scalar::{BigComplex, ExactComplex};

#[derive(Clone, Debug)]
pub struct QRationalized {
    pub system: QDifferenceSystem,
    /// Roots `a_i` of the common denominator, with repetition.
    pub denominator: Vec<ExactComplex>,
}

/// Clears the denominators of `Q̂` and records the scalar gauge.
pub fn rationalize_q(raw: &[Vec<RationalEntry>], q: &ExactComplex) -> Result<QRationalized> {
    let r = rationalize_difference(raw)?;
    let system = QDifferenceSystem::new(q.clone(), r.matrix)?;
    Ok(QRationalized {
        system,
        denominator: r.denominator,
    })
}

impl QRationalized {
    /// The scalar factors `g_i` of the gauge.
    pub fn gauge(&self, kind: ScalarKind, precision: u32) -> Result<Vec<ScalarQSolution>> {
        let q = self.system.q_big(precision);
        self.denominator
            .iter()
            .map(|a| scalar_q_solution(&a.to_big(precision), &q, kind, precision))
            .collect()
    }

    /// `Π g_i(t)`, the factor relating solutions: `Y = (Π g_i) Ŷ`.
    pub fn gauge_factor(&self, t: &BigComplex, kind: ScalarKind, precision: u32) -> Result<BigComplex> {
        let mut acc = BigComplex::one(precision);
        for g in self.gauge(kind, precision)? {
            acc = acc * g.eval_t(t)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::LaurentPoly;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    fn poly(coeffs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(0, coeffs.iter().map(|&v| c(v)))
    }

    #[test]
    fn passthrough_and_single_pole() {
        let raw = vec![vec![RationalEntry::polynomial(poly(&[3, 1]))]];
        let out = rationalize_q(&raw, &c(2)).unwrap();
        assert!(out.denominator.is_empty());
        assert_eq!(out.system.mu(), 1);

        let raw = vec![vec![RationalEntry { num: poly(&[1]), den_roots: vec![c(1)] }]];
        let out = rationalize_q(&raw, &c(2)).unwrap();
        assert_eq!(out.system.matrix()[(0, 0)], poly(&[1]));
        assert_eq!(out.denominator, vec![c(1)]);
    }

    #[test]
    fn two_poles_raise_degree() {
        let raw = vec![
            vec![
                RationalEntry { num: poly(&[0, 1]), den_roots: vec![c(3)] },
                RationalEntry::polynomial(poly(&[1])),
            ],
            vec![
                RationalEntry::polynomial(poly(&[0])),
                RationalEntry { num: poly(&[1]), den_roots: vec![c(5)] },
            ],
        ];
        let out = rationalize_q(&raw, &c(2)).unwrap();
        assert_eq!(out.denominator.len(), 2);
        assert_eq!(out.system.mu(), 2);
    }

    #[test]
    fn gauge_recovers_rational_solution() {
        // Q̂ = 1/(z-3): ŷ = y/g with y(qz) = y(z) (Q = 1) means ŷ = 1/g.
        let raw = vec![vec![RationalEntry { num: poly(&[1]), den_roots: vec![c(3)] }]];
        let out = rationalize_q(&raw, &c(2)).unwrap();
        let prec = 128;
        let t = BigComplex::from_f64(prec, 0.4, 0.2);
        let t1 = t.clone() + BigComplex::one(prec);
        let z = (t.clone() * BigComplex::from_f64(prec, 2.0, 0.0).ln()).exp();
        let yhat = |t: &BigComplex| BigComplex::one(prec) / out.gauge_factor(t, ScalarKind::Zero, prec).unwrap();
        let lhs = yhat(&t1);
        let rhs = yhat(&t) / (z - BigComplex::from_f64(prec, 3.0, 0.0));
        assert!((lhs.clone() - rhs).abs_f64() / lhs.abs_f64() < 1e-25);
    }
}
