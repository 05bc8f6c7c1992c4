//! Gauge transformations `Y' = M Y` of difference and q-difference systems
//! and the normalization of characteristic constants.
//!
//! A gauge acts on the coefficient by `C'(z) = M(s z) C(z) M(z)^{-1}` where
//! `s z = z + 1` or `s z = q z`.

mod leading;
mod pipeline;
mod reduction;
mod sauvage;

pub use leading::{normalize_leading, shift_constant, ShiftOutcome};
pub use pipeline::{
    compare_monodromy_difference, compare_monodromy_q, normalize_system, replay, GaugeLog, NormalizationOutcome,
};
pub use reduction::{reduce_norm_step, ReductionCase, ReductionRecord, ReductionState};
pub use sauvage::{birkhoff_split, row_reduce, sauvage_factorize, BirkhoffSplit, SauvageFactorization};

use serde::{Deserialize, Serialize};

use crate::difference::DifferenceSystem;
use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat, RationalMat};
use crate::poly::LaurentPoly;
use crate::qdiff::QDifferenceSystem;
use crate::scalar::ExactComplex;

/// The independent-variable shift of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shift {
    /// `z → z + 1`.
    Difference,
    /// `z → q z`.
    #[serde(rename = "qdifference")]
    Q { q: ExactComplex },
}

impl Shift {
    pub fn name(&self) -> &'static str {
        match self {
            Shift::Difference => "difference",
            Shift::Q { .. } => "qdifference",
        }
    }

    /// `M(s z)`.
    pub fn apply(&self, m: &RationalMat) -> RationalMat {
        match self {
            Shift::Difference => m.translate(&ExactComplex::one()),
            Shift::Q { q } => m.dilate(q),
        }
    }

    /// `s(a)`.
    pub fn point(&self, a: &ExactComplex) -> ExactComplex {
        match self {
            Shift::Difference => a + &ExactComplex::one(),
            Shift::Q { q } => q * a,
        }
    }

    /// `s^{-1}(a)`.
    pub fn preimage(&self, a: &ExactComplex) -> ExactComplex {
        match self {
            Shift::Difference => a - &ExactComplex::one(),
            Shift::Q { q } => a / q,
        }
    }

    /// Leading coefficient of `(s z)^d` at infinity.
    pub fn leading_power(&self, d: i32) -> ExactComplex {
        match self {
            Shift::Difference => ExactComplex::one(),
            Shift::Q { q } => q.powi(d as i64),
        }
    }

    /// Whether `a` and `b` lie on one orbit of `s` (differ by an integer,
    /// or have ratio an integer power of `q`).
    pub fn congruent(&self, a: &ExactComplex, b: &ExactComplex) -> bool {
        match self {
            Shift::Difference => (a - b).is_integer(),
            Shift::Q { q } => {
                if a.is_zero() || b.is_zero() {
                    return a.is_zero() && b.is_zero();
                }
                let ratio = a / b;
                // |ratio| = |q|^k fixes the only candidate k.
                let lr = ratio.to_big(64).abs_f64().ln();
                let lq = q.to_big(64).abs_f64().ln();
                let k = (lr / lq).round();
                k.is_finite() && k.abs() < 1e6 && q.powi(k as i64) == ratio
            }
        }
    }
}

/// A system `Y(s z) = C(z) Y(z)` with an exact Laurent coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub shift: Shift,
    pub coeff: PolyMat,
}

impl System {
    pub fn new(shift: Shift, coeff: PolyMat) -> Result<Self> {
        if coeff.rows() != coeff.cols() || coeff.rows() == 0 {
            return Err(Error::InvalidInput("coefficient matrix must be square and nonempty".into()));
        }
        if coeff.det().is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        Ok(System { shift, coeff })
    }

    pub fn n(&self) -> usize {
        self.coeff.rows()
    }

    /// Top power `μ` or `r`.
    pub fn top(&self) -> i32 {
        self.coeff.high().unwrap_or(0)
    }

    pub fn low(&self) -> i32 {
        self.coeff.low().unwrap_or(0)
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeff.is_polynomial()
    }

    pub fn leading(&self) -> Mat {
        self.coeff.coeff(self.top())
    }

    pub fn det(&self) -> LaurentPoly {
        self.coeff.det()
    }

    pub fn to_difference(&self) -> Result<DifferenceSystem> {
        match self.shift {
            Shift::Difference => DifferenceSystem::new_laurent(self.coeff.clone()),
            _ => Err(Error::InvalidInput("not a difference system".into())),
        }
    }

    pub fn to_q(&self) -> Result<QDifferenceSystem> {
        match &self.shift {
            Shift::Q { q } => QDifferenceSystem::new(q.clone(), self.coeff.clone()),
            _ => Err(Error::InvalidInput("not a q-difference system".into())),
        }
    }
}

impl From<&DifferenceSystem> for System {
    fn from(s: &DifferenceSystem) -> Self {
        System {
            shift: Shift::Difference,
            coeff: s.a().clone(),
        }
    }
}

impl From<&QDifferenceSystem> for System {
    fn from(s: &QDifferenceSystem) -> Self {
        System {
            shift: Shift::Q { q: s.q().clone() },
            coeff: s.matrix().clone(),
        }
    }
}

/// `C' = M(s z) C M^{-1}`, exactly. The result must again be a Laurent
/// matrix; the determinant identity `det C' · det M = det M(s z) · det C`
/// is checked.
pub fn apply_gauge(m: &RationalMat, s: &System) -> Result<System> {
    if m.rows() != s.n() {
        return Err(Error::InvalidInput(format!(
            "gauge is {}x{} but the system has dimension {}",
            m.rows(),
            m.rows(),
            s.n()
        )));
    }
    let minv = m
        .inverse()
        .map_err(|_| Error::SingularGauge("det M vanishes identically".into()))?;
    let shifted = s.shift.apply(m);
    let c = RationalMat::from_laurent(&s.coeff);
    let out = shifted.mul(&c).mul(&minv);
    let coeff = out.to_laurent().ok_or_else(|| {
        Error::SingularGauge(format!(
            "transformed coefficient has poles off the origin, denominator {:?}",
            out.den
        ))
    })?;
    let (mn, md) = m.det();
    let (sn, sd) = shifted.det();
    let lhs = &(&coeff.det() * &sd) * &mn;
    let rhs = &(&sn * &md) * &s.coeff.det();
    if lhs != rhs {
        return Err(Error::SingularGauge("determinant identity failed".into()));
    }
    Ok(System {
        shift: s.shift.clone(),
        coeff,
    })
}

/// One elementary gauge factor, with exact parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum GaugeStep {
    /// A constant invertible matrix.
    Constant { matrix: Mat },
    /// `diag(z^{e_1}, …, z^{e_n})`.
    ZPower { exponents: Vec<i32> },
    /// `diag((z - a)^{e_1}, …, (z - a)^{e_n})`.
    LinearPower { point: ExactComplex, exponents: Vec<i32> },
    /// A Laurent matrix.
    Laurent { matrix: PolyMat },
    /// Row permutation: component `i` of the new unknown is component
    /// `perm[i]` of the old one.
    Permutation { perm: Vec<usize> },
}

impl GaugeStep {
    pub fn matrix(&self) -> RationalMat {
        match self {
            GaugeStep::Constant { matrix } => RationalMat::from_laurent(&PolyMat::constant(matrix)),
            GaugeStep::ZPower { exponents } => RationalMat::from_laurent(&PolyMat::z_power_diag(exponents)),
            GaugeStep::LinearPower { point, exponents } => {
                let lin = LaurentPoly::linear(point);
                let shift = exponents.iter().map(|&e| (-e).max(0)).max().unwrap_or(0);
                let diag: Vec<LaurentPoly> = exponents.iter().map(|&e| poly_pow(&lin, (e + shift) as u32)).collect();
                RationalMat::new(PolyMat::diag(&diag), poly_pow(&lin, shift as u32))
            }
            GaugeStep::Laurent { matrix } => RationalMat::from_laurent(matrix),
            GaugeStep::Permutation { perm } => {
                let n = perm.len();
                let p = Mat::from_fn(n, n, |i, j| {
                    if perm[i] == j {
                        ExactComplex::one()
                    } else {
                        ExactComplex::zero()
                    }
                });
                RationalMat::from_laurent(&PolyMat::constant(&p))
            }
        }
    }

    pub fn apply(&self, s: &System) -> Result<System> {
        match self {
            // Cheap exact paths for the constant factors.
            GaugeStep::Permutation { perm } => Ok(System {
                shift: s.shift.clone(),
                coeff: s.coeff.permute_rows(perm).permute_cols(perm),
            }),
            _ => apply_gauge(&self.matrix(), s),
        }
    }
}

pub(crate) fn poly_pow(p: &LaurentPoly, e: u32) -> LaurentPoly {
    let mut out = LaurentPoly::one();
    for _ in 0..e {
        out = &out * p;
    }
    out
}

/// Product `M_k ⋯ M_1` of a sequence of steps applied in order.
pub fn compose(steps: &[GaugeStep], n: usize) -> RationalMat {
    let mut acc = RationalMat::from_laurent(&PolyMat::identity(n));
    for s in steps {
        acc = s.matrix().mul(&acc);
    }
    acc
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn c(re: i64, im: i64) -> ExactComplex {
        ExactComplex::new(re, im)
    }

    pub(crate) fn mu_one_q() -> System {
        System::from(&crate::qdiff::tests::mu_one_instance())
    }

    /// `A(z) = diag(1, i) z + [[1, 1], [3/4, (1-i)/2]]`, with
    /// `det A = i (z - 1/2)(z + 1 - i/2)`.
    pub(crate) fn exact_root_difference() -> System {
        let a0 = Mat::from_rows(vec![
            vec![c(1, 0), c(1, 0)],
            vec![ExactComplex::ratio(3, 4), ExactComplex::new(rug::Rational::from((1, 2)), rug::Rational::from((-1, 2)))],
        ]);
        let a1 = Mat::diag_from(&[c(1, 0), c(0, 1)]);
        System::new(Shift::Difference, PolyMat::from_coeff_mats(2, 2, &[(0, a0), (1, a1)])).unwrap()
    }

    #[test]
    fn identity_gauge_is_neutral() {
        let s = mu_one_q();
        let out = apply_gauge(&RationalMat::from_laurent(&PolyMat::identity(2)), &s).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn scalar_z_gauge_on_difference() {
        // M = z: A' = (z+1) A / z.
        let a = PolyMat::from_coeff_mats(1, 1, &[(0, Mat::diag_from(&[c(3, 0)])), (1, Mat::identity(1))]);
        let s = System::new(Shift::Difference, a.clone()).unwrap();
        let out = GaugeStep::ZPower { exponents: vec![1] }.apply(&s).unwrap();
        let expected = a.mul(&PolyMat::from_coeff_mats(1, 1, &[(0, Mat::identity(1)), (-1, Mat::identity(1))]));
        assert_eq!(out.coeff, expected);
    }

    #[test]
    fn constant_conjugation_keeps_det() {
        let s = mu_one_q();
        let t = Mat::from_rows(vec![vec![c(2, 1), c(1, 0)], vec![c(0, -3), c(1, 1)]]);
        let out = GaugeStep::Constant { matrix: t }.apply(&s).unwrap();
        assert_eq!(out.det(), s.det());
    }

    #[test]
    fn composition_is_functorial() {
        let s = exact_root_difference();
        let g1 = GaugeStep::ZPower { exponents: vec![1, 0] };
        let g2 = GaugeStep::LinearPower { point: c(1, 0), exponents: vec![0, -1] };
        let g3 = GaugeStep::Constant {
            matrix: Mat::from_rows(vec![vec![c(1, 0), c(0, 0)], vec![c(2, -1), c(1, 0)]]),
        };
        let stepwise = g3.apply(&g2.apply(&g1.apply(&s).unwrap()).unwrap()).unwrap();
        let at_once = apply_gauge(&compose(&[g1, g2, g3], 2), &s).unwrap();
        assert_eq!(stepwise, at_once);
    }

    #[test]
    fn pole_off_origin_rejected() {
        // M = z^{-1} in the difference case puts a pole at z = -1.
        let s = exact_root_difference();
        let r = GaugeStep::ZPower { exponents: vec![-1, 0] }.apply(&s);
        assert!(matches!(r, Err(Error::SingularGauge(_))));
    }

    #[test]
    fn congruence() {
        let q = Shift::Q { q: c(2, 0) };
        assert!(q.congruent(&c(3, 1), &ExactComplex::new(rug::Rational::from((3, 4)), rug::Rational::from((1, 4)))));
        assert!(!q.congruent(&c(3, 1), &c(3, -1)));
        assert!(Shift::Difference.congruent(&c(3, 1), &c(-2, 1)));
        assert!(!Shift::Difference.congruent(&c(3, 1), &c(3, 0)));
    }

    #[test]
    fn step_log_roundtrip() {
        let steps = vec![
            GaugeStep::LinearPower { point: ExactComplex::ratio(1, 3), exponents: vec![-1, 0] },
            GaugeStep::Permutation { perm: vec![1, 0] },
        ];
        let text = serde_json::to_string(&steps).unwrap();
        let back: Vec<GaugeStep> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, steps);
    }
}
