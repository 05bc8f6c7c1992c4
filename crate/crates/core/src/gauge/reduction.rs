//! One step of the reduction of `‖D‖₁` for a pair of coefficients related
//! by `I(z) = (s z)^D Z(z) z^{-D}`: `Z` polynomial on the zero side, `I` of
//! top degree at most `μ` with invertible leading coefficient.

use serde::Serialize;

use super::{GaugeStep, Shift};
use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat, RationalMat};
use crate::roots::exact_roots;
use crate::scalar::ExactComplex;

#[derive(Clone, Debug)]
pub struct ReductionState {
    pub shift: Shift,
    /// Zero-side coefficient, polynomial.
    pub zero: PolyMat,
    /// Exponent vector, descending.
    pub d: Vec<i32>,
    /// Bound `μ` on the top degree of the infinity side.
    pub top: i32,
    pub steps: usize,
    /// Roots of `det Z`, pairwise non-congruent.
    pub roots: Vec<ExactComplex>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionCase {
    /// Some `d_i < 0`: a row combination vanishing at a root.
    Rows,
    /// All `d_i ≥ 0`: a column combination vanishing at a root.
    Columns,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionRecord {
    pub case: ReductionCase,
    /// Root `α` of `det Z` used.
    pub root: ExactComplex,
    /// Index whose exponent moved.
    pub index: usize,
    pub norm_before: i32,
    pub norm_after: i32,
    /// Zero-side gauge factors, in order.
    pub steps: Vec<GaugeStep>,
}

impl ReductionState {
    /// Sorts `d` descending (permuting `Z` to match) and validates the
    /// pair. The permutation applied, if any, is returned as a step.
    pub fn new(shift: Shift, zero: PolyMat, d: Vec<i32>, top: i32) -> Result<(Self, Option<GaugeStep>)> {
        let n = zero.rows();
        if d.len() != n {
            return Err(Error::InvalidInput(format!("exponent vector has {} entries, expected {n}", d.len())));
        }
        if !zero.is_polynomial() {
            return Err(Error::InvalidInput("zero-side coefficient must be polynomial".into()));
        }
        let (zero, d, step) = sort_descending(zero, d);
        let roots = checked_roots(&shift, &zero)?;
        let state = ReductionState {
            shift,
            zero,
            d,
            top,
            steps: 0,
            roots,
        };
        state.check_infinity()?;
        Ok((state, step))
    }

    pub fn norm(&self) -> i32 {
        self.d.iter().map(|x| x.abs()).sum()
    }

    /// `I = (s z)^D Z z^{-D}`.
    pub fn infinity_side(&self) -> RationalMat {
        super::pipeline::infinity_of(&self.shift, &self.zero, &self.d)
    }

    /// Degree at infinity of each entry of `I` and the coefficient of
    /// `z^top`.
    fn infinity_leading(&self) -> Result<Mat> {
        let n = self.d.len();
        let mut lead = Mat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let p = &self.zero[(a, b)];
                let Some(h) = p.high() else { continue };
                let deg = h + self.d[a] - self.d[b];
                if deg > self.top {
                    return Err(Error::NormalizationLost(format!(
                        "infinity side entry ({a},{b}) has degree {deg} above {}",
                        self.top
                    )));
                }
                if deg == self.top {
                    lead[(a, b)] = p.leading().unwrap() * &self.shift.leading_power(self.d[a]);
                }
            }
        }
        Ok(lead)
    }

    fn check_infinity(&self) -> Result<()> {
        if self.infinity_leading()?.det().is_zero() {
            return Err(Error::NormalizationLost("infinity side lost its invertible leading coefficient".into()));
        }
        Ok(())
    }
}

fn sort_descending(zero: PolyMat, d: Vec<i32>) -> (PolyMat, Vec<i32>, Option<GaugeStep>) {
    let mut perm: Vec<usize> = (0..d.len()).collect();
    perm.sort_by_key(|&i| (-d[i], i));
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return (zero, d, None);
    }
    let d = perm.iter().map(|&i| d[i]).collect();
    let zero = zero.permute_rows(&perm).permute_cols(&perm);
    (zero, d, Some(GaugeStep::Permutation { perm }))
}

/// Roots of `det Z`, simple and pairwise non-congruent, ordered by modulus
/// then lexicographically.
fn checked_roots(shift: &Shift, zero: &PolyMat) -> Result<Vec<ExactComplex>> {
    let det = zero.det();
    if det.is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let (found, low) = exact_roots(&det)?;
    let mut all = found;
    if low > 0 {
        all.push((ExactComplex::zero(), low as usize));
    }
    let mut roots: Vec<ExactComplex> = Vec::new();
    for (r, mult) in all {
        if mult > 1 {
            return Err(Error::HypothesisViolated(format!("det Z has a multiple root at {r}")));
        }
        roots.push(r);
    }
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            if shift.congruent(&roots[i], &roots[j]) {
                return Err(Error::HypothesisViolated(format!(
                    "roots {} and {} of det Z are congruent under the shift",
                    roots[i], roots[j]
                )));
            }
        }
    }
    roots.sort_by(|a, b| {
        a.norm_sqr()
            .partial_cmp(&b.norm_sqr())
            .unwrap()
            .then_with(|| a.lex_cmp(b))
    });
    Ok(roots)
}

/// Lowers `‖D‖₁` by exactly one.
///
/// With some `d_i < 0`, a left null vector `s` of `Z(α)` whose last nonzero
/// entry `i` has `d_i < 0` gives `H = I + Σ_j (s_j/s_i) E_ij` and
/// `Z̄ = (s z - β)^{-e_i} H Z H^{-1} (z - β)^{e_i}` with `β = s(α)`,
/// `D̄ = D + e_i`. Otherwise a right null vector with first nonzero entry
/// `i`, `d_i > 0`, gives `H = I + Σ_j (s_j/s_i) E_ji` and
/// `Z̄ = (s z - α)^{e_i} H^{-1} Z H (z - α)^{-e_i}`, `D̄ = D - e_i`.
pub fn reduce_norm_step(state: &ReductionState) -> Result<(ReductionState, ReductionRecord)> {
    let n = state.d.len();
    let norm = state.norm();
    if norm == 0 {
        return Err(Error::HypothesisViolated("D = 0: nothing to reduce".into()));
    }
    let rows = state.d.iter().any(|&x| x < 0);
    let mut chosen = None;
    for alpha in &state.roots {
        let za = state.zero.eval(alpha);
        let basis = if rows { za.left_kernel() } else { za.right_kernel() };
        // Over the span, the extreme support index is attained by a basis
        // vector.
        let pick = basis
            .into_iter()
            .filter_map(|v| {
                let support: Vec<usize> = (0..n).filter(|&j| !v[j].is_zero()).collect();
                let i = if rows { *support.last()? } else { *support.first()? };
                Some((i, v))
            })
            .reduce(|best, cand| {
                let better = if rows { cand.0 > best.0 } else { cand.0 < best.0 };
                if better {
                    cand
                } else {
                    best
                }
            });
        if let Some((i, v)) = pick {
            let ok = if rows { state.d[i] < 0 } else { state.d[i] > 0 };
            if ok {
                chosen = Some((alpha.clone(), i, v));
                break;
            }
        }
    }
    let Some((alpha, i, v)) = chosen else {
        return Err(Error::ProgressImpossible(format!(
            "no root of det Z admits a {} combination reaching an index with d {} 0 (D = {:?}); \
             the roots of det Z must be pairwise non-congruent",
            if rows { "row" } else { "column" },
            if rows { "<" } else { ">" },
            state.d
        )));
    };
    let inv = v[i].inv();
    let mut h = Mat::identity(n);
    for j in 0..n {
        if j != i && !v[j].is_zero() {
            let x = &v[j] * &inv;
            if rows {
                h[(i, j)] = x;
            } else {
                h[(j, i)] = x;
            }
        }
    }
    let mut unit = vec![0; n];
    let mut d = state.d.clone();
    let steps = if rows {
        unit[i] = -1;
        d[i] += 1;
        vec![
            GaugeStep::Constant { matrix: h },
            GaugeStep::LinearPower {
                point: state.shift.point(&alpha),
                exponents: unit,
            },
        ]
    } else {
        unit[i] = 1;
        d[i] -= 1;
        vec![
            GaugeStep::Constant {
                matrix: h.inverse().expect("unipotent"),
            },
            GaugeStep::LinearPower {
                point: alpha.clone(),
                exponents: unit,
            },
        ]
    };
    let mut sys = super::System {
        shift: state.shift.clone(),
        coeff: state.zero.clone(),
    };
    for s in &steps {
        sys = s.apply(&sys)?;
    }
    if !sys.coeff.is_polynomial() {
        return Err(Error::NormalizationLost("zero side acquired negative powers".into()));
    }
    let (zero, d, perm) = sort_descending(sys.coeff, d);
    let mut steps = steps;
    steps.extend(perm);
    let roots = checked_roots(&state.shift, &zero)?;
    let next = ReductionState {
        shift: state.shift.clone(),
        zero,
        d,
        top: state.top,
        steps: state.steps + 1,
        roots,
    };
    next.check_infinity()?;
    let after = next.norm();
    if after != norm - 1 {
        return Err(Error::NormalizationLost(format!("norm went from {norm} to {after}")));
    }
    Ok((
        next,
        ReductionRecord {
            case: if rows { ReductionCase::Rows } else { ReductionCase::Columns },
            root: alpha,
            index: i,
            norm_before: norm,
            norm_after: after,
            steps,
        },
    ))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::poly::LaurentPoly;

    fn c(re: i64, im: i64) -> ExactComplex {
        ExactComplex::new(re, im)
    }

    /// Lower-triangular `Z` with `Z_aa = c_a (z - α_a)` and off-diagonal
    /// entries of degree at most `μ + d_b - d_a`, so that `(s z)^D Z z^{-D}`
    /// has top degree `μ = 1`.
    pub(crate) fn manufactured(shift: Shift, d: &[i32]) -> ReductionState {
        let alphas = [c(1, 1), ExactComplex::ratio(-1, 2), c(0, 3)];
        let consts = [c(1, 0), c(2, -1), c(0, 1)];
        let n = d.len();
        let z = PolyMat::from_fn(n, n, |a, b| {
            if a == b {
                LaurentPoly::linear(&alphas[a]).scale(&consts[a])
            } else if a > b {
                let deg = 1 + d[b] - d[a];
                if deg < 0 {
                    LaurentPoly::zero()
                } else {
                    LaurentPoly::from_coeffs(0, (0..=deg).map(|k| c(k as i64 + a as i64, 1)))
                }
            } else {
                LaurentPoly::zero()
            }
        });
        ReductionState::new(shift, z, d.to_vec(), 1).unwrap().0
    }

    fn run(mut st: ReductionState) -> Vec<i32> {
        let mut traj = vec![st.norm()];
        while st.norm() > 0 {
            let (next, rec) = reduce_norm_step(&st).unwrap();
            assert_eq!(rec.norm_after, rec.norm_before - 1);
            traj.push(next.norm());
            st = next;
        }
        assert!(st.zero.is_polynomial());
        assert_eq!(st.infinity_side().to_laurent().unwrap(), st.zero);
        traj
    }

    #[test]
    fn negative_entries_q() {
        let st = manufactured(Shift::Q { q: c(2, 0) }, &[0, -2]);
        assert_eq!(run(st), vec![2, 1, 0]);
    }

    #[test]
    fn positive_entries_q() {
        let st = manufactured(Shift::Q { q: c(2, 0) }, &[2, 1, 0]);
        assert_eq!(run(st), vec![3, 2, 1, 0]);
    }

    #[test]
    fn mixed_entries_difference() {
        let st = manufactured(Shift::Difference, &[1, 0, -1]);
        assert_eq!(run(st), vec![2, 1, 0]);
    }

    #[test]
    fn infinity_identity_exact() {
        let st = manufactured(Shift::Difference, &[1, -1]);
        let (next, rec) = reduce_norm_step(&st).unwrap();
        assert_eq!(rec.case, ReductionCase::Rows);
        let inf = next.infinity_side();
        assert!(super::super::sauvage::value_at_infinity(&RationalMat::new(
            inf.num.clone(),
            &inf.den * &LaurentPoly::monomial(ExactComplex::one(), 1)
        ))
        .is_some());
    }

    #[test]
    fn zero_norm_rejected() {
        let st = manufactured(Shift::Q { q: c(2, 0) }, &[0, 0]);
        assert!(matches!(reduce_norm_step(&st), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn congruent_roots_rejected() {
        let z = PolyMat::diag(&[LaurentPoly::linear(&c(1, 0)), LaurentPoly::linear(&c(2, 0))]);
        let r = ReductionState::new(Shift::Q { q: c(2, 0) }, z, vec![1, 0], 1);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn empty_catalog_reports_progress_impossible() {
        let mut st = manufactured(Shift::Q { q: c(2, 0) }, &[0, -1]);
        st.roots.clear();
        assert!(matches!(reduce_norm_step(&st), Err(Error::ProgressImpossible(_))));
    }
}
