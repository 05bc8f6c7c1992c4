//! Leading-coefficient normalization and unit shifts of one characteristic
//! constant.

use super::{GaugeStep, Shift, System};
use crate::difference::formal_solution_difference;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::qdiff::{local_series_q, Site};
use crate::roots::exact_eigen;
use crate::scalar::ExactComplex;

/// Conjugates by a constant so that the top coefficient becomes diagonal,
/// which makes the leading series coefficient at infinity the identity.
/// With `order`, the diagonal is permuted to match it entry for entry.
pub fn normalize_leading(s: &System, order: Option<&[ExactComplex]>) -> Result<(System, Vec<GaugeStep>)> {
    let mut steps = Vec::new();
    let mut out = s.clone();
    if !s.leading().is_diagonal() {
        let (_, v) = exact_eigen(&s.leading())?;
        let c = v.inverse().ok_or_else(|| Error::NonDiagonalizable("eigenbasis is singular".into()))?;
        let step = GaugeStep::Constant { matrix: c };
        out = step.apply(&out)?;
        steps.push(step);
    }
    if let Some(order) = order {
        let diag = out.leading().diagonal();
        let perm = match_order(&diag, order).ok_or_else(|| {
            Error::NormalizationLost(format!(
                "leading diagonal {} cannot be matched to {}",
                join(&diag),
                join(order)
            ))
        })?;
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            let step = GaugeStep::Permutation { perm };
            out = step.apply(&out)?;
            steps.push(step);
        }
    }
    Ok((out, steps))
}

fn join(v: &[ExactComplex]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// `perm` with `current[perm[i]] == target[i]`, when one exists.
pub(crate) fn match_order(current: &[ExactComplex], target: &[ExactComplex]) -> Option<Vec<usize>> {
    if current.len() != target.len() {
        return None;
    }
    let mut used = vec![false; current.len()];
    let mut perm = Vec::with_capacity(target.len());
    for t in target {
        let j = (0..current.len()).find(|&j| !used[j] && current[j] == *t)?;
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

/// Result of [`shift_constant`].
#[derive(Clone, Debug)]
pub struct ShiftOutcome {
    pub system: System,
    /// The factors applied, in order.
    pub steps: Vec<GaugeStep>,
}

/// Moves the `k`-th characteristic constant at infinity by `delta = ±1`
/// (`σ_k` in the q-case, `d_k` in the difference case), keeping the leading
/// coefficient diagonal.
///
/// The q-case uses `z^{-δ e_k}`. The difference case uses `z^{e_k}` to raise
/// `d_k` and `(z-1)^{-e_k}` to lower it, since `z^{-e_k}` would put a pole
/// at `z = -1`. A constant factor then restores the identity leading
/// series coefficient.
pub fn shift_constant(s: &System, k: usize, delta: i32) -> Result<ShiftOutcome> {
    let n = s.n();
    if k >= n {
        return Err(Error::InvalidInput(format!("index {k} out of range for dimension {n}")));
    }
    if delta != 1 && delta != -1 {
        return Err(Error::InvalidInput(format!("shift must be +1 or -1, got {delta}")));
    }
    if !s.leading().is_diagonal() {
        return Err(Error::HypothesisViolated("shift_constant needs a diagonal leading coefficient".into()));
    }
    // First series coefficient at infinity and whether the factor acts on
    // row k (z^{+e_k}) or column k.
    let (b1, power, use_row) = match &s.shift {
        Shift::Q { .. } => {
            let sol = local_series_q(&s.to_q()?, Site::Infinity, 1)?;
            (
                sol.coeffs[1].clone(),
                GaugeStep::ZPower { exponents: unit(n, k, -delta) },
                delta < 0,
            )
        }
        Shift::Difference => {
            let sol = formal_solution_difference(&s.to_difference()?, 1)?;
            let power = if delta > 0 {
                GaugeStep::ZPower { exponents: unit(n, k, 1) }
            } else {
                GaugeStep::LinearPower {
                    point: ExactComplex::one(),
                    exponents: unit(n, k, -1),
                }
            };
            (sol.coeffs[1].clone(), power, delta > 0)
        }
    };
    let mut b0 = Mat::identity(n);
    for j in 0..n {
        if j != k {
            if use_row {
                b0[(k, j)] = b1[(k, j)].clone();
            } else {
                b0[(j, k)] = b1[(j, k)].clone();
            }
        }
    }
    let constant = GaugeStep::Constant {
        matrix: b0.inverse().expect("unipotent"),
    };
    let system = constant.apply(&power.apply(s)?)?;
    check_shift(s, &system, k, delta)?;
    Ok(ShiftOutcome {
        system,
        steps: vec![power, constant],
    })
}

fn unit(n: usize, k: usize, v: i32) -> Vec<i32> {
    (0..n).map(|i| if i == k { v } else { 0 }).collect()
}

fn check_shift(before: &System, after: &System, k: usize, delta: i32) -> Result<()> {
    if after.top() != before.top() {
        return Err(Error::NormalizationLost(format!(
            "top degree changed from {} to {}",
            before.top(),
            after.top()
        )));
    }
    if !after.leading().is_diagonal() {
        return Err(Error::NormalizationLost("leading coefficient is no longer diagonal".into()));
    }
    match &before.shift {
        Shift::Q { q } => {
            // σ_k + δ multiplies the k-th diagonal entry by q^{-δ}.
            let mut expected = before.leading().diagonal();
            expected[k] = &expected[k] * &q.powi(-delta as i64);
            if after.leading().diagonal() != expected {
                return Err(Error::NormalizationLost(format!("sigma_{k} did not move by exactly {delta}")));
            }
        }
        Shift::Difference => {
            let d0 = before.to_difference()?.d();
            let d1 = after.to_difference()?;
            let mut expected = d0;
            expected[k] = &expected[k] + &ExactComplex::real(delta);
            if d1.rho() != before.leading().diagonal().as_slice() || d1.d() != expected {
                return Err(Error::NormalizationLost(format!("d_{k} did not move by exactly {delta}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::{c, exact_root_difference, mu_one_q};
    use super::*;
    use crate::matrix::PolyMat;
    use crate::qdiff::recursion_residuals;

    #[test]
    fn leading_diagonalized_up_to_scaling() {
        let s = mu_one_q();
        let t = Mat::from_rows(vec![vec![c(1, 0), c(2, 1)], vec![c(0, 1), c(1, 0)]]);
        let mixed = GaugeStep::Constant { matrix: t.clone() }.apply(&s).unwrap();
        assert!(!mixed.leading().is_diagonal());
        let order = s.leading().diagonal();
        let (out, steps) = normalize_leading(&mixed, Some(&order)).unwrap();
        assert_eq!(out.leading(), s.leading());
        // The total constant C·T commutes with the distinct diagonal, so it
        // is itself diagonal.
        let total = super::super::compose(&steps, 2).num.coeff(0).mul(&t);
        assert!(total.is_diagonal());
        let sol = local_series_q(&out.to_q().unwrap(), Site::Infinity, 4).unwrap();
        assert_eq!(sol.coeffs[0], Mat::identity(2));
        assert!(recursion_residuals(&out.to_q().unwrap(), &sol).iter().all(|m| m.is_zero()));
    }

    #[test]
    fn already_normal_is_untouched() {
        let s = mu_one_q();
        let (out, steps) = normalize_leading(&s, None).unwrap();
        assert!(steps.is_empty());
        assert_eq!(out, s);
    }

    #[test]
    fn non_diagonalizable_rejected() {
        let j = Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(0, 0), c(1, 0)]]);
        let s = System::new(
            Shift::Q { q: c(2, 0) },
            PolyMat::from_coeff_mats(2, 2, &[(0, Mat::identity(2)), (1, j)]),
        )
        .unwrap();
        assert!(matches!(normalize_leading(&s, None), Err(Error::NonDiagonalizable(_))));
    }

    #[test]
    fn q_shift_both_directions() {
        let s = mu_one_q();
        for k in 0..2 {
            for delta in [1, -1] {
                let out = shift_constant(&s, k, delta).unwrap();
                assert_eq!(out.system.top(), 1);
                assert!(out.system.low() >= -1);
                // Undo and compare leading data.
                let back = shift_constant(&out.system, k, -delta).unwrap();
                assert_eq!(back.system.leading(), s.leading());
            }
        }
    }

    #[test]
    fn q_shift_twice_gives_laurent_with_shifted_sigma() {
        let s = mu_one_q();
        let a = shift_constant(&s, 0, 1).unwrap();
        let b = shift_constant(&a.system, 1, -1).unwrap();
        let q = c(2, 0);
        let l0 = s.leading().diagonal();
        let l1 = b.system.leading().diagonal();
        assert_eq!(l1[0], &l0[0] / &q);
        assert_eq!(l1[1], &l0[1] * &q);
        // Exact local series still exists at infinity.
        let sol = local_series_q(&b.system.to_q().unwrap(), Site::Infinity, 3).unwrap();
        assert!(recursion_residuals(&b.system.to_q().unwrap(), &sol).iter().all(|m| m.is_zero()));
    }

    #[test]
    fn difference_shift_both_directions() {
        let s = exact_root_difference();
        let d0 = s.to_difference().unwrap().d();
        for k in 0..2 {
            for delta in [1, -1] {
                let out = shift_constant(&s, k, delta).unwrap();
                let d1 = out.system.to_difference().unwrap().d();
                assert_eq!(d1[k], &d0[k] + &ExactComplex::real(delta));
                assert_eq!(d1[1 - k], d0[1 - k]);
                assert!(out.system.low() >= -1);
            }
        }
    }

    #[test]
    fn rejects_non_normalized() {
        let s = mu_one_q();
        let t = Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(0, 0), c(1, 0)]]);
        let mixed = GaugeStep::Constant { matrix: t }.apply(&s).unwrap();
        assert!(matches!(shift_constant(&mixed, 0, 1), Err(Error::HypothesisViolated(_))));
    }
}
