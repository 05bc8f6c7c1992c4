//! Normalization of the characteristic constants at infinity by integer
//! shifts while keeping a polynomial system of the same top degree.
//!
//! Stages: unit shifts at infinity give a rational gauge `M`; its Birkhoff
//! split `U M^{-1} = z^K W` transports the data to a polynomial zero side
//! `Z = U(s z) C U^{-1}` paired with `(s z)^D Z z^{-D}`, `D = -K`; norm
//! reduction then drives `D` to zero.

use serde::{Deserialize, Serialize};

use super::leading::normalize_leading;
use super::reduction::{reduce_norm_step, ReductionRecord, ReductionState};
use super::sauvage::birkhoff_split;
use super::{compose, shift_constant, GaugeStep, Shift, System};
use crate::difference::monodromy_samples_difference;
use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat, RationalMat};
use crate::qdiff::{parallelogram_grid, MonodromyEvaluator};
use crate::scalar::{BigComplex, ExactComplex};

/// Replayable record of a normalization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeLog {
    pub shift: Shift,
    pub targets: Vec<i32>,
    /// Factors of the rational gauge `M` at infinity, in order.
    pub infinity_steps: Vec<GaugeStep>,
    /// Partial indices `K` of `U M^{-1} = z^K W`.
    pub partial_indices: Vec<i32>,
    /// Factors taking the input to the output, in order.
    pub steps: Vec<GaugeStep>,
    /// `‖D‖₁` before each reduction step and at the end.
    pub norm_trajectory: Vec<i32>,
}

#[derive(Clone, Debug)]
pub struct NormalizationOutcome {
    pub output: System,
    /// The Laurent system reached at infinity by unit shifts.
    pub shifted: System,
    pub log: GaugeLog,
    pub records: Vec<ReductionRecord>,
}

/// Applies the logged factors to `input`.
pub fn replay(log: &GaugeLog, input: &System) -> Result<System> {
    if input.shift != log.shift {
        return Err(Error::InvalidInput("log was recorded for a different kind of system".into()));
    }
    let mut s = input.clone();
    for step in &log.steps {
        s = step.apply(&s)?;
    }
    Ok(s)
}

fn expected_leading(s: &System, targets: &[i32]) -> Vec<ExactComplex> {
    let diag = s.leading().diagonal();
    match &s.shift {
        // σ_k - t_k multiplies q^{-σ_k} by q^{t_k}.
        Shift::Q { q } => diag.iter().zip(targets).map(|(l, &t)| l * &q.powi(t as i64)).collect(),
        Shift::Difference => diag,
    }
}

/// `(s z)^D Z z^{-D}`.
pub(crate) fn infinity_of(shift: &Shift, zero: &PolyMat, d: &[i32]) -> RationalMat {
    let lhs = GaugeStep::ZPower { exponents: d.to_vec() }.matrix();
    let neg: Vec<i32> = d.iter().map(|x| -x).collect();
    let rhs = RationalMat::from_laurent(&PolyMat::z_power_diag(&neg));
    shift.apply(&lhs).mul(&RationalMat::from_laurent(zero)).mul(&rhs)
}

/// Lowers the characteristic constants at infinity by `targets`
/// (`σ → σ - t` in the q-case, `d → d - t` in the difference case) through
/// a rational gauge, keeping the exponents at zero and the top degree.
pub fn normalize_system(s: &System, targets: &[i32]) -> Result<NormalizationOutcome> {
    let n = s.n();
    if targets.len() != n {
        return Err(Error::InvalidInput(format!("{} target shifts for dimension {n}", targets.len())));
    }
    if !s.is_polynomial() {
        return Err(Error::InvalidInput("normalization needs a polynomial system".into()));
    }
    let mut log = GaugeLog {
        shift: s.shift.clone(),
        targets: targets.to_vec(),
        infinity_steps: Vec::new(),
        partial_indices: vec![0; n],
        steps: Vec::new(),
        norm_trajectory: vec![0],
    };
    if targets.iter().all(|&t| t == 0) {
        return Ok(NormalizationOutcome {
            output: s.clone(),
            shifted: s.clone(),
            log,
            records: Vec::new(),
        });
    }

    let (start, steps) = normalize_leading(s, None)?;
    log.steps.extend(steps);
    let expected = expected_leading(&start, targets);
    let expected_d = match &s.shift {
        Shift::Difference => Some(start.to_difference()?.d()),
        Shift::Q { .. } => None,
    };

    let mut shifted = start.clone();
    for (k, &t) in targets.iter().enumerate() {
        for _ in 0..t.unsigned_abs() {
            let out = shift_constant(&shifted, k, -t.signum())?;
            shifted = out.system;
            log.infinity_steps.extend(out.steps);
        }
    }
    let m = compose(&log.infinity_steps, n);

    let split = birkhoff_split(&m.inverse()?)?;
    log.partial_indices = split.k.clone();
    let d: Vec<i32> = split.k.iter().map(|k| -k).collect();
    let u_step = GaugeStep::Laurent { matrix: split.u };
    let zero_sys = u_step.apply(&start)?;
    log.steps.push(u_step);
    if !zero_sys.is_polynomial() {
        return Err(Error::NormalizationLost("zero side is not polynomial after the split".into()));
    }
    // The split must carry the shifted system to the paired infinity side.
    let w = &split.w;
    let direct = s
        .shift
        .apply(w)
        .mul(&RationalMat::from_laurent(&shifted.coeff))
        .mul(&w.inverse()?);
    if direct != infinity_of(&s.shift, &zero_sys.coeff, &d) {
        return Err(Error::NormalizationLost("infinity side does not match the split".into()));
    }

    let (mut state, perm) = ReductionState::new(s.shift.clone(), zero_sys.coeff, d, s.top())?;
    log.steps.extend(perm);
    log.norm_trajectory = vec![state.norm()];
    let cap = state.norm() as usize;
    let mut records = Vec::new();
    while state.norm() > 0 {
        if records.len() >= cap {
            return Err(Error::PipelineDiverged(cap));
        }
        let (next, rec) = reduce_norm_step(&state)?;
        log.steps.extend(rec.steps.iter().cloned());
        log.norm_trajectory.push(next.norm());
        records.push(rec);
        state = next;
    }

    let reduced = System {
        shift: s.shift.clone(),
        coeff: state.zero,
    };
    if reduced.top() != s.top() {
        return Err(Error::NormalizationLost(format!(
            "top degree {} differs from the input {}",
            reduced.top(),
            s.top()
        )));
    }
    let (output, steps) = normalize_leading(&reduced, Some(&expected))?;
    log.steps.extend(steps);
    if let Some(d0) = expected_d {
        let want: Vec<ExactComplex> = d0.iter().zip(targets).map(|(d, &t)| d - &ExactComplex::real(t)).collect();
        if output.to_difference()?.d() != want {
            return Err(Error::NormalizationLost("characteristic constants did not move by the targets".into()));
        }
    }
    if replay(&log, s)? != output {
        return Err(Error::NormalizationLost("replaying the log does not reproduce the output".into()));
    }
    Ok(NormalizationOutcome {
        output,
        shifted,
        log,
        records,
    })
}

/// Largest relative deviation of `b` from `diag(x) a diag(y)` over a set of
/// samples, with `x_i y_j` fitted from the first sample.
fn scaled_deviation(a: &[Mat<BigComplex>], b: &[Mat<BigComplex>]) -> f64 {
    let n = a[0].rows();
    let floor = a.iter().chain(b).map(|m| m.max_abs()).fold(0.0, f64::max) * 1e-30;
    let mut ratio: Vec<Vec<Option<BigComplex>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if a[0][(i, j)].abs_f64() > floor {
                ratio[i][j] = Some(b[0][(i, j)].clone() / a[0][(i, j)].clone());
            }
        }
    }
    let mut worst = 0.0f64;
    // Rank one: R_ij R_kl = R_il R_kj.
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if let (Some(a1), Some(a2), Some(b1), Some(b2)) =
                        (&ratio[i][j], &ratio[k][l], &ratio[i][l], &ratio[k][j])
                    {
                        let x = a1.clone() * a2.clone();
                        let y = b1.clone() * b2.clone();
                        let den = x.abs_f64().max(y.abs_f64()).max(f64::MIN_POSITIVE);
                        worst = worst.max((x - y).abs_f64() / den);
                    }
                }
            }
        }
    }
    for (pa, pb) in a.iter().zip(b) {
        let scale = pb.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                let predicted = match &ratio[i][j] {
                    Some(r) => r.clone() * pa[(i, j)].clone(),
                    None => BigComplex::zero(pa.prec()),
                };
                worst = worst.max((pb[(i, j)].clone() - predicted).abs_f64() / scale);
            }
        }
    }
    worst
}

/// Compares the connection matrices of two q-difference systems on a grid
/// of the parallelogram at `t0`, up to left and right diagonal scaling.
pub fn compare_monodromy_q(a: &System, b: &System, t0: &BigComplex, per_side: usize, precision: u32) -> Result<f64> {
    let ea = MonodromyEvaluator::new(&a.to_q()?, precision)?;
    let eb = MonodromyEvaluator::new(&b.to_q()?, precision)?;
    let grid = parallelogram_grid(&t0.with_prec(precision), ea.omega_prime(), per_side);
    let pa: Vec<Mat<BigComplex>> = grid.iter().map(|t| ea.eval_t(t)).collect::<Result<_>>()?;
    let pb: Vec<Mat<BigComplex>> = grid.iter().map(|t| eb.eval_t(t)).collect::<Result<_>>()?;
    Ok(scaled_deviation(&pa, &pb))
}

/// Compares the periodic connection matrices of two difference systems at
/// `z0 + j/count`, up to left and right diagonal scaling.
pub fn compare_monodromy_difference(
    a: &System,
    b: &System,
    z0: &BigComplex,
    count: usize,
    precision: u32,
) -> Result<f64> {
    let points: Vec<BigComplex> = (0..count.max(1))
        .map(|j| z0.with_prec(precision) + BigComplex::one(precision).mul_i64(j as i64).div_i64(count.max(1) as i64))
        .collect();
    let pa = monodromy_samples_difference(&a.to_difference()?, &points, precision)?;
    let pb = monodromy_samples_difference(&b.to_difference()?, &points, precision)?;
    Ok(scaled_deviation(&pa, &pb))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{c, exact_root_difference, mu_one_q};
    use super::*;

    #[test]
    fn zero_targets_identity() {
        let s = mu_one_q();
        let out = normalize_system(&s, &[0, 0]).unwrap();
        assert_eq!(out.output, s);
        assert!(out.log.steps.is_empty());
    }

    #[test]
    fn q_roundtrip_recovers_leading() {
        let s = mu_one_q();
        let bad = normalize_system(&s, &[-1, 1]).unwrap();
        assert_eq!(bad.output.top(), 1);
        assert!(bad.output.is_polynomial());
        let q = c(2, 0);
        let l = s.leading().diagonal();
        assert_eq!(bad.output.leading().diagonal(), vec![&l[0] / &q, &l[1] * &q]);
        let back = normalize_system(&bad.output, &[1, -1]).unwrap();
        assert_eq!(back.output.leading(), s.leading());
        assert!(back.log.norm_trajectory.windows(2).all(|w| w[1] == w[0] - 1));
        assert_eq!(replay(&back.log, &bad.output).unwrap(), back.output);
    }

    #[test]
    fn difference_roundtrip_recovers_d() {
        let s = exact_root_difference();
        let d0 = s.to_difference().unwrap().d();
        let bad = normalize_system(&s, &[-1, 1]).unwrap();
        let d1 = bad.output.to_difference().unwrap().d();
        assert_eq!(d1[0], &d0[0] + &ExactComplex::one());
        assert_eq!(d1[1], &d0[1] - &ExactComplex::one());
        assert!(bad.output.is_polynomial());
        let back = normalize_system(&bad.output, &[1, -1]).unwrap();
        assert_eq!(back.output.to_difference().unwrap().d(), d0);
        assert_eq!(back.output.top(), s.top());
    }

    #[test]
    fn log_serializes() {
        let s = mu_one_q();
        let out = normalize_system(&s, &[1, 0]).unwrap();
        let text = serde_json::to_string(&out.log).unwrap();
        let back: GaugeLog = serde_json::from_str(&text).unwrap();
        assert_eq!(replay(&back, &s).unwrap(), out.output);
    }

    #[test]
    fn wrong_target_length() {
        let s = mu_one_q();
        assert!(matches!(normalize_system(&s, &[1]), Err(Error::InvalidInput(_))));
    }
}
