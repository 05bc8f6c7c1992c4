//! Numeric evaluation of the genuine solutions `Y^l`, `Y^r`.
//!
//! The divergent formal series is summed by optimal truncation at an anchor
//! far to the right (`Y^r`) or far to the left (`Y^l`) of the target, then
//! carried to the target with `Y(z) = A(z)^{-1} Y(z+1)` (right) or
//! `Y(z+1) = A(z) Y(z)` (left). Anchors are aligned to a fixed abscissa so
//! that targets differing by integers lie on one propagation chain.

use serde::Serialize;

use super::formal::{formal_solution_difference_in, DiffFormalSolution};
use super::DifferenceSystem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::roots::poly_roots;
use crate::scalar::BigComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Minimum distance from the singular lattice accepted on a path.
const LATTICE_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GenuineSolver {
    system: DifferenceSystem,
    side: Side,
    prec: u32,
    series: DiffFormalSolution<BigComplex>,
    /// Anchor abscissa: `Re a ≥ anchor` (right) or `Re a ≤ -anchor` (left).
    anchor: f64,
    /// Relative size of the first omitted term at the anchor abscissa.
    tolerance: f64,
    det_roots: Vec<BigComplex>,
    ln_rho: Vec<BigComplex>,
}

/// Values of a genuine solution on a set of targets.
#[derive(Clone, Debug)]
pub struct GenuineSolutionSample {
    pub side: Side,
    pub points: Vec<(BigComplex, Mat<BigComplex>)>,
    /// Largest series order used at any anchor.
    pub truncation_order: usize,
    /// Largest propagated norm of the first omitted term.
    pub error_estimate: f64,
    /// Roots of `det A`; the singular lattice is these points shifted by
    /// nonnegative integers to the left (right solution only).
    pub singular_points: Vec<BigComplex>,
    pub lattice: String,
    /// Largest `‖Y(z+1) - A(z)Y(z)‖ / ‖Y(z+1)‖` over targets `z`, `z+1`
    /// that both occur in the sample.
    pub recurrence_residual: f64,
}

/// One evaluation with its bookkeeping.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Mat<BigComplex>,
    pub error_estimate: f64,
    pub order_used: usize,
    pub steps: usize,
}

fn ln_branch(z: &BigComplex, side: Side) -> BigComplex {
    let l = z.ln();
    match side {
        Side::Right => l,
        Side::Left => {
            // arg in [0, 2π): cut along the positive real axis.
            if l.im().is_sign_negative() && !l.im().is_zero() {
                l + BigComplex::two_pi_i(z.prec())
            } else {
                l
            }
        }
    }
}

impl GenuineSolver {
    /// Prepares the series and chooses the anchor abscissa so that the
    /// smallest series term there is below `tolerance`.
    pub fn new(s: &DifferenceSystem, side: Side, precision: u32, tolerance: f64) -> Result<Self> {
        s.require_hypotheses()?;
        if !s.is_polynomial() {
            return Err(Error::InvalidInput("genuine solutions need a polynomial coefficient matrix".into()));
        }
        let prec = crate::scalar::check_precision(precision)?;
        let det = s.a().det();
        let det_roots = if det.high() > det.low() {
            poly_roots(&det, prec)?.flat()
        } else {
            Vec::new()
        };
        let ln_rho = s.rho().iter().map(|r| r.to_big(prec).ln()).collect();
        let mut order = 48usize;
        loop {
            let series = formal_solution_difference_in(s, order, &BigComplex::zero(prec))?;
            let norms: Vec<f64> = series.coeffs.iter().map(|m| m.max_abs().max(1e-300)).collect();
            // Smallest R with min_m norms[m] R^{-m} < tolerance.
            let mut anchor = 6.0f64;
            let found = loop {
                let min_term = norms
                    .iter()
                    .enumerate()
                    .map(|(m, &c)| c.log2() - m as f64 * anchor.log2())
                    .fold(f64::INFINITY, f64::min);
                if min_term < tolerance.log2() {
                    break true;
                }
                anchor *= 1.15;
                if anchor > 4000.0 {
                    break false;
                }
            };
            // Accept when the minimum is attained strictly inside the series.
            let argmin = norms
                .iter()
                .enumerate()
                .map(|(m, &c)| (m, c.log2() - m as f64 * anchor.log2()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
                .0;
            // A series whose tail vanishes identically is exact.
            let last_nonzero = series.coeffs.iter().rposition(|m| m.max_abs() > 0.0).unwrap_or(0);
            let terminates = last_nonzero + 2 < series.coeffs.len();
            if found && (terminates || argmin + 2 < series.coeffs.len()) {
                return Ok(GenuineSolver {
                    system: s.clone(),
                    side,
                    prec,
                    series,
                    anchor: anchor.ceil(),
                    tolerance,
                    det_roots,
                    ln_rho,
                });
            }
            if order >= 640 {
                return Err(Error::PrecisionExhausted(format!(
                    "series tolerance {tolerance:e} not reachable with order {order}"
                )));
            }
            order *= 2;
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn series(&self) -> &DiffFormalSolution<BigComplex> {
        &self.series
    }

    pub fn det_roots(&self) -> &[BigComplex] {
        &self.det_roots
    }

    /// Truncated asymptotic expansion at `a` (optimal truncation), with the
    /// first omitted term as a matrix.
    pub fn asymptotic(&self, a: &BigComplex) -> (Mat<BigComplex>, Mat<BigComplex>, usize) {
        let n = self.system.n();
        let prec = self.prec;
        let one = BigComplex::one(prec);
        let inv = one.clone() / a.clone();
        let inv_abs = inv.abs_f64();
        let coeffs = &self.series.coeffs;
        let last_nonzero = coeffs.iter().rposition(|m| m.max_abs() > 0.0).unwrap_or(0);
        let stop = if last_nonzero + 1 < coeffs.len() {
            // Terminating series: summed exactly.
            coeffs.len()
        } else {
            let mut best = (1usize, f64::INFINITY);
            for (m, c) in coeffs.iter().enumerate().skip(1) {
                let size = c.max_abs();
                if size == 0.0 {
                    continue;
                }
                let t = size.log2() + m as f64 * inv_abs.log2();
                if t < best.1 {
                    best = (m, t);
                }
            }
            best.0
        };
        let mut sum = Mat::zeros_like(n, n, &one);
        let mut p = one.clone();
        let mut omitted = Mat::zeros_like(n, n, &one);
        for (m, c) in self.series.coeffs.iter().enumerate() {
            if m < stop {
                sum = sum.add(&c.scale(&p));
            } else if m == stop {
                omitted = c.scale(&p);
                break;
            }
            p = p * inv.clone();
        }
        let ln_a = ln_branch(a, self.side);
        let r = self.series.r as i64;
        let phi = (ln_a.clone() * a.clone().mul_i64(r) - a.clone().mul_i64(r)).exp();
        let lam: Vec<BigComplex> = (0..n)
            .map(|k| {
                let e = self.series.power_exponent(k);
                (a.clone() * self.ln_rho[k].clone() + ln_a.clone() * e).exp()
            })
            .collect();
        let lam = Mat::diag_from(&lam);
        (
            sum.mul(&lam).scale(&phi),
            omitted.mul(&lam).scale(&phi),
            stop,
        )
    }

    fn check_point(&self, p: &BigComplex) -> Result<()> {
        for q in &self.det_roots {
            if (p.clone() - q.clone()).abs_f64() < LATTICE_MARGIN {
                return Err(Error::SingularityOnPath(format!(
                    "path point {:?} is within {LATTICE_MARGIN:e} of a root of det A",
                    p.with_prec(64)
                )));
            }
        }
        Ok(())
    }

    /// Number of unit steps between `z` and its anchor.
    pub fn steps_for(&self, z: &BigComplex, extra: usize) -> usize {
        let x = z.re().to_f64();
        let n = match self.side {
            Side::Right => (self.anchor - x).ceil(),
            Side::Left => (x + self.anchor).ceil(),
        };
        n.max(0.0) as usize + extra
    }

    /// Evaluates the solution at `z`, anchoring `extra` steps beyond the
    /// default anchor.
    pub fn eval_with(&self, z: &BigComplex, extra: usize) -> Result<Evaluation> {
        let z = z.with_prec(self.prec);
        let steps = self.steps_for(&z, extra);
        let one = BigComplex::one(self.prec);
        let a = match self.side {
            Side::Right => z.clone() + one.mul_i64(steps as i64),
            Side::Left => z.clone() - one.mul_i64(steps as i64),
        };
        let (mut y, mut err, order) = self.asymptotic(&a);
        let mut p = a;
        for _ in 0..steps {
            match self.side {
                Side::Right => {
                    p = p - one.clone();
                    self.check_point(&p)?;
                    let ap = self.system.a().eval_big(&p);
                    let inv = ap.inverse().ok_or_else(|| {
                        Error::SingularityOnPath(format!("A is singular at {:?}", p.with_prec(64)))
                    })?;
                    y = inv.mul(&y);
                    err = inv.mul(&err);
                }
                Side::Left => {
                    let ap = self.system.a().eval_big(&p);
                    y = ap.mul(&y);
                    err = ap.mul(&err);
                    p = p + one.clone();
                }
            }
        }
        Ok(Evaluation {
            value: y,
            error_estimate: err.max_abs(),
            order_used: order,
            steps,
        })
    }

    pub fn eval(&self, z: &BigComplex) -> Result<Evaluation> {
        self.eval_with(z, 0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Evaluates `Y^l` or `Y^r` at the targets.
pub fn genuine_solution(
    s: &DifferenceSystem,
    side: Side,
    targets: &[BigComplex],
    precision: u32,
) -> Result<GenuineSolutionSample> {
    let tol = (-(precision as f64) / 2.0).exp2().max(1e-60);
    let solver = GenuineSolver::new(s, side, precision, tol)?;
    sample_from_solver(&solver, s, targets)
}

pub(crate) fn sample_from_solver(
    solver: &GenuineSolver,
    s: &DifferenceSystem,
    targets: &[BigComplex],
) -> Result<GenuineSolutionSample> {
    let mut points = Vec::new();
    let mut err = 0.0f64;
    let mut order = 0usize;
    for z in targets {
        let ev = solver.eval(z)?;
        err = err.max(ev.error_estimate);
        order = order.max(ev.order_used);
        points.push((z.clone(), ev.value));
    }
    let mut residual = 0.0f64;
    for (z, y) in &points {
        let z1 = z.clone() + BigComplex::one(z.prec());
        if let Some((_, y1)) = points.iter().find(|(w, _)| (w.clone() - z1.clone()).abs_f64() < 1e-20) {
            let az = s.a().eval_big(z);
            let r = y1.sub(&az.mul(y)).max_abs() / y1.max_abs().max(1e-300);
            residual = residual.max(r);
        }
    }
    let lattice = match solver.side() {
        Side::Right => "roots of det A and their translates by negative integers".to_string(),
        Side::Left => "none (A is polynomial)".to_string(),
    };
    Ok(GenuineSolutionSample {
        side: solver.side(),
        points,
        truncation_order: order,
        error_estimate: err,
        singular_points: solver.det_roots().to_vec(),
        lattice,
        recurrence_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactComplex;

    #[test]
    fn scalar_constant_closed_form() {
        // Y(z+1) = ρ Y(z), r = 0: both solutions are ρ^z.
        let rho = ExactComplex::new(1, 1);
        let s = DifferenceSystem::from_coeffs(&[Mat::diag_from(&[rho.clone()])]).unwrap();
        for side in [Side::Left, Side::Right] {
            let z = BigComplex::from_f64(128, 0.3, 0.2);
            let sample = genuine_solution(&s, side, &[z.clone()], 128).unwrap();
            let expect = (z * rho.to_big(128).ln()).exp();
            assert!((sample.points[0].1[(0, 0)].clone() - expect).abs_f64() < 1e-12);
        }
    }

    #[test]
    fn gamma_right_solution() {
        // Y(z+1) = z Y(z): Y^r = Γ(z)/√(2π). Check Γ(1/2)/√(2π) = 1/√2.
        let s = DifferenceSystem::from_coeffs(&[Mat::zeros(1, 1), Mat::identity(1)]).unwrap();
        let z = BigComplex::from_f64(192, 0.5, 0.0);
        let sample = genuine_solution(&s, Side::Right, &[z], 192).unwrap();
        let got = sample.points[0].1[(0, 0)].clone();
        let expect = BigComplex::from_f64(192, 0.5, 0.0).sqrt();
        assert!((got - expect).abs_f64() < 1e-25);
    }

    #[test]
    fn chain_residual_is_roundoff() {
        let a1 = Mat::diag_from(&[ExactComplex::real(1), ExactComplex::i()]);
        let a0 = Mat::from_rows(vec![
            vec![ExactComplex::real(2), ExactComplex::real(1)],
            vec![ExactComplex::real(1), ExactComplex::new(0, 3)],
        ]);
        let s = DifferenceSystem::from_coeffs(&[a0, a1]).unwrap();
        let z0 = BigComplex::from_f64(256, 0.25, 0.5);
        let targets: Vec<BigComplex> = (0..3).map(|j| z0.clone() + BigComplex::from_f64(256, j as f64, 0.0)).collect();
        for side in [Side::Left, Side::Right] {
            let sample = genuine_solution(&s, side, &targets, 256).unwrap();
            assert!(sample.recurrence_residual < 1e-25, "{side:?}: {}", sample.recurrence_residual);
        }
    }
}
