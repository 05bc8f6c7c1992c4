//! Fitting monodromy entries to
//! `c e^{at²+bt} σ(t-a_1)⋯σ(t-a_μ)`, `a = -ημ/2`,
//! `b = η(σ_i+ρ_j+v) - η′(μ/2+u)`, `Σ a_k = σ_i+ρ_j - μω′/2 + v - uω′`.
//!
//! Zeros are located in the cell `t₀ + [0,1]·1 + [0,1]·ω′` by recursive
//! subdivision with argument-principle counts on cell boundaries, then
//! polished by Newton's method.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use super::monodromy::MonodromyEvaluator;
use crate::elliptic::PeriodLattice;
use crate::error::{Error, Result};
use crate::scalar::BigComplex;

/// Largest phase step accepted along a boundary without bisecting.
const MAX_PHASE_STEP: f64 = 0.6;
const MAX_EDGE_DEPTH: u32 = 28;
/// Cells at or below this side length are handed to Newton.
const NEWTON_CELL: f64 = 1.0 / 8.0;
const MIN_CELL: f64 = 1e-6;
/// Zeros closer than this (in cell coordinates) count as one multiple zero.
const MULTIPLE_ZERO_GAP: f64 = 1e-6;

/// What the entry is expected to satisfy: `μ` and `σ_i + ρ_j`.
#[derive(Clone, Debug)]
pub struct EntryTarget {
    pub mu: i32,
    pub exponent_sum: BigComplex,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaFit {
    /// Corner of the cell the zeros were located in.
    pub t0: BigComplex,
    /// Zeros `a_k` reduced into the cell.
    pub zeros: Vec<BigComplex>,
    /// Argument-principle count on the cell boundary.
    pub winding: i64,
    pub u: i64,
    pub v: i64,
    /// `|Σ a_k - (σ_i+ρ_j - μω′/2 + v - uω′)|`.
    pub lattice_residual: f64,
    pub a: BigComplex,
    pub b: BigComplex,
    pub c: BigComplex,
    /// Largest relative deviation of the model from the entry at the check
    /// points.
    pub fit_residual: f64,
}

struct Sampler<F> {
    f: F,
    t0: BigComplex,
    omega: BigComplex,
    prec: u32,
    /// `f` and `|f'/f|` at each sampled point.
    cache: RefCell<HashMap<(i64, i64), (BigComplex, f64)>>,
}

fn key(x: f64, y: f64) -> (i64, i64) {
    ((x * (1u64 << 40) as f64).round() as i64, (y * (1u64 << 40) as f64).round() as i64)
}

impl<F: Fn(&BigComplex) -> Result<BigComplex>> Sampler<F> {
    fn point(&self, x: f64, y: f64) -> BigComplex {
        self.t0.clone() + BigComplex::from_f64(self.prec, x, 0.0) + self.omega.mul_f64(y)
    }

    fn coordinates(&self, t: &BigComplex) -> (f64, f64) {
        let d = t.clone() - self.t0.clone();
        let y = d.im().to_f64() / self.omega.im().to_f64();
        let x = d.re().to_f64() - y * self.omega.re().to_f64();
        (x, y)
    }

    fn at(&self, x: f64, y: f64) -> Result<BigComplex> {
        Ok(self.sample(x, y)?.0)
    }

    /// `f` and a forward-difference estimate of `|f'/f|`.
    fn sample(&self, x: f64, y: f64) -> Result<(BigComplex, f64)> {
        let k = key(x, y);
        if let Some(v) = self.cache.borrow().get(&k) {
            return Ok(v.clone());
        }
        let t = self.point(x, y);
        let v = (self.f)(&t)?;
        let h = BigComplex::from_f64(self.prec, (-((self.prec / 4) as f64)).exp2(), 0.0);
        let d = ((self.f)(&(t + h.clone()))? - v.clone()) / h;
        let logder = if v.0.is_zero() {
            f64::INFINITY
        } else {
            (d / v.clone()).abs_f64()
        };
        self.cache.borrow_mut().insert(k, (v.clone(), logder));
        Ok((v, logder))
    }

    /// Phase change of `f` along the segment. A piece is accepted once its
    /// length times `|f'/f|` at both ends and the midpoint is small, which
    /// bounds the true phase change and rules out aliasing by whole turns.
    fn edge(&self, a: (f64, f64), b: (f64, f64), fa: &BigComplex, fb: &BigComplex, depth: u32) -> Result<f64> {
        if fa.0.is_zero() || fb.0.is_zero() {
            return Err(Error::Domain("entry vanishes on a cell boundary".into()));
        }
        let m = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        let (fm, lm) = self.sample(m.0, m.1)?;
        if fm.0.is_zero() {
            return Err(Error::Domain("entry vanishes on a cell boundary".into()));
        }
        let la = self.sample(a.0, a.1)?.1;
        let lb = self.sample(b.0, b.1)?.1;
        let len = (self.point(b.0, b.1) - self.point(a.0, a.1)).abs_f64();
        let step = phase_step(fa, fb);
        if depth >= 2 && step.abs() < MAX_PHASE_STEP && len * la.max(lb).max(lm) < MAX_PHASE_STEP {
            return Ok(step);
        }
        if depth >= MAX_EDGE_DEPTH {
            return Err(Error::Domain("entry vanishes near a cell boundary".into()));
        }
        Ok(self.edge(a, m, fa, &fm, depth + 1)? + self.edge(m, b, &fm, fb, depth + 1)?)
    }

    /// Winding number of `f` around the cell `[x0,x1] × [y0,y1]`.
    fn winding(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<i64> {
        let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        let vals: Vec<BigComplex> = corners.iter().map(|&(x, y)| self.at(x, y)).collect::<Result<_>>()?;
        let mut total = 0.0;
        for k in 0..4 {
            let l = (k + 1) % 4;
            total += self.edge(corners[k], corners[l], &vals[k], &vals[l], 0)?;
        }
        let w = total / (2.0 * std::f64::consts::PI);
        if (w - w.round()).abs() > 0.2 {
            return Err(Error::PrecisionExhausted(format!("winding number {w} is not near an integer")));
        }
        Ok(w.round() as i64)
    }

    fn newton(&self, x: f64, y: f64) -> Result<BigComplex> {
        let p = self.prec;
        let h = BigComplex::from_f64(p, (-((p / 3) as f64)).exp2(), 0.0);
        let mut t = self.point(x, y);
        let tol = -((p / 2) as f64);
        for _ in 0..100 {
            let f0 = (self.f)(&t)?;
            if f0.0.is_zero() {
                return Ok(t);
            }
            let d = ((self.f)(&(t.clone() + h.clone()))? - (self.f)(&(t.clone() - h.clone()))?) / h.mul_i64(2);
            if d.0.is_zero() {
                return Err(Error::MultipleZeroDetected(format!("{:?}", t.with_prec(53))));
            }
            let step = f0 / d;
            t = t - step.clone();
            if step.log2_abs() < tol + t.abs_f64().max(1.0).log2() {
                return Ok(t);
            }
        }
        Err(Error::PrecisionExhausted("Newton iteration for a zero did not converge".into()))
    }

    /// Zeros inside the cell, given its winding number.
    fn locate(&self, x0: f64, x1: f64, y0: f64, y1: f64, count: i64, out: &mut Vec<BigComplex>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if count < 0 {
            return Err(Error::ZeroCountMismatch { expected: 0, found: 0 });
        }
        let size = (x1 - x0).max(y1 - y0);
        if count == 1 && size <= NEWTON_CELL {
            // Newton may wander into a neighbouring cell; only accept a
            // zero inside this one, otherwise keep subdividing.
            if let Ok(t) = self.newton((x0 + x1) / 2.0, (y0 + y1) / 2.0) {
                let (x, y) = self.coordinates(&t);
                let slack = 1e-9;
                if x >= x0 - slack && x <= x1 + slack && y >= y0 - slack && y <= y1 + slack {
                    out.push(t);
                    return Ok(());
                }
            }
        }
        if size < MIN_CELL {
            return Err(Error::MultipleZeroDetected(format!(
                "{count} zeros within a cell of size {size:e} near {:?}",
                self.point(x0, y0).with_prec(53)
            )));
        }
        let xm = (x0 + x1) / 2.0;
        let ym = (y0 + y1) / 2.0;
        let cells = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)];
        let mut sum = 0;
        let mut counts = [0i64; 4];
        for (k, c) in cells.iter().enumerate() {
            counts[k] = self.winding(c.0, c.1, c.2, c.3)?;
            sum += counts[k];
        }
        if sum != count {
            return Err(Error::ZeroCountMismatch {
                expected: count,
                found: sum.max(0) as usize,
            });
        }
        for (k, c) in cells.iter().enumerate() {
            self.locate(c.0, c.1, c.2, c.3, counts[k], out)?;
        }
        Ok(())
    }
}

fn phase_step(fa: &BigComplex, fb: &BigComplex) -> f64 {
    let ratio = fb.clone() / fa.clone();
    rug::Float::with_val(53, ratio.0.arg_ref()).to_f64()
}

/// Offsets `(x, y)` of the cell corner tried when a zero lies on the
/// boundary of the requested cell.
const CORNER_NUDGES: [(f64, f64); 3] = [(0.0, 0.0), (0.0173, 0.0291), (0.0419, -0.0113)];

/// Fits a single entry, given as a closure in `t`. The cell corner `t0` is
/// nudged when the entry vanishes on the cell boundary; the corner used is
/// reported.
pub fn fit_sigma_form_entry(
    f: impl Fn(&BigComplex) -> Result<BigComplex>,
    target: &EntryTarget,
    lattice: &PeriodLattice,
    t0: &BigComplex,
) -> Result<SigmaFit> {
    let mut last = None;
    for (dx, dy) in CORNER_NUDGES {
        let corner = t0.clone() + BigComplex::from_f64(t0.prec(), dx, 0.0) + lattice.omega_prime.mul_f64(dy);
        match fit_in_cell(&f, target, lattice, &corner) {
            Err(e @ Error::Domain(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Distinct zeros of `f` in the cell at `t0` together with the boundary
/// winding number. Zeros that coincide modulo the lattice are rejected.
fn cell_zeros<'f, F: Fn(&BigComplex) -> Result<BigComplex>>(
    f: &'f F,
    lattice: &PeriodLattice,
    t0: &BigComplex,
    expected: Option<i64>,
) -> Result<(Vec<BigComplex>, i64, Sampler<&'f F>)> {
    let prec = lattice.precision;
    let sampler = Sampler {
        f,
        t0: t0.with_prec(prec),
        omega: lattice.omega_prime.with_prec(prec),
        prec,
        cache: RefCell::new(HashMap::new()),
    };
    let winding = sampler.winding(0.0, 1.0, 0.0, 1.0)?;
    if let Some(e) = expected {
        if winding != e {
            return Err(Error::ZeroCountMismatch {
                expected: e,
                found: winding.max(0) as usize,
            });
        }
    }
    let mut found = Vec::new();
    sampler.locate(0.0, 1.0, 0.0, 1.0, winding, &mut found)?;
    let zeros: Vec<BigComplex> = found.iter().map(|t| lattice.reduce(t, t0).0.with_prec(prec)).collect();
    for i in 0..zeros.len() {
        for j in (i + 1)..zeros.len() {
            let (dx, dy) = lattice.cell_coordinates(&(zeros[i].clone() - zeros[j].clone()));
            let dx = dx - dx.round();
            let dy = dy - dy.round();
            if (dx * dx + dy * dy).sqrt() < MULTIPLE_ZERO_GAP {
                return Err(Error::MultipleZeroDetected(format!("{:?}", zeros[i].with_prec(53))));
            }
        }
    }
    if zeros.len() as i64 != winding {
        return Err(Error::ZeroCountMismatch {
            expected: winding,
            found: zeros.len(),
        });
    }
    Ok((zeros, winding, sampler))
}

fn fit_in_cell(
    f: &impl Fn(&BigComplex) -> Result<BigComplex>,
    target: &EntryTarget,
    lattice: &PeriodLattice,
    t0: &BigComplex,
) -> Result<SigmaFit> {
    let prec = lattice.precision;
    let omega = lattice.omega_prime.with_prec(prec);
    let (zeros, winding, sampler) = cell_zeros(f, lattice, t0, Some(target.mu as i64))?;

    let mu = target.mu as i64;
    let s = target.exponent_sum.with_prec(prec);
    let sum = zeros.iter().fold(BigComplex::zero(prec), |acc, a| acc + a.clone());
    let delta = sum - (s.clone() - omega.mul_i64(mu).div_i64(2));
    let wi = omega.im().to_f64();
    let wr = omega.re().to_f64();
    let u = (-delta.im().to_f64() / wi).round() as i64;
    let v = (delta.re().to_f64() + u as f64 * wr).round() as i64;
    let lattice_residual =
        (delta - (BigComplex::one(prec).mul_i64(v) - omega.mul_i64(u))).abs_f64();

    let eta = lattice.eta.with_prec(prec);
    let eta_p = lattice.eta_prime.with_prec(prec);
    let a = -(eta.mul_i64(mu)).div_i64(2);
    let b = eta * (s + BigComplex::one(prec).mul_i64(v))
        - eta_p * (BigComplex::from_f64(prec, mu as f64 / 2.0, 0.0) + BigComplex::one(prec).mul_i64(u));
    let shape = |t: &BigComplex| -> BigComplex {
        let mut acc = (a.clone() * t.clone() * t.clone() + b.clone() * t.clone()).exp();
        for z in &zeros {
            acc = acc * lattice.sigma(&(t.clone() - z.clone())).with_prec(prec);
        }
        acc
    };

    // c from check points spread over the cell, away from its corners.
    let checks: Vec<(f64, f64)> = vec![(0.21, 0.33), (0.67, 0.18), (0.43, 0.71), (0.88, 0.57), (0.12, 0.91), (0.55, 0.46)];
    let mut ratios = Vec::with_capacity(checks.len());
    let mut values = Vec::with_capacity(checks.len());
    for &(x, y) in &checks {
        let t = sampler.point(x, y);
        let fv = f(&t)?;
        let model = shape(&t);
        ratios.push(fv.clone() / model.clone());
        values.push((fv, model));
    }
    let c = ratios.iter().fold(BigComplex::zero(prec), |acc, r| acc + r.clone()).div_i64(ratios.len() as i64);
    let mut fit_residual = 0.0f64;
    for (fv, model) in &values {
        let pred = c.clone() * model.clone();
        let den = fv.abs_f64().max(pred.abs_f64()).max(f64::MIN_POSITIVE);
        fit_residual = fit_residual.max((fv.clone() - pred).abs_f64() / den);
    }
    Ok(SigmaFit {
        t0: t0.with_prec(prec),
        zeros,
        winding,
        u,
        v,
        lattice_residual,
        a,
        b,
        c,
        fit_residual,
    })
}

/// Fits every entry of `P`. Entries that vanish at all probe points are
/// reported as `None`.
pub fn fit_sigma_form(ev: &MonodromyEvaluator, lattice: &PeriodLattice, t0: &BigComplex) -> Result<Vec<Vec<Option<SigmaFit>>>> {
    let n = ev.n();
    let prec = lattice.precision.min(ev.precision());
    let mut out = Vec::with_capacity(n);
    let probes = [(0.37, 0.29), (0.71, 0.83)];
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let f = |t: &BigComplex| -> Result<BigComplex> { Ok(ev.eval_t(t)?[(i, j)].with_prec(prec)) };
            let mut vanishing = true;
            for &(x, y) in &probes {
                let t = t0.clone() + BigComplex::from_f64(prec, x, 0.0) + lattice.omega_prime.mul_f64(y);
                if f(&t)?.log2_abs() > -((prec / 2) as f64) {
                    vanishing = false;
                }
            }
            if vanishing {
                row.push(None);
                continue;
            }
            let target = EntryTarget {
                mu: ev.mu(),
                exponent_sum: ev.sigma()[i].clone() + ev.rho()[j].clone(),
            };
            row.push(Some(fit_sigma_form_entry(f, &target, lattice, t0)?));
        }
        out.push(row);
    }
    Ok(out)
}

/// Zeros of `det P` in one period cell.
#[derive(Clone, Debug, Serialize)]
pub struct DetZeros {
    pub t0: BigComplex,
    pub zeros: Vec<BigComplex>,
    pub winding: i64,
}

/// Locates the zeros of `det P` in the cell at `t0` and checks that they
/// are simple; a repeated zero is a `MultipleZeroDetected` error.
pub fn det_zeros(ev: &MonodromyEvaluator, lattice: &PeriodLattice, t0: &BigComplex) -> Result<DetZeros> {
    let prec = lattice.precision.min(ev.precision());
    let f = |t: &BigComplex| -> Result<BigComplex> { Ok(ev.eval_t(t)?.det().with_prec(prec)) };
    let mut last = None;
    for (dx, dy) in CORNER_NUDGES {
        let corner = t0.clone() + BigComplex::from_f64(t0.prec(), dx, 0.0) + lattice.omega_prime.mul_f64(dy);
        match cell_zeros(&f, lattice, &corner, None) {
            Ok((zeros, winding, _)) => {
                return Ok(DetZeros {
                    t0: corner.with_prec(prec),
                    zeros,
                    winding,
                })
            }
            Err(e @ Error::Domain(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::super::tests::mu_one_instance;
    use super::*;
    use crate::elliptic::lattice_constants;

    fn big(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(128, re, im)
    }

    #[test]
    fn planted_entry_recovered() {
        let lat = lattice_constants(&big(2.0, 0.0), 128).unwrap();
        let w = lat.omega_prime.clone();
        let mu = 2i64;
        let s = big(0.3, -0.2);
        let (u, v) = (1i64, -2i64);
        let a1 = big(0.1, 0.0) + w.mul_f64(0.35);
        // a2 from the lattice condition.
        let a2 = s.clone() - w.mul_i64(mu).div_i64(2) + BigComplex::one(128).mul_i64(v) - w.mul_i64(u) - a1.clone();
        let a = -(lat.eta.mul_i64(mu)).div_i64(2);
        let b = lat.eta.clone() * (s.clone() + BigComplex::one(128).mul_i64(v))
            - lat.eta_prime.clone() * (big(1.0, 0.0) + BigComplex::one(128).mul_i64(u));
        let c = big(0.7, 1.3);
        let entry = |t: &BigComplex| -> Result<BigComplex> {
            Ok(c.clone()
                * (a.clone() * t.clone() * t.clone() + b.clone() * t.clone()).exp()
                * lat.sigma(&(t.clone() - a1.clone()))
                * lat.sigma(&(t.clone() - a2.clone())))
        };
        let t0 = big(-0.5, 0.0) - w.mul_f64(0.5) + big(0.013, 0.0);
        let fit = fit_sigma_form_entry(entry, &EntryTarget { mu: 2, exponent_sum: s }, &lat, &t0).unwrap();
        assert_eq!(fit.winding, 2);
        let planted = [lat.reduce(&a1, &t0).0, lat.reduce(&a2, &t0).0];
        for p in &planted {
            let best = fit.zeros.iter().map(|z| (z.clone() - p.clone()).abs_f64()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "{best:e}");
        }
        assert!(fit.lattice_residual < 1e-6);
        assert!(fit.fit_residual < 1e-6, "{:e}", fit.fit_residual);
    }

    #[test]
    fn det_zeros_are_simple() {
        let s = mu_one_instance();
        let ev = MonodromyEvaluator::new(&s, 128).unwrap();
        let lat = lattice_constants(&s.q_big(128), 128).unwrap();
        let t0 = big(-0.5, 0.0) - lat.omega_prime.mul_f64(0.5) + big(0.011, 0.0);
        let dz = det_zeros(&ev, &lat, &t0).unwrap();
        // n·μ zeros per cell.
        assert_eq!(dz.winding, 2);
        assert_eq!(dz.zeros.len(), 2);
    }

    #[test]
    fn double_zero_detected() {
        let lat = lattice_constants(&big(2.0, 0.0), 128).unwrap();
        let a = big(0.1, 0.0) + lat.omega_prime.mul_f64(0.35);
        let f = |t: &BigComplex| -> Result<BigComplex> {
            let s = lat.sigma(&(t.clone() - a.clone()));
            Ok(s.clone() * s)
        };
        let t0 = big(-0.5, 0.0) - lat.omega_prime.mul_f64(0.5) + big(0.013, 0.0);
        let target = EntryTarget {
            mu: 2,
            exponent_sum: big(0.0, 0.0),
        };
        let r = fit_sigma_form_entry(f, &target, &lat, &t0);
        assert!(matches!(r, Err(Error::MultipleZeroDetected(_))), "{r:?}");
    }

    #[test]
    fn monodromy_entries_fit() {
        let s = mu_one_instance();
        let ev = MonodromyEvaluator::new(&s, 128).unwrap();
        let lat = lattice_constants(&s.q_big(128), 128).unwrap();
        let t0 = big(-0.5, 0.0) - lat.omega_prime.mul_f64(0.5) + big(0.011, 0.0);
        let fits = fit_sigma_form(&ev, &lat, &t0).unwrap();
        for row in &fits {
            for fit in row.iter().flatten() {
                assert_eq!(fit.winding, 1);
                assert!(fit.lattice_residual < 1e-6, "{:e}", fit.lattice_residual);
                assert!(fit.fit_residual < 1e-6, "{:e}", fit.fit_residual);
            }
        }
    }
}
