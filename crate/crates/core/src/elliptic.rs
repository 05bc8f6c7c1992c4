//! Weierstrass sigma function for the lattice `ℤ·1 + ℤ·ω′`, `ω′ = 2πi/ln q`.
//!
//! Conventions: `σ(t+1) = -e^{η(t+1/2)}σ(t)`, `σ(t+ω′) = -e^{η′(t+ω′/2)}σ(t)`
//! and `ηω′ - η′ = 2πi`. Evaluation goes through the odd theta function
//! with nome `e^{iπω′}`:
//!
//! `σ(t) = e^{ηt²/2} θ₁(πt) / (π θ₁′(0))`, `η = -π² θ₁‴(0) / (3 θ₁′(0))`.
//!
//! `η′` is computed independently as `ζ(t₀+ω′) - ζ(t₀)` so that the Legendre
//! relation is a genuine check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{check_precision, BigComplex};

/// Bits carried beyond the requested precision.
const GUARD_BITS: u32 = 64;

#[derive(Clone, Debug, Serialize)]
pub struct PeriodLattice {
    pub precision: u32,
    pub q: BigComplex,
    pub ln_q: BigComplex,
    pub omega_prime: BigComplex,
    pub nome: BigComplex,
    pub eta: BigComplex,
    pub eta_prime: BigComplex,
    /// `|ηω′ - η′ - 2πi|`.
    pub legendre_residual: f64,
    #[serde(skip)]
    theta1_prime0: BigComplex,
    #[serde(skip)]
    wp: u32,
}

/// The three theta series needed here, summed together.
struct ThetaSums {
    value: BigComplex,
    derivative: BigComplex,
    /// `log2` of the largest term, for cancellation control.
    max_log2: f64,
}

fn theta1_sums(v: &BigComplex, omega_prime: &BigComplex, wp: u32) -> ThetaSums {
    let v = v.with_prec(wp);
    let i_pi_tau = BigComplex::i(wp) * BigComplex::pi(wp) * omega_prime.with_prec(wp);
    let mut value = BigComplex::zero(wp);
    let mut derivative = BigComplex::zero(wp);
    let mut max_log2 = f64::NEG_INFINITY;
    let im_v = v.im().to_f64().abs();
    let im_tau = omega_prime.im().to_f64();
    // Terms peak near n + 1/2 ≈ |Im v| / (π Im τ) and then decay like a Gaussian.
    let peak = im_v / (std::f64::consts::PI * im_tau);
    let mut n = 0u64;
    loop {
        let h = n as f64 + 0.5;
        let h2 = BigComplex::from_f64(wp, h * h, 0.0);
        let weight = (i_pi_tau.clone() * h2).exp();
        let m = (2 * n + 1) as i64;
        let arg = v.mul_i64(m);
        let s = weight.clone() * arg.sin();
        let c = weight * arg.cos().mul_i64(m);
        let (s, c) = if n % 2 == 1 { (-s, -c) } else { (s, c) };
        let t = s.log2_abs().max(c.log2_abs());
        max_log2 = max_log2.max(t);
        value = value + s;
        derivative = derivative + c;
        if h > peak + 1.0 && t < max_log2 - wp as f64 - 8.0 {
            break;
        }
        n += 1;
    }
    ThetaSums {
        value: value.mul_i64(2),
        derivative: derivative.mul_i64(2),
        max_log2,
    }
}

/// `(θ₁′(0), θ₁‴(0))`.
fn theta1_derivatives_at_zero(omega_prime: &BigComplex, wp: u32) -> (BigComplex, BigComplex) {
    let i_pi_tau = BigComplex::i(wp) * BigComplex::pi(wp) * omega_prime.with_prec(wp);
    let mut d1 = BigComplex::zero(wp);
    let mut d3 = BigComplex::zero(wp);
    let mut n = 0u64;
    loop {
        let h = n as f64 + 0.5;
        let weight = (i_pi_tau.clone() * BigComplex::from_f64(wp, h * h, 0.0)).exp();
        let m = (2 * n + 1) as i64;
        let a = weight.mul_i64(m);
        let b = weight.mul_i64(m * m * m);
        let (a, b) = if n % 2 == 1 { (-a, -b) } else { (a, b) };
        let small = b.log2_abs() < d1.log2_abs() - wp as f64 - 8.0;
        d1 = d1 + a;
        d3 = d3 - b;
        if n > 0 && small {
            break;
        }
        n += 1;
    }
    (d1.mul_i64(2), d3.mul_i64(2))
}

impl PeriodLattice {
    /// `θ₁(πt)` and `θ₁′(πt)` with enough extra bits to absorb cancellation.
    fn theta_at(&self, t: &BigComplex) -> (BigComplex, BigComplex) {
        let pi = BigComplex::pi(self.wp);
        let mut wp = self.wp;
        loop {
            let v = pi.with_prec(wp) * t.with_prec(wp);
            let sums = theta1_sums(&v, &self.omega_prime, wp);
            let size = sums.value.log2_abs();
            let loss = if size.is_finite() { sums.max_log2 - size } else { 0.0 };
            let spare = (wp - self.wp) as f64;
            if loss < spare + (GUARD_BITS / 2) as f64 || wp > self.wp + 4096 {
                return (sums.value, sums.derivative);
            }
            wp = self.wp + loss.ceil() as u32 + GUARD_BITS;
        }
    }

    pub fn omega(&self) -> BigComplex {
        BigComplex::one(self.precision)
    }

    /// `σ(t)`.
    pub fn sigma(&self, t: &BigComplex) -> BigComplex {
        let t = t.with_prec(self.wp);
        let (th, _) = self.theta_at(&t);
        let gauss = (self.eta.with_prec(self.wp) * t.clone() * t.clone()).div_i64(2).exp();
        let out = gauss * th / (BigComplex::pi(self.wp) * self.theta1_prime0.clone());
        out.with_prec(self.precision)
    }

    /// `ζ(t) = σ′(t)/σ(t)`.
    pub fn zeta(&self, t: &BigComplex) -> BigComplex {
        let t = t.with_prec(self.wp);
        let (th, dth) = self.theta_at(&t);
        self.eta.clone() * t + BigComplex::pi(self.wp) * dth / th
    }

    /// Relative residuals of both quasi-periodicity identities at `t`.
    pub fn quasi_periodicity_residuals(&self, t: &BigComplex) -> (f64, f64) {
        let half = BigComplex::from_f64(self.wp, 0.5, 0.0);
        let t = t.with_prec(self.wp);
        let s = self.sigma(&t).with_prec(self.wp);
        let one = BigComplex::one(self.wp);
        let s1 = self.sigma(&(t.clone() + one)).with_prec(self.wp);
        let r1 = s1.clone() + (self.eta.clone() * (t.clone() + half.clone())).exp() * s.clone();
        let w = self.omega_prime.clone();
        let s2 = self.sigma(&(t.clone() + w.clone())).with_prec(self.wp);
        let r2 = s2.clone() + (self.eta_prime.clone() * (t + w * half)).exp() * s;
        (
            r1.abs_f64() / s1.abs_f64().max(f64::MIN_POSITIVE),
            r2.abs_f64() / s2.abs_f64().max(f64::MIN_POSITIVE),
        )
    }

    /// Reduces `t` into the period cell `t₀ + [0,1)·1 + [0,1)·ω′`,
    /// returning the reduced point and the integers `(m, k)` with
    /// `t = reduced + m + k ω′`.
    pub fn reduce(&self, t: &BigComplex, t0: &BigComplex) -> (BigComplex, i64, i64) {
        let (x, y) = self.cell_coordinates(&(t.clone() - t0.clone()));
        let m = x.floor() as i64;
        let k = y.floor() as i64;
        let r = t.clone() - BigComplex::one(t.prec()).mul_i64(m) - self.omega_prime.mul_i64(k);
        (r, m, k)
    }

    /// Real coordinates `(x, y)` with `t = x + y ω′`.
    pub fn cell_coordinates(&self, t: &BigComplex) -> (f64, f64) {
        let wi = self.omega_prime.im().to_f64();
        let wr = self.omega_prime.re().to_f64();
        let y = t.im().to_f64() / wi;
        let x = t.re().to_f64() - y * wr;
        (x, y)
    }
}

/// Periods, nome and quasi-periods for `q` with `|q| > 1`.
pub fn lattice_constants(q: &BigComplex, precision: u32) -> Result<PeriodLattice> {
    let precision = check_precision(precision)?;
    let wp = precision + GUARD_BITS;
    let q = q.with_prec(wp);
    if q.abs_f64() <= 1.0 {
        return Err(Error::InvalidInput("lattice needs |q| > 1".into()));
    }
    let ln_q = q.ln();
    let omega_prime = BigComplex::two_pi_i(wp) / ln_q.clone();
    let nome = (BigComplex::i(wp) * BigComplex::pi(wp) * omega_prime.clone()).exp();
    let (d1, d3) = theta1_derivatives_at_zero(&omega_prime, wp);
    if !d1.is_finite() || d1.abs_f64() == 0.0 {
        return Err(Error::PrecisionExhausted("theta derivative at 0 vanished".into()));
    }
    let pi = BigComplex::pi(wp);
    let eta = -(pi.clone() * pi.clone() * d3) / (d1.clone().mul_i64(3));
    let mut lattice = PeriodLattice {
        precision,
        q: q.with_prec(precision),
        ln_q,
        omega_prime: omega_prime.clone(),
        nome,
        eta,
        eta_prime: BigComplex::zero(wp),
        legendre_residual: f64::NAN,
        theta1_prime0: d1,
        wp,
    };
    // Independent η′ from the logarithmic derivative at a generic point.
    let t0 = BigComplex::from_f64(wp, 0.31, 0.0) + omega_prime.mul_f64(0.23);
    let z1 = lattice.zeta(&(t0.clone() + omega_prime.clone()));
    let z0 = lattice.zeta(&t0);
    lattice.eta_prime = z1 - z0;
    let legendre = lattice.eta.clone() * omega_prime - lattice.eta_prime.clone() - BigComplex::two_pi_i(wp);
    lattice.legendre_residual = legendre.abs_f64();
    if !lattice.eta.is_finite() || !lattice.eta_prime.is_finite() {
        return Err(Error::PrecisionExhausted("quasi-periods are not finite".into()));
    }
    Ok(lattice)
}

/// `σ(t)` on the given lattice.
pub fn sigma_eval(t: &BigComplex, lattice: &PeriodLattice) -> BigComplex {
    lattice.sigma(t)
}
