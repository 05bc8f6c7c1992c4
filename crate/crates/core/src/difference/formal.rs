//! Formal solutions
//! `Ŷ(z) = z^{rz} e^{-rz} (Ŷ_0 + Ŷ_1/z + …) diag(ρ_k^z z^{d_k - r/2})`.
//!
//! The power exponent carries the `-r/2` offset because `z^{rz}e^{-rz}`
//! differs from `Γ(z)^r` by `z^{r/2}` up to a constant; with it the
//! characteristic constants `d_k` satisfy `ρ_k d_k = (A_{r-1})_{kk}` and the
//! Fuchs relation exactly.

use super::DifferenceSystem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{BigComplex, ExactComplex, Scalar};

#[derive(Clone, Debug)]
pub struct DiffFormalSolution<T: Scalar = ExactComplex> {
    pub r: i32,
    pub rho: Vec<T>,
    /// Characteristic constants `d_k`.
    pub d: Vec<T>,
    /// `Ŷ_0, …, Ŷ_N`.
    pub coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> DiffFormalSolution<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exponent of `z` in column `k`: `d_k - r/2`.
    pub fn power_exponent(&self, k: usize) -> T {
        let d = &self.d[k];
        d.clone() - d.from_i64_like(self.r as i64) / d.from_i64_like(2)
    }
}

/// Coefficients of `exp(r Σ_{m≥1} (-1)^{m+1} w^m / (m(m+1)))`, the ratio
/// `Φ(z+1) / (z^r Φ(z))` for `Φ = z^{rz}e^{-rz}` in `w = 1/z`.
pub(crate) fn prefactor_ratio_series<T: Scalar>(r: i32, len: usize, proto: &T) -> Vec<T> {
    let f: Vec<T> = (0..len)
        .map(|m| {
            if m == 0 {
                proto.zero_like()
            } else {
                let sign = if m % 2 == 1 { 1 } else { -1 };
                proto.from_i64_like(sign * r as i64) / proto.from_i64_like((m * (m + 1)) as i64)
            }
        })
        .collect();
    exp_series(&f, proto)
}

/// `exp(f)` for a series with `f_0 = 0`, via `n E_n = Σ j f_j E_{n-j}`.
pub(crate) fn exp_series<T: Scalar>(f: &[T], proto: &T) -> Vec<T> {
    let len = f.len();
    let mut e = vec![proto.zero_like(); len];
    if len == 0 {
        return e;
    }
    e[0] = proto.one_like();
    for n in 1..len {
        let mut acc = proto.zero_like();
        for j in 1..=n {
            if !f[j].is_zero() {
                acc = acc + proto.from_i64_like(j as i64) * f[j].clone() * e[n - j].clone();
            }
        }
        e[n] = acc / proto.from_i64_like(n as i64);
    }
    e
}

/// Coefficients of `(1+w)^a`.
pub(crate) fn binomial_series<T: Scalar>(a: &T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut b = a.one_like();
    for j in 0..len {
        if j > 0 {
            b = b * (a.clone() - a.from_i64_like(j as i64 - 1)) / a.from_i64_like(j as i64);
        }
        out.push(b.clone());
    }
    out
}

fn series_mul<T: Scalar>(a: &[T], b: &[T], len: usize, proto: &T) -> Vec<T> {
    (0..len)
        .map(|n| {
            let mut acc = proto.zero_like();
            for j in 0..=n {
                if j < a.len() && n - j < b.len() && !a[j].is_zero() && !b[n - j].is_zero() {
                    acc = acc + a[j].clone() * b[n - j].clone();
                }
            }
            acc
        })
        .collect()
}

/// Working data for the order-by-order recursion.
struct Recursion<T: Scalar> {
    n: usize,
    rho: Vec<T>,
    /// `Ã_j = A_{r-j}`.
    atilde: Vec<Mat<T>>,
    /// `G_k = E(w)(1+w)^{d_k - r/2}`, per column.
    g: Vec<Vec<T>>,
    binom: Vec<Vec<T>>,
    proto: T,
}

impl<T: Scalar> Recursion<T> {
    /// Column `k` of `[w^m] S(z+1)`, from `Ŷ_0..Ŷ_m`.
    fn shifted_col(&self, y: &[Mat<T>], m: usize, k: usize) -> Vec<T> {
        let mut out = vec![self.proto.zero_like(); self.n];
        for (p, yp) in y.iter().enumerate().take(m + 1) {
            // [w^{m-p}] (1+w)^{-p}
            let c = &self.binom[p][m - p];
            if c.is_zero() {
                continue;
            }
            for i in 0..self.n {
                out[i] = out[i].clone() + yp[(i, k)].clone() * c.clone();
            }
        }
        out
    }

    fn shifted(&self, y: &[Mat<T>], m: usize) -> Mat<T> {
        let cols: Vec<Vec<T>> = (0..self.n).map(|k| self.shifted_col(y, m, k)).collect();
        Mat::from_fn(self.n, self.n, |i, k| cols[k][i].clone())
    }

    /// `[w^n]` of `Ã(w)S(w) - E(w)S(z+1)diag(ρ_k(1+w)^{e_k})`, column `k`.
    /// `cache[m]` holds `[w^m] S(z+1)` for coefficients that are final.
    fn residual_col(&self, y: &[Mat<T>], cache: &[Mat<T>], n: usize, k: usize) -> Vec<T> {
        let mut out = vec![self.proto.zero_like(); self.n];
        for j in 0..=n.min(self.atilde.len() - 1) {
            if n - j >= y.len() {
                continue;
            }
            let col = y[n - j].col(k);
            let prod = self.atilde[j].mul_vec(&col);
            for i in 0..self.n {
                out[i] = out[i].clone() + prod[i].clone();
            }
        }
        for j in 0..=n {
            let gk = &self.g[k][j];
            if gk.is_zero() {
                continue;
            }
            let m = n - j;
            let t = if m < cache.len() {
                cache[m].col(k)
            } else {
                self.shifted_col(y, m, k)
            };
            let f = gk.clone() * self.rho[k].clone();
            for i in 0..self.n {
                out[i] = out[i].clone() - t[i].clone() * f.clone();
            }
        }
        out
    }
}

/// Table `[p][j] = [w^j](1+w)^{-p}` for `p + j < len`, from
/// `b[p][j] = b[p-1][j] - b[p][j-1]`.
fn binom_table<T: Scalar>(len: usize, proto: &T) -> Vec<Vec<T>> {
    let mut t: Vec<Vec<T>> = Vec::with_capacity(len);
    let mut first = vec![proto.zero_like(); len];
    if len > 0 {
        first[0] = proto.one_like();
    }
    t.push(first);
    for p in 1..len {
        let mut row: Vec<T> = Vec::with_capacity(len - p);
        for j in 0..len - p {
            let v = if j == 0 {
                t[p - 1][0].clone()
            } else {
                t[p - 1][j].clone() - row[j - 1].clone()
            };
            row.push(v);
        }
        t.push(row);
    }
    t
}

fn build_recursion<T: Scalar>(s: &DifferenceSystem, len: usize, proto: &T) -> Recursion<T> {
    let n = s.n();
    let r = s.r() as usize;
    let lift = |x: &ExactComplex| proto.from_exact_like(x);
    let rho: Vec<T> = s.rho().iter().map(lift).collect();
    let span = (s.r() - s.low()) as usize;
    let atilde = (0..=span).map(|j| s.coeff(s.r() - j as i32).map(lift)).collect();
    let e = prefactor_ratio_series(r as i32, len, proto);
    let d: Vec<T> = s.d().iter().map(lift).collect();
    let g = (0..n)
        .map(|k| {
            let ek = d[k].clone() - proto.from_i64_like(r as i64) / proto.from_i64_like(2);
            series_mul(&e, &binomial_series(&ek, len), len, proto)
        })
        .collect();
    Recursion {
        n,
        rho,
        atilde,
        g,
        binom: binom_table(len, proto),
        proto: proto.clone(),
    }
}

/// Formal solution to order `order`, in the arithmetic of `proto`
/// (exact when `proto` is an [`ExactComplex`], numeric for a
/// [`BigComplex`] of the working precision).
pub fn formal_solution_difference_in<T: Scalar>(
    s: &DifferenceSystem,
    order: usize,
    proto: &T,
) -> Result<DiffFormalSolution<T>> {
    let n = s.n();
    let len = order + 2;
    let rec = build_recursion(s, len, proto);
    for k in 0..n {
        for l in 0..n {
            if k != l && (rec.rho[k].clone() - rec.rho[l].clone()).is_zero() {
                return Err(Error::Resonance(format!("rho_{k} = rho_{l}")));
            }
        }
    }
    let mut y: Vec<Mat<T>> = vec![Mat::identity_like(n, proto)];
    let mut cache: Vec<Mat<T>> = Vec::new();
    for step in 1..=(order + 1) {
        // Ŷ_0..Ŷ_{step-2} are final here.
        while cache.len() + 1 < step {
            let m = cache.len();
            cache.push(rec.shifted(&y, m));
        }
        // Diagonal of Ŷ_{step-1} from the diagonal equations at this order.
        if step >= 2 {
            let prev = step - 1;
            for k in 0..n {
                y[prev][(k, k)] = proto.zero_like();
                let res = rec.residual_col(&y, &cache, step, k);
                let coef = rec.rho[k].clone() * proto.from_i64_like(prev as i64);
                y[prev][(k, k)] = -(res[k].clone() / coef);
            }
        } else {
            // Order one, diagonal: the d-relation; must vanish identically.
            for k in 0..n {
                let res = rec.residual_col(&y, &cache, 1, k);
                if !res[k].is_zero() && !is_tiny(&res[k]) {
                    return Err(Error::Resonance(format!(
                        "solvability condition fails in column {k}"
                    )));
                }
            }
        }
        if step > order {
            break;
        }
        y.push(Mat::zeros_like(n, n, proto));
        for k in 0..n {
            let res = rec.residual_col(&y, &cache, step, k);
            for i in 0..n {
                if i != k {
                    y[step][(i, k)] = res[i].clone() / (rec.rho[k].clone() - rec.rho[i].clone());
                }
            }
        }
    }
    let d: Vec<T> = s.d().iter().map(|x| proto.from_exact_like(x)).collect();
    Ok(DiffFormalSolution {
        r: s.r(),
        rho: rec.rho,
        d,
        coeffs: y,
    })
}

fn is_tiny<T: Scalar>(x: &T) -> bool {
    // Numeric residuals are roundoff-sized; exact ones are compared to zero.
    let k = x.pivot_key();
    k != 0.0 && k < -40.0
}

/// Exact formal solution.
pub fn formal_solution_difference(s: &DifferenceSystem, order: usize) -> Result<DiffFormalSolution> {
    formal_solution_difference_in(s, order, &ExactComplex::zero())
}

/// Order-`n` residual matrices of the substitution identity for a computed
/// solution, `n = 1..=order`. All vanish exactly in exact mode.
pub fn substitution_residuals<T: Scalar>(s: &DifferenceSystem, sol: &DiffFormalSolution<T>) -> Vec<Mat<T>> {
    let proto = sol.rho[0].clone();
    let len = sol.order() + 2;
    let rec = build_recursion(s, len, &proto);
    let cache: Vec<Mat<T>> = (0..sol.coeffs.len()).map(|m| rec.shifted(&sol.coeffs, m)).collect();
    (1..=sol.order())
        .map(|n| {
            let cols: Vec<Vec<T>> = (0..s.n()).map(|k| rec.residual_col(&sol.coeffs, &cache, n, k)).collect();
            Mat::from_fn(s.n(), s.n(), |i, k| cols[k][i].clone())
        })
        .collect()
}

/// Size of the substitution residual of the order-`N` truncation at `z`,
/// in the normalized form `‖Ã(w)S_N(z) - E(z) S_N(z+1) diag(ρ_k(1+1/z)^{d_k-r/2})‖`
/// with `E(z) = (1+1/z)^{r(z+1)} e^{-r}` evaluated in closed form.
pub fn series_residual(s: &DifferenceSystem, sol: &DiffFormalSolution, z: &BigComplex) -> f64 {
    let prec = z.prec();
    let n = s.n();
    let r = s.r() as i64;
    let one = BigComplex::one(prec);
    let eval_s = |x: &BigComplex| -> Mat<BigComplex> {
        let inv = one.clone() / x.clone();
        let mut acc = Mat::zeros_like(n, n, &one);
        let mut p = one.clone();
        for c in &sol.coeffs {
            acc = acc.add(&c.to_big(prec).scale(&p));
            p = p * inv.clone();
        }
        acc
    };
    let w = one.clone() / z.clone();
    let onew = one.clone() + w.clone();
    let ln1w = onew.ln();
    let e = (ln1w.clone() * (z.clone() + one.clone()).mul_i64(r) - one.mul_i64(r)).exp();
    let mut atil = Mat::zeros_like(n, n, &one);
    let mut p = one.clone();
    for j in 0..=(r - s.low() as i64) {
        atil = atil.add(&s.coeff((r - j) as i32).to_big(prec).scale(&p));
        p = p * w.clone();
    }
    let lhs = atil.mul(&eval_s(z));
    let shifted = eval_s(&(z.clone() + one.clone()));
    let diag: Vec<BigComplex> = (0..n)
        .map(|k| {
            let ek = sol.power_exponent(k).to_big(prec);
            sol.rho[k].to_big(prec) * (ln1w.clone() * ek).exp()
        })
        .collect();
    let rhs = shifted.mul(&Mat::diag_from(&diag)).scale(&e);
    lhs.sub(&rhs).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difference::tests::worked_instance;
    use crate::matrix::PolyMat;

    fn c(v: i64) -> ExactComplex {
        ExactComplex::real(v)
    }

    #[test]
    fn prefactor_first_terms() {
        // exp(r(w/2 - w^2/6 + …)) with r = 2: 1 + w + w^2/6 + …
        let e = prefactor_ratio_series(2, 3, &ExactComplex::zero());
        assert_eq!(e[1], c(1));
        assert_eq!(e[2], ExactComplex::ratio(1, 6));
    }

    #[test]
    fn scalar_constant_system() {
        let s = DifferenceSystem::from_coeffs(&[Mat::diag_from(&[ExactComplex::new(2, 1)])]).unwrap();
        let sol = formal_solution_difference(&s, 5).unwrap();
        assert_eq!(sol.d, vec![c(0)]);
        assert!(sol.coeffs[1..].iter().all(|m| m.is_zero()));
    }

    #[test]
    fn decoupled_has_no_corrections() {
        let a1 = Mat::diag_from(&[c(1), ExactComplex::i()]);
        let s = DifferenceSystem::from_coeffs(&[Mat::zeros(2, 2), a1]).unwrap();
        let sol = formal_solution_difference(&s, 6).unwrap();
        assert_eq!(sol.d, vec![c(0), c(0)]);
        // With d = 0 and r = 1 the exponent is -1/2: the scalar Stirling series
        // appears on the diagonal but nothing couples the columns.
        assert!(sol.coeffs.iter().all(|m| m.is_diagonal()));
    }

    #[test]
    fn gamma_function_stirling() {
        // Y(z+1) = z Y(z): Γ(z)/√(2π) = z^{z-1/2}e^{-z}(1 + 1/(12z) + 1/(288z^2) - …)
        let s = DifferenceSystem::from_coeffs(&[Mat::zeros(1, 1), Mat::identity(1)]).unwrap();
        let sol = formal_solution_difference(&s, 3).unwrap();
        assert_eq!(sol.coeffs[1][(0, 0)], ExactComplex::ratio(1, 12));
        assert_eq!(sol.coeffs[2][(0, 0)], ExactComplex::ratio(1, 288));
        assert_eq!(sol.coeffs[3][(0, 0)], ExactComplex::ratio(-139, 51840));
    }

    #[test]
    fn worked_instance_identity_holds_exactly() {
        let s = worked_instance();
        let sol = formal_solution_difference(&s, 6).unwrap();
        assert_eq!(sol.d, vec![c(2), c(3)]);
        for m in substitution_residuals(&s, &sol) {
            assert!(m.is_zero());
        }
    }

    #[test]
    fn laurent_identity_holds_exactly() {
        let a0 = Mat::from_rows(vec![vec![c(2), c(1)], vec![c(1), ExactComplex::new(0, 3)]]);
        let am1 = Mat::from_rows(vec![vec![c(0), c(5)], vec![ExactComplex::new(1, 1), c(0)]]);
        let a1 = Mat::diag_from(&[c(1), ExactComplex::i()]);
        let a = PolyMat::from_coeff_mats(2, 2, &[(-1, am1), (0, a0), (1, a1)]);
        let s = DifferenceSystem::new_laurent(a).unwrap();
        assert_eq!(s.low(), -1);
        let sol = formal_solution_difference(&s, 6).unwrap();
        for m in substitution_residuals(&s, &sol) {
            assert!(m.is_zero());
        }
        // Order-6 truncation: the residual falls like |z|^-7.
        let r40 = series_residual(&s, &sol, &BigComplex::from_f64(256, 40.0, 3.0));
        let r80 = series_residual(&s, &sol, &BigComplex::from_f64(256, 80.0, 6.0));
        let slope = (r80 / r40).log2();
        assert!((slope + 7.0).abs() < 0.7, "{slope}");
    }

    #[test]
    fn numeric_matches_exact() {
        let s = worked_instance();
        let ex = formal_solution_difference(&s, 5).unwrap();
        let nu = formal_solution_difference_in(&s, 5, &BigComplex::zero(200)).unwrap();
        for (a, b) in ex.coeffs.iter().zip(&nu.coeffs) {
            assert!(a.to_big(200).sub(b).max_abs() < 1e-50);
        }
    }
}
