//! Polynomial roots and eigenvalues.
//!
//! Numeric roots come from the eigenvalues of the companion matrix, computed
//! by shifted complex QR iteration at elevated precision and then polished by
//! Newton's method. Exact roots are obtained by recognizing the numeric ones
//! as Gaussian rationals and confirming them by exact division.

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::matrix::{Mat, PolyMat};
use crate::poly::LaurentPoly;
use crate::scalar::{BigComplex, ExactComplex, Scalar};

/// Extra bits carried by the eigenvalue iteration.
const GUARD_BITS: u32 = 64;

#[derive(Clone, Debug)]
pub struct RootSet {
    /// Finite nonzero roots with multiplicities.
    pub roots: Vec<(BigComplex, usize)>,
    /// Exponent of the `z^low` factor that was stripped before solving.
    pub low_exponent: i32,
}

impl RootSet {
    /// Roots repeated according to multiplicity.
    pub fn flat(&self) -> Vec<BigComplex> {
        self.roots
            .iter()
            .flat_map(|(r, m)| std::iter::repeat(r.clone()).take(*m))
            .collect()
    }
}

fn big_from_float(f: Float) -> BigComplex {
    let p = f.prec();
    BigComplex::from_floats(f, Float::new(p))
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and deflation.
pub fn hessenberg_eigenvalues(mut h: Mat<BigComplex>) -> Result<Vec<BigComplex>> {
    let n = h.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let prec = h.prec();
    let mut eig: Vec<Option<BigComplex>> = vec![None; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let scale = h.max_abs().max(f64::MIN_POSITIVE).log2();
    let negligible = |h: &Mat<BigComplex>, k: usize| -> bool {
        let sub = h[(k, k - 1)].log2_abs();
        if sub == f64::NEG_INFINITY {
            return true;
        }
        let diag = h[(k, k)].abs_f64() + h[(k - 1, k - 1)].abs_f64();
        let reference = if diag > 0.0 { diag.log2() } else { scale };
        sub < reference - prec as f64 + 2.0
    };
    loop {
        if hi == 0 {
            eig[0] = Some(h[(0, 0)].clone());
            break;
        }
        let mut l = hi;
        while l > 0 {
            if negligible(&h, l) {
                h[(l, l - 1)] = BigComplex::zero(prec);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = Some(h[(hi, hi)].clone());
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 100 * n + 100 {
            return Err(Error::PrecisionExhausted(
                "QR iteration did not converge".into(),
            ));
        }
        let a = h[(hi - 1, hi - 1)].clone();
        let b = h[(hi - 1, hi)].clone();
        let c = h[(hi, hi - 1)].clone();
        let d = h[(hi, hi)].clone();
        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            d.clone() + h[(hi, hi - 1)].mul_f64(1.5) + BigComplex::from_f64(prec, 0.0, 0.25).mul_f64(c.abs_f64())
        } else {
            let half = (a.clone() + d.clone()).div_i64(2);
            let diff = (a.clone() - d.clone()).div_i64(2);
            let disc = (diff.clone() * diff + b * c).sqrt();
            let m1 = half.clone() + disc.clone();
            let m2 = half - disc;
            if (m1.clone() - d.clone()).abs_f64() <= (m2.clone() - d.clone()).abs_f64() {
                m1
            } else {
                m2
            }
        };
        qr_step(&mut h, l, hi, &mu);
    }
    Ok(eig.into_iter().map(|e| e.expect("all eigenvalues set")).collect())
}

fn qr_step(h: &mut Mat<BigComplex>, l: usize, hi: usize, mu: &BigComplex) {
    let prec = h.prec();
    for k in l..=hi {
        let v = h[(k, k)].clone() - mu.clone();
        h[(k, k)] = v;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let x = h[(k, k)].clone();
        let y = h[(k + 1, k)].clone();
        let r = (x.abs().square() + y.abs().square()).sqrt();
        let (c, s) = if r.is_zero() {
            (BigComplex::one(prec), BigComplex::zero(prec))
        } else {
            let rc = big_from_float(r);
            (x / rc.clone(), y / rc)
        };
        for j in k..=hi {
            let hk = h[(k, j)].clone();
            let hk1 = h[(k + 1, j)].clone();
            h[(k, j)] = c.conj() * hk.clone() + s.conj() * hk1.clone();
            h[(k + 1, j)] = c.clone() * hk1 - s.clone() * hk;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = l + idx;
        for i in l..=(k + 1).min(hi) {
            let hk = h[(i, k)].clone();
            let hk1 = h[(i, k + 1)].clone();
            h[(i, k)] = hk.clone() * c.clone() + hk1.clone() * s.clone();
            h[(i, k + 1)] = hk1 * c.conj() - hk * s.conj();
        }
    }
    for k in l..=hi {
        let v = h[(k, k)].clone() + mu.clone();
        h[(k, k)] = v;
    }
}

/// Reduces a general square matrix to upper Hessenberg form by Householder
/// reflections (similarity, so eigenvalues are preserved).
pub fn to_hessenberg(m: &Mat<BigComplex>) -> Mat<BigComplex> {
    let n = m.rows();
    let prec = m.prec();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = Float::new(prec);
        for i in (k + 1)..n {
            norm2 += h[(i, k)].abs().square();
        }
        if norm2.is_zero() {
            continue;
        }
        let alpha_abs = norm2.sqrt();
        let x0 = h[(k + 1, k)].clone();
        // phase of x0 (1 when x0 = 0)
        let phase = if x0.is_zero() {
            BigComplex::one(prec)
        } else {
            x0.clone() / big_from_float(x0.abs())
        };
        let alpha = phase * big_from_float(alpha_abs);
        let mut v: Vec<BigComplex> = ((k + 1)..n).map(|i| h[(i, k)].clone()).collect();
        v[0] = v[0].clone() + alpha;
        let mut vn = Float::new(prec);
        for x in &v {
            vn += x.abs().square();
        }
        if vn.is_zero() {
            continue;
        }
        let two_over = big_from_float(Float::with_val(prec, 2) / vn);
        // H := (I - 2vv*/v*v) H (I - 2vv*/v*v)
        for j in 0..n {
            let mut dot = BigComplex::zero(prec);
            for (t, i) in ((k + 1)..n).enumerate() {
                dot = dot + v[t].conj() * h[(i, j)].clone();
            }
            let f = dot * two_over.clone();
            for (t, i) in ((k + 1)..n).enumerate() {
                let val = h[(i, j)].clone() - v[t].clone() * f.clone();
                h[(i, j)] = val;
            }
        }
        for i in 0..n {
            let mut dot = BigComplex::zero(prec);
            for (t, j) in ((k + 1)..n).enumerate() {
                dot = dot + h[(i, j)].clone() * v[t].clone();
            }
            let f = dot * two_over.clone();
            for (t, j) in ((k + 1)..n).enumerate() {
                let val = h[(i, j)].clone() - f.clone() * v[t].conj();
                h[(i, j)] = val;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = BigComplex::zero(prec);
        }
    }
    h
}

/// Eigenvalues of a general numeric square matrix.
pub fn eigenvalues(m: &Mat<BigComplex>) -> Result<Vec<BigComplex>> {
    hessenberg_eigenvalues(to_hessenberg(m))
}

fn newton_polish(p: &LaurentPoly<BigComplex>, x0: &BigComplex, bits: u32) -> BigComplex {
    let dp = p.derivative();
    let mut x = x0.clone();
    for _ in 0..200 {
        let d = dp.eval(&x);
        if d.is_zero() {
            break;
        }
        let step = p.eval(&x) / d;
        x = x - step.clone();
        let scale = x.abs_f64().max(1.0).log2();
        if step.log2_abs() < scale - bits as f64 + 2.0 {
            break;
        }
    }
    x
}

/// Relative residual `|p(x)| / Σ|a_k||x|^k`.
fn relative_residual(p: &LaurentPoly<BigComplex>, x: &BigComplex) -> f64 {
    let num = p.eval(x).log2_abs();
    let ax = x.abs_f64();
    let mut den = 0.0f64;
    for (e, c) in p.terms() {
        den += c.abs_f64() * ax.powi(e);
    }
    if num == f64::NEG_INFINITY {
        return 0.0;
    }
    (num - den.log2()).exp2()
}

/// All finite nonzero roots of `p` with multiplicities.
///
/// Roots closer than `2^(-precision/3)` are merged into one cluster whose
/// size is the multiplicity; a pair separated by more than that but less
/// than `2^(-precision/6)` is reported as ambiguous.
pub fn poly_roots(p: &LaurentPoly, precision: u32) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::InvalidInput("poly_roots on the zero polynomial".into()));
    }
    let low = p.low().unwrap();
    let monic = p.shift_exponents(-low).monic();
    let deg = monic.high().unwrap() as usize;
    if deg == 0 {
        return Ok(RootSet {
            roots: Vec::new(),
            low_exponent: low,
        });
    }
    let w = precision + GUARD_BITS;
    let pw = monic.to_big(w);
    // Companion matrix in upper Hessenberg form.
    let comp = Mat::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -pw.coeff((deg - 1 - j) as i32).cloned().unwrap_or_else(|| BigComplex::zero(w))
        } else if i == j + 1 {
            BigComplex::one(w)
        } else {
            BigComplex::zero(w)
        }
    });
    let raw = hessenberg_eigenvalues(comp)?;

    let cluster_tol = -(precision as f64) / 3.0;
    let iso_tol = -(precision as f64) / 6.0;
    // Single-linkage clustering on log2 distances.
    let mut cluster_of: Vec<usize> = (0..deg).collect();
    fn find(c: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..deg {
        for j in (i + 1)..deg {
            let d = (raw[i].clone() - raw[j].clone()).log2_abs();
            let scale = raw[i].abs_f64().max(1.0).log2();
            if d < cluster_tol + scale {
                let (a, b) = (find(&mut cluster_of, i), find(&mut cluster_of, j));
                cluster_of[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label: Vec<Option<usize>> = vec![None; deg];
    for i in 0..deg {
        let r = find(&mut cluster_of, i);
        match label[r] {
            Some(g) => groups[g].push(i),
            None => {
                label[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let mut roots = Vec::new();
    for g in &groups {
        let m = g.len();
        let mut center = BigComplex::zero(w);
        for &i in g {
            center = center + raw[i].clone();
        }
        center = center.div_i64(m as i64);
        let mut target = pw.clone();
        for _ in 1..m {
            target = target.derivative();
        }
        let x = newton_polish(&target, &center, w);
        roots.push((x, m));
    }
    // Ambiguity check between distinct clusters.
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let d = (roots[i].0.clone() - roots[j].0.clone()).log2_abs();
            let scale = roots[i].0.abs_f64().max(1.0).log2();
            if d < iso_tol + scale {
                return Err(Error::RootClusterAmbiguous {
                    near: format!("{:?}", roots[i].0.with_prec(64)),
                    separation: d.exp2(),
                });
            }
        }
    }
    let cert = -(precision as f64) / 2.0;
    for (x, _) in &roots {
        let res = relative_residual(&pw, x);
        if res > 0.0 && res.log2() > cert {
            return Err(Error::PrecisionExhausted(format!(
                "root residual {res:e} above 2^{cert}"
            )));
        }
    }
    roots.sort_by(|a, b| {
        a.0.re()
            .partial_cmp(b.0.re())
            .unwrap()
            .then(a.0.im().partial_cmp(b.0.im()).unwrap())
    });
    Ok(RootSet {
        roots: roots.into_iter().map(|(x, m)| (x.with_prec(precision), m)).collect(),
        low_exponent: low,
    })
}

/// Best rational approximation of `x` by continued fractions, accepted when
/// it agrees with `x` to `bits` relative bits and has a denominator below
/// `2^max_den_bits`.
pub fn recognize_rational(x: &Float, bits: u32, max_den_bits: u32) -> Option<Rational> {
    if x.is_zero() {
        return Some(Rational::new());
    }
    let prec = x.prec();
    let tol = Float::with_val(prec, Float::i_exp(1, -(bits as i32))) * Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, 1));
    let max_den = Integer::from(1) << max_den_bits;
    let (mut h1, mut h2) = (Integer::from(1), Integer::from(0));
    let (mut k1, mut k2) = (Integer::from(0), Integer::from(1));
    let mut v = x.clone();
    for _ in 0..(4 * max_den_bits + 16) {
        let a = v.clone().floor().to_integer()?;
        let h = Integer::from(&a * &h1) + &h2;
        let k = Integer::from(&a * &k1) + &k2;
        if k > max_den {
            return None;
        }
        let cand = Rational::from((h.clone(), k.clone()));
        let err = Float::with_val(prec, x - &cand).abs();
        if err <= tol {
            return Some(cand);
        }
        let frac = v - Float::with_val(prec, &a);
        if frac.is_zero() {
            return None;
        }
        v = Float::with_val(prec, 1) / frac;
        h2 = std::mem::replace(&mut h1, h);
        k2 = std::mem::replace(&mut k1, k);
    }
    None
}

/// Recognizes a numeric value as a Gaussian rational.
pub fn recognize_gaussian(x: &BigComplex, bits: u32, max_den_bits: u32) -> Option<ExactComplex> {
    let re = recognize_rational(x.re(), bits, max_den_bits)?;
    let im = recognize_rational(x.im(), bits, max_den_bits)?;
    Some(ExactComplex::new(re, im))
}

/// Exact Gaussian-rational roots with multiplicities, plus the stripped
/// `z^low` exponent. Fails with `NonExactRoot` when some root is not a
/// Gaussian rational.
pub fn exact_roots(p: &LaurentPoly) -> Result<(Vec<(ExactComplex, usize)>, i32)> {
    if p.is_zero() {
        return Err(Error::InvalidInput("exact_roots on the zero polynomial".into()));
    }
    let low = p.low().unwrap();
    let mut rest = p.shift_exponents(-low).monic();
    let mut found: Vec<(ExactComplex, usize)> = Vec::new();
    let mut prec = 256u32;
    while rest.high().unwrap() > 0 {
        if rest.high() == Some(1) {
            let a = -rest.coeff(0).cloned().unwrap_or_else(ExactComplex::zero);
            push_root(&mut found, a, 1);
            break;
        }
        let numeric = poly_roots(&rest, prec);
        let mut progressed = false;
        if let Ok(set) = numeric {
            for (x, _) in &set.roots {
                let bits = prec / 2;
                let Some(cand) = recognize_gaussian(x, bits, prec / 4) else { continue };
                let lin = LaurentPoly::linear(&cand);
                let mut mult = 0;
                while let Some(q) = rest.div_exact(&lin) {
                    rest = q;
                    mult += 1;
                }
                if mult > 0 {
                    push_root(&mut found, cand, mult);
                    progressed = true;
                }
            }
        }
        if !progressed {
            if prec >= 2048 {
                let set = poly_roots(&rest, 256)?;
                let witness = set
                    .roots
                    .first()
                    .map(|(x, _)| format!("{:?}", x.with_prec(64)))
                    .unwrap_or_default();
                return Err(Error::NonExactRoot(witness));
            }
            prec *= 2;
        }
    }
    found.sort_by(|a, b| a.0.lex_cmp(&b.0));
    Ok((found, low))
}

fn push_root(found: &mut Vec<(ExactComplex, usize)>, a: ExactComplex, m: usize) {
    if let Some(entry) = found.iter_mut().find(|(r, _)| *r == a) {
        entry.1 += m;
    } else {
        found.push((a, m));
    }
}

/// Characteristic polynomial `det(zI - m)`.
pub fn char_poly(m: &Mat) -> LaurentPoly {
    let n = m.rows();
    PolyMat::from_fn(n, n, |i, j| {
        let c = LaurentPoly::constant(-m[(i, j)].clone());
        if i == j {
            &c + &LaurentPoly::z()
        } else {
            c
        }
    })
    .det()
}

/// Exact eigen-decomposition `m = V diag(λ) V^{-1}`, eigenvalues ordered as
/// returned by [`exact_roots`]. Requires Gaussian-rational eigenvalues and a
/// full eigenbasis.
pub fn exact_eigen(m: &Mat) -> Result<(Vec<ExactComplex>, Mat)> {
    let n = m.rows();
    if m.is_diagonal() {
        return Ok((m.diagonal(), Mat::identity(n)));
    }
    let (roots, low) = exact_roots(&char_poly(m))?;
    let mut values = Vec::new();
    let mut vectors: Vec<Vec<ExactComplex>> = Vec::new();
    let mut all = roots;
    if low > 0 {
        all.insert(0, (ExactComplex::zero(), low as usize));
    }
    for (lam, mult) in all {
        let shifted = m.sub(&Mat::identity(n).scale(&lam));
        let ker = shifted.right_kernel();
        if ker.len() != mult {
            return Err(Error::NonDiagonalizable(format!(
                "eigenvalue {lam} has algebraic multiplicity {mult} but geometric multiplicity {}",
                ker.len()
            )));
        }
        for v in ker {
            values.push(lam.clone());
            vectors.push(v);
        }
    }
    let v = Mat::from_fn(n, n, |i, j| vectors[j][i].clone());
    Ok((values, v))
}

/// Numeric eigen-decomposition with eigenvalues sorted by real, then
/// imaginary part and eigenvectors from inverse iteration. Eigenvalues
/// closer than `2^(-prec/3)` are rejected since the basis cannot be
/// certified.
pub fn numeric_eigen(m: &Mat<BigComplex>) -> Result<(Vec<BigComplex>, Mat<BigComplex>)> {
    let n = m.rows();
    let prec = m.prec();
    let mut vals = eigenvalues(m)?;
    vals.sort_by(|a, b| {
        let ka = (a.re().to_f64(), a.im().to_f64());
        let kb = (b.re().to_f64(), b.im().to_f64());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let scale = m.max_abs().max(1.0).log2();
    for i in 0..n {
        for j in (i + 1)..n {
            if (vals[i].clone() - vals[j].clone()).log2_abs() < scale - (prec / 3) as f64 {
                return Err(Error::NonDiagonalizable(format!(
                    "eigenvalues {i} and {j} coincide numerically; cannot certify an eigenbasis"
                )));
            }
        }
    }
    let mut cols: Vec<Vec<BigComplex>> = Vec::with_capacity(n);
    for lam in &vals {
        let eps = BigComplex::from_f64(prec, (scale - (prec / 2) as f64).exp2(), 0.0);
        let shifted = m.sub(&Mat::identity_like(n, lam).scale(&(lam.clone() + eps)));
        let mut x: Vec<BigComplex> = (0..n).map(|k| BigComplex::from_f64(prec, 1.0, 0.1 * k as f64)).collect();
        for _ in 0..4 {
            let Some(y) = shifted.solve(&x) else { break };
            let norm = y.iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            let pivot = y.iter().max_by(|a, b| a.abs_f64().total_cmp(&b.abs_f64())).unwrap().clone();
            x = y.into_iter().map(|v| v / pivot.clone()).collect();
        }
        cols.push(x);
    }
    let v = Mat::from_fn(n, n, |i, j| cols[j][i].clone());
    if v.inverse().is_none() {
        return Err(Error::NonDiagonalizable("eigenvectors are linearly dependent".into()));
    }
    Ok((vals, v))
}
