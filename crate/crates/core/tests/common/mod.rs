#![allow(dead_code)]

use birkhoff::difference::DifferenceSystem;
use birkhoff::gauge::{ReductionState, Shift, System};
use birkhoff::qdiff::QDifferenceSystem;
use birkhoff::{BigComplex, ExactComplex, LaurentPoly, Mat, PolyMat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: i64, im: i64) -> ExactComplex {
    ExactComplex::new(re, im)
}

pub fn cr(num: i64, den: i64, inum: i64, iden: i64) -> ExactComplex {
    ExactComplex::new(rug::Rational::from((num, den)), rug::Rational::from((inum, iden)))
}

pub fn big(prec: u32, re: f64, im: f64) -> BigComplex {
    BigComplex::from_f64(prec, re, im)
}

/// `A(z) = diag(1, i) z + [[2, 1], [1, 3i]]`: `d = (2, 3)`, root sum `-5`.
pub fn worked_difference() -> DifferenceSystem {
    DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(2, 0), c(1, 0)], vec![c(1, 0), c(0, 3)]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])
    .unwrap()
}

/// `A(z) = diag(1, i) z + [[1, 1], [3/4, (1-i)/2]]`, `det A = i (z - 1/2)(z + 1 - i/2)`.
pub fn exact_root_difference() -> System {
    System::from(
        &DifferenceSystem::from_coeffs(&[
            Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![cr(3, 4, 0, 1), cr(1, 2, -1, 2)]]),
            Mat::diag_from(&[c(1, 0), c(0, 1)]),
        ])
        .unwrap(),
    )
}

/// `Q(z) = diag(1, i) z + [[1, 1], [-1-i, 0]]`, `q = 2`; `det Q` has roots
/// `-1-i` and `i`, `Q_0` has eigenvalues `1-i` and `i`.
pub fn mu_one_q() -> QDifferenceSystem {
    QDifferenceSystem::from_coeffs(
        c(2, 0),
        &[
            (0, Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(-1, -1), c(0, 0)]])),
            (1, Mat::diag_from(&[c(1, 0), c(0, 1)])),
        ],
    )
    .unwrap()
}

fn small_gaussian(rng: &mut ChaCha8Rng, k: i64) -> ExactComplex {
    c(rng.gen_range(-k..=k), rng.gen_range(-k..=k))
}

/// A random exact difference system with diagonal `A_r` whose entries have
/// pairwise non-real ratios.
pub fn random_difference(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DifferenceSystem {
    loop {
        let rho: Vec<ExactComplex> = (0..n).map(|_| small_gaussian(rng, 3)).collect();
        if rho.iter().any(|x| x.is_zero()) {
            continue;
        }
        let mut coeffs: Vec<Mat> = (0..r).map(|_| Mat::from_fn(n, n, |_, _| small_gaussian(rng, 3))).collect();
        coeffs.push(Mat::diag_from(&rho));
        let s = DifferenceSystem::from_coeffs(&coeffs).unwrap();
        if s.hypothesis_violations().is_empty() {
            return s;
        }
    }
}

/// Lower-triangular zero side with `Z_aa = c_a (z - α_a)` and `(a, b)`
/// entries of degree `1 + d_b - d_a` below the diagonal, so that
/// `(s z)^D Z z^{-D}` has top degree 1 with invertible leading coefficient.
pub fn manufactured_state(shift: Shift, d: &[i32]) -> ReductionState {
    let alphas = [c(1, 1), cr(-1, 2, 0, 1), c(0, 3), cr(5, 3, 1, 7)];
    let consts = [c(1, 0), c(2, -1), c(0, 1), c(-3, 2)];
    let mut sorted = d.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let n = d.len();
    let z = PolyMat::from_fn(n, n, |a, b| {
        if a == b {
            LaurentPoly::linear(&alphas[a]).scale(&consts[a])
        } else if a > b {
            let deg = 1 + sorted[b] - sorted[a];
            LaurentPoly::from_coeffs(0, (0..=deg).map(|k| c(k as i64 + a as i64, 1 - b as i64)))
        } else {
            LaurentPoly::zero()
        }
    });
    ReductionState::new(shift, z, sorted, 1).unwrap().0
}

/// Product of `count` elementary factors `I + c z^k E_ij` and one `z^K`.
pub fn random_laurent_unit(rng: &mut ChaCha8Rng, n: usize, count: usize) -> PolyMat {
    let k: Vec<i32> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    let mut m = PolyMat::z_power_diag(&k);
    for _ in 0..count {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let mut e = PolyMat::identity(n);
        let mut coeff = small_gaussian(rng, 2);
        if coeff.is_zero() {
            coeff = c(1, 0);
        }
        e[(i, j)] = LaurentPoly::monomial(coeff, rng.gen_range(-2..=2));
        m = if rng.gen_bool(0.5) { e.mul(&m) } else { m.mul(&e) };
    }
    // Nonzero constant diagonal scaling.
    let scale: Vec<LaurentPoly> = (0..n).map(|a| LaurentPoly::constant(c(1 + a as i64, a as i64))).collect();
    PolyMat::diag(&scale).mul(&m)
}
