//! Factors a Laurent matrix invertible off the origin as `U M = z^K W`
//! and a rational matrix through the Birkhoff split.

use birkhoff::gauge::{birkhoff_split, sauvage_factorize};
use birkhoff::{ExactComplex, LaurentPoly, PolyMat, RationalMat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    // (I + z E_01) z^{diag(1, -2)} (I + 3 z^{-1} E_10)
    let mut a = PolyMat::identity(2);
    a[(0, 1)] = LaurentPoly::monomial(c(1, 0), 1);
    let mut b = PolyMat::identity(2);
    b[(1, 0)] = LaurentPoly::monomial(c(3, 0), -1);
    let m = a.mul(&PolyMat::z_power_diag(&[1, -2])).mul(&b);
    println!("M = {m:?}");
    let f = sauvage_factorize(&m)?;
    println!("K = {:?}", f.k);
    println!("U = {:?}", f.u);
    println!("W = {:?}", f.w);
    println!("U M == z^K W: {}", f.u.mul(&m) == PolyMat::z_power_diag(&f.k).mul(&f.w));

    let mut p = PolyMat::identity(2);
    p[(0, 0)] = LaurentPoly::linear(&c(2, 1));
    let r = RationalMat::new(p, LaurentPoly::linear(&c(0, 1)));
    let split = birkhoff_split(&r)?;
    println!("rational split: K = {:?}", split.k);
    Ok(())
}
