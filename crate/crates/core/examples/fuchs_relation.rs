//! Exponents `d_k`, determinant roots and the exact Fuchs relation for
//! `A(z) = diag(1, i) z + [[2, 1], [1, 3i]]`.

use birkhoff::difference::{verify_fuchs, DifferenceSystem};
use birkhoff::{ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(2, 0), c(1, 0)], vec![c(1, 0), c(0, 3)]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])?;
    let d: Vec<String> = s.d().iter().map(|x| x.to_string()).collect();
    println!("rho = {:?}", s.rho());
    println!("d   = ({})", d.join(", "));
    let rep = verify_fuchs(&s)?;
    println!("sum d_k          = {}", rep.d_sum);
    println!("sum of det roots = {}", rep.root_sum);
    println!("residual         = {}", rep.residual);
    Ok(())
}
