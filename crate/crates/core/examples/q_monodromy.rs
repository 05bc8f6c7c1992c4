//! Connection matrix of a q-difference system on a period parallelogram,
//! with its periodicity and circuit relations.

use birkhoff::qdiff::{monodromy_q, QDifferenceSystem};
use birkhoff::{BigComplex, ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = QDifferenceSystem::from_coeffs(
        c(2, 0),
        &[
            (0, Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(-1, -1), c(0, 0)]])),
            (1, Mat::diag_from(&[c(1, 0), c(0, 1)])),
        ],
    )?;
    let prec = 128;
    let rep = monodromy_q(&s, &BigComplex::from_f64(prec, -0.45, -4.1), 3, prec)?;
    println!("omega' = {:?}", rep.omega_prime);
    println!("rho    = {:?}", rep.rho);
    println!("sigma  = {:?}", rep.sigma);
    println!("periodicity residual {:.3e}", rep.periodicity_residual);
    println!("circuit residual     {:.3e}", rep.circuit_residual);
    let (t, p) = &rep.samples[0];
    println!("P({t:?}) = {p:?}");
    Ok(())
}
