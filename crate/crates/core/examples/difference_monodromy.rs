//! Periodic connection matrix `P(z) = Y^r(z)^{-1} Y^l(z)` and its
//! trigonometric-polynomial fit.

use birkhoff::difference::{monodromy_difference, DifferenceSystem};
use birkhoff::{ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(1, 1), c(1, 0)], vec![c(0, 1), c(2, 0)]]),
        Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(-1, 0), c(0, 2)]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])?;
    let rep = monodromy_difference(&s, 8, 192, None, 1e-20)?;
    println!("z0 = {:?}", rep.z0);
    println!("periodicity residual    {:.3e}", rep.periodicity_residual);
    println!("fit residual            {:.3e}", rep.fit_residual);
    println!("diagonal constant error {:.3e}", rep.diagonal_constant_error);
    println!("diagonal top error      {:.3e}", rep.diagonal_top_error);
    for (k, row) in rep.fits.iter().enumerate() {
        for (l, fit) in row.iter().enumerate() {
            let terms: Vec<String> = fit
                .frequencies
                .iter()
                .zip(&fit.coeffs)
                .map(|(f, c)| format!("{f}: {c:?}"))
                .collect();
            println!("p_{k}{l}: {}", terms.join(", "));
        }
    }
    Ok(())
}
