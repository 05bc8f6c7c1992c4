//! Formal solution at infinity and how the truncation error decays with `|z|`.

use birkhoff::difference::{formal_solution_difference, series_residual, DifferenceSystem};
use birkhoff::{BigComplex, ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(2, 0), c(1, 0)], vec![c(1, 0), c(0, 3)]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])?;
    let sol = formal_solution_difference(&s, 4)?;
    for (k, m) in sol.coeffs.iter().enumerate() {
        println!("Y_{k} = {m:?}");
    }
    for order in [2usize, 4, 8] {
        let sol = formal_solution_difference(&s, order)?;
        let r40 = series_residual(&s, &sol, &BigComplex::from_f64(256, 40.0, 3.0));
        let r80 = series_residual(&s, &sol, &BigComplex::from_f64(256, 80.0, 6.0));
        println!("N = {order}: residual {r40:.3e} at |z|~40, {r80:.3e} at |z|~80, slope {:.3}", (r80 / r40).log2());
    }
    Ok(())
}
