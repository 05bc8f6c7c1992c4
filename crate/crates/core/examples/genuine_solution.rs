//! Left and right genuine solutions evaluated at a few points, with the
//! residual of `Y(z+1) = A(z) Y(z)`.

use birkhoff::difference::{genuine_solution, DifferenceSystem, Side};
use birkhoff::{BigComplex, ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(2, 0), c(1, 0)], vec![c(1, 0), c(0, 3)]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])?;
    let prec = 192;
    let z0 = BigComplex::from_f64(prec, 0.25, 1.5);
    let targets: Vec<BigComplex> = (0..3).map(|j| z0.clone() + BigComplex::from_f64(prec, j as f64, 0.0)).collect();
    for side in [Side::Right, Side::Left] {
        let sample = genuine_solution(&s, side, &targets, prec)?;
        println!("{side:?}: truncation order {}, recurrence residual {:.3e}", sample.truncation_order, sample.recurrence_residual);
        let (z, y) = &sample.points[0];
        println!("  Y({z:?}) = {y:?}");
    }
    Ok(())
}
