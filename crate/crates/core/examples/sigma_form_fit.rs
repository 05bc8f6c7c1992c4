//! Fits every connection-matrix entry to `c e^{a t² + b t} Π σ(t - a_j)` and
//! reports zeros, winding and the lattice condition.

use birkhoff::elliptic::lattice_constants;
use birkhoff::qdiff::{fit_sigma_form, MonodromyEvaluator, QDifferenceSystem};
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
    let ev = MonodromyEvaluator::new(&s, prec)?;
    let lat = lattice_constants(&s.q_big(prec), prec)?;
    let t0 = BigComplex::from_f64(prec, -0.5, 0.0) - lat.omega_prime.mul_f64(0.5) + BigComplex::from_f64(prec, 0.011, 0.0);
    let fits = fit_sigma_form(&ev, &lat, &t0)?;
    for (i, row) in fits.iter().enumerate() {
        for (j, fit) in row.iter().enumerate() {
            match fit {
                Some(f) => println!(
                    "p_{i}{j}: winding {}, zeros {:?}, lattice residual {:.3e}, fit residual {:.3e}",
                    f.winding, f.zeros, f.lattice_residual, f.fit_residual
                ),
                None => println!("p_{i}{j}: identically zero"),
            }
        }
    }
    Ok(())
}
