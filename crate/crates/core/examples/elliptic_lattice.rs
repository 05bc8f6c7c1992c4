//! Period lattice of `q`: quasi-periods, the Legendre relation and the
//! quasi-periodicity of sigma.

use birkhoff::elliptic::lattice_constants;
use birkhoff::BigComplex;

fn main() -> birkhoff::Result<()> {
    let prec = 128;
    for (re, im) in [(2.0, 0.0), (1.5, 0.0), (2.0, 0.5)] {
        let lat = lattice_constants(&BigComplex::from_f64(prec, re, im), prec)?;
        let t = BigComplex::from_f64(prec, 0.31, -0.17);
        let (a, b) = lat.quasi_periodicity_residuals(&t);
        println!("q = {re} + {im}i");
        println!("  omega' = {:?}", lat.omega_prime);
        println!("  eta = {:?}, eta' = {:?}", lat.eta, lat.eta_prime);
        println!("  Legendre residual {:.3e}", lat.legendre_residual);
        println!("  sigma(t) = {:?}, quasi-periodicity {:.3e} / {:.3e}", lat.sigma(&t), a, b);
    }
    Ok(())
}
