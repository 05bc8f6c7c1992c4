//! Local solutions of a q-difference system at zero and infinity, and the
//! scalar building blocks for `g(qz) = (z - m) g(z)`.

use birkhoff::qdiff::{
    local_series_q, recursion_residuals, scalar_q_solution, InfinitySolution, QDifferenceSystem, ScalarKind, Site,
    ZeroSolution,
};
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
    for site in [Site::Zero, Site::Infinity] {
        let sol = local_series_q(&s, site, 6)?;
        let exact = recursion_residuals(&s, &sol).iter().all(|m| m.is_zero());
        println!("{site:?}: eigenvalues {:?}, recursion exact: {exact}", sol.eigenvalues);
    }
    let prec = 128;
    let t = BigComplex::from_f64(prec, 0.3, 0.1);
    println!("zero solution residual     {:.3e}", ZeroSolution::new(&s, prec)?.functional_residual(&t));
    println!("infinity solution residual {:.3e}", InfinitySolution::new(&s, prec)?.functional_residual(&t)?);

    let q = BigComplex::from_f64(prec, 2.0, 0.5);
    let m = BigComplex::from_f64(prec, 1.5, -0.25);
    for kind in [ScalarKind::Zero, ScalarKind::Infinity] {
        let g = scalar_q_solution(&m, &q, kind, prec)?;
        println!("scalar {kind:?}: g(t) = {:?}, residual {:.3e}", g.eval_t(&t)?, g.functional_residual(&t)?);
    }
    Ok(())
}
