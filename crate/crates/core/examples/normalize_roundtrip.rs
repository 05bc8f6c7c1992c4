//! Moves the characteristic constants at infinity by integer targets and
//! back, then checks that the monodromy data is unchanged.

use birkhoff::difference::verify_fuchs;
use birkhoff::gauge::{compare_monodromy_q, normalize_system, replay, System};
use birkhoff::qdiff::QDifferenceSystem;
use birkhoff::{BigComplex, ExactComplex, Mat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let s = System::from(&QDifferenceSystem::from_coeffs(
        c(2, 0),
        &[
            (0, Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![c(-1, -1), c(0, 0)]])),
            (1, Mat::diag_from(&[c(1, 0), c(0, 1)])),
        ],
    )?);
    let fwd = normalize_system(&s, &[-1, 1])?;
    println!("shifted leading {:?}", fwd.output.leading().diagonal());
    println!("norm trajectory {:?}", fwd.log.norm_trajectory);
    let back = normalize_system(&fwd.output, &[1, -1])?;
    println!("recovered leading {:?}", back.output.leading().diagonal());
    println!("Q_mu recovered exactly: {}", back.output.leading() == s.leading());
    println!("log replays: {}", replay(&back.log, &fwd.output)? == back.output);
    let prec = 128;
    let dev = compare_monodromy_q(&s, &back.output, &BigComplex::from_f64(prec, -0.45, -4.1), 3, prec)?;
    println!("connection matrices agree to {dev:.3e}");
    println!("gauge log: {}", serde_json::to_string(&fwd.log)?);

    // Difference case: d moves by the targets, Fuchs stays exact.
    let d = System::from(&birkhoff::difference::DifferenceSystem::from_coeffs(&[
        Mat::from_rows(vec![vec![c(1, 0), c(1, 0)], vec![ExactComplex::ratio(3, 4), ExactComplex::new(
            rug::Rational::from((1, 2)),
            rug::Rational::from((-1, 2)),
        )]]),
        Mat::diag_from(&[c(1, 0), c(0, 1)]),
    ])?);
    let out = normalize_system(&d, &[1, -1])?;
    let ds = out.output.to_difference()?;
    println!("difference: d {:?} -> {:?}, Fuchs residual {}", d.to_difference()?.d(), ds.d(), verify_fuchs(&ds)?.residual);
    Ok(())
}
