//! One unit of `||D||_1` per step: a manufactured zero side with
//! `D = (2, -1)` is reduced to `D = 0`.

use birkhoff::gauge::{reduce_norm_step, ReductionState, Shift};
use birkhoff::{ExactComplex, LaurentPoly, PolyMat};

fn main() -> birkhoff::Result<()> {
    let c = |re, im| ExactComplex::new(re, im);
    let d = vec![2, -1];
    // Lower triangular; the (1, 0) entry has degree 1 + d_0 - d_1.
    let z = PolyMat::from_fn(2, 2, |a, b| match (a, b) {
        (0, 0) => LaurentPoly::linear(&c(1, 1)),
        (1, 1) => LaurentPoly::linear(&ExactComplex::ratio(-1, 2)).scale(&c(2, -1)),
        (1, 0) => LaurentPoly::from_coeffs(0, (0..=4).map(|k| c(k + 1, 1))),
        _ => LaurentPoly::zero(),
    });
    for shift in [Shift::Difference, Shift::Q { q: c(2, 0) }] {
        let (mut state, _) = ReductionState::new(shift.clone(), z.clone(), d.clone(), 1)?;
        println!("{}: D = {:?}, norm {}", shift.name(), state.d, state.norm());
        while state.norm() > 0 {
            let (next, rec) = reduce_norm_step(&state)?;
            println!(
                "  {:?} at root {} index {}: norm {} -> {}, D = {:?}",
                rec.case, rec.root, rec.index, rec.norm_before, rec.norm_after, next.d
            );
            state = next;
        }
    }
    Ok(())
}
