mod common;

use birkhoff::gauge::{
    apply_gauge, compare_monodromy_difference, compare_monodromy_q, compose, normalize_system, replay,
    sauvage_factorize, GaugeLog, GaugeStep, Shift, System,
};
use birkhoff::qdiff::QDifferenceSystem;
use birkhoff::{ExactComplex, Mat, PolyMat, RationalMat};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian() -> impl Strategy<Value = ExactComplex> {
    (-4i64..=4, -4i64..=4).prop_map(|(a, b)| c(a, b))
}

fn step() -> impl Strategy<Value = GaugeStep> {
    prop_oneof![
        (gaussian(), gaussian()).prop_filter_map("singular", |(a, b)| {
            let m = Mat::from_rows(vec![vec![c(1, 0), a], vec![b, c(2, 1)]]);
            m.inverse().map(|_| GaugeStep::Constant { matrix: m })
        }),
        (-2i32..=2, -2i32..=2).prop_map(|(a, b)| GaugeStep::ZPower { exponents: vec![a, b] }),
        (gaussian(), -1i32..=1).prop_filter_map("zero point", |(p, e)| {
            (!p.is_zero()).then(|| GaugeStep::LinearPower {
                point: p,
                exponents: vec![e, 0],
            })
        }),
        Just(GaugeStep::Permutation { perm: vec![1, 0] }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauges_compose(a in step(), b in step()) {
        let s = System::from(&mu_one_q());
        // Steps that put poles off the origin are rejected; skip those.
        let first = a.apply(&s);
        prop_assume!(first.is_ok());
        let two = b.apply(&first.unwrap());
        prop_assume!(two.is_ok());
        let two = two.unwrap();
        let once = apply_gauge(&compose(&[a, b], 2), &s).unwrap();
        prop_assert_eq!(two, once);
    }

    #[test]
    fn gauge_then_inverse_is_identity(a in step()) {
        let s = exact_root_difference();
        let g = a.matrix();
        if let Ok(t) = apply_gauge(&g, &s) {
            let back = apply_gauge(&g.inverse().unwrap(), &t).unwrap();
            prop_assert_eq!(back, s);
        }
    }

    #[test]
    fn sauvage_identity(seed in 0u64..10_000, n in 2usize..=3, count in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_laurent_unit(&mut rng, n, count);
        let f = sauvage_factorize(&m).unwrap();
        prop_assert_eq!(f.u.mul(&m), PolyMat::z_power_diag(&f.k).mul(&f.w));
        prop_assert_eq!(f.k.iter().sum::<i32>(), m.det().low().unwrap());
    }

    #[test]
    fn exact_field_axioms(a in gaussian(), b in gaussian(), d in gaussian()) {
        prop_assert_eq!(&(&a + &b) * &d, &(&a * &d) + &(&b * &d));
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        prop_assert_eq!(&a - &a, ExactComplex::zero());
    }
}

#[test]
fn pole_gauge_rejected() {
    let s = System::from(&mu_one_q());
    let g = RationalMat::new(PolyMat::identity(2), birkhoff::LaurentPoly::linear(&c(5, 0)));
    assert!(apply_gauge(&g, &s).is_err());
}

#[test]
fn log_replays_from_json() {
    let s = System::from(&mu_one_q());
    let out = normalize_system(&s, &[1, 0]).unwrap();
    let json = serde_json::to_string(&out.log).unwrap();
    let log: GaugeLog = serde_json::from_str(&json).unwrap();
    assert_eq!(replay(&log, &s).unwrap(), out.output);
}

#[test]
fn monodromy_comparison_detects_different_systems() {
    let prec = 128;
    let a = System::from(&mu_one_q());
    let other = QDifferenceSystem::from_coeffs(
        c(2, 0),
        &[
            (0, Mat::from_rows(vec![vec![c(1, 0), c(2, 0)], vec![c(-1, -1), c(0, 1)]])),
            (1, Mat::diag_from(&[c(1, 0), c(0, 1)])),
        ],
    )
    .unwrap();
    let dev = compare_monodromy_q(&a, &System::from(&other), &big(prec, -0.45, -4.1), 3, prec).unwrap();
    assert!(dev > 1e-3, "{dev:e}");

    let d = exact_root_difference();
    let w = System::from(&worked_difference());
    let dev = compare_monodromy_difference(&d, &w, &big(prec, 0.0, 0.75), 4, prec).unwrap();
    assert!(dev > 1e-3, "{dev:e}");
}

#[test]
fn shift_kind_is_checked() {
    let s = System::new(Shift::Q { q: c(2, 0) }, PolyMat::identity(2)).unwrap();
    assert!(s.to_difference().is_err());
}
