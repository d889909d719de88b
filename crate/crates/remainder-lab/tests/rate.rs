use proptest::prelude::*;
use remainder_lab::{fit_rate, refinement_orders, LabError};

#[test]
fn exact_square_root() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&e: &f64| (e, 3.0 * e.sqrt())).collect();
    let f = fit_rate(&pts).unwrap();
    assert!((f.slope - 0.5).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(f.stderr < 1e-12);
}

#[test]
fn exact_square() {
    let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e: &f64| (e, e * e)).collect();
    assert!((fit_rate(&pts).unwrap().slope - 2.0).abs() < 1e-12);
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(fit_rate(&[(0.1, 1.0), (0.05, 0.5)]), Err(LabError::InvalidArgument(_))));
    assert!(matches!(fit_rate(&[(0.1, 1.0), (0.05, 0.0), (0.02, 1.0)]), Err(LabError::InvalidArgument(_))));
    assert!(matches!(fit_rate(&[(0.1, 1.0), (0.05, -1.0), (0.02, 1.0)]), Err(LabError::InvalidArgument(_))));
    assert!(matches!(fit_rate(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)]), Err(LabError::InvalidArgument(_))));
}

#[test]
fn noisy_fit_reports_uncertainty() {
    let pts = [(0.1, 1.0), (0.05, 0.8), (0.025, 0.45), (0.0125, 0.36)];
    let f = fit_rate(&pts).unwrap();
    assert!(f.stderr > 0.01 && f.slope > 0.0);
}

#[test]
fn refinement_orders_of_power_laws() {
    let lv: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 7.0 * h)).collect();
    for o in refinement_orders(&lv).unwrap() {
        assert!((o - 1.0).abs() < 1e-12);
    }
    assert!(refinement_orders(&[(0.1, 1.0)]).is_err());
    assert!(refinement_orders(&[(0.1, 1.0), (0.2, 0.5)]).is_err());
    assert!(refinement_orders(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
}

proptest! {
    #[test]
    fn fit_is_exact_on_power_laws(p in -3.0f64..3.0, c in 0.01f64..100.0, n in 3usize..8) {
        let pts: Vec<(f64, f64)> = (0..n).map(|j| {
            let e = 0.4 * 0.5f64.powi(j as i32);
            (e, c * e.powf(p))
        }).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((f.slope - p).abs() < 1e-10);
        prop_assert!(f.stderr < 1e-8);
    }
}
