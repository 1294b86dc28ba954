mod common;

use structured_bai::bounds::{sample_complexity, sample_complexity_scan};
use structured_bai::confidence::beta;

#[test]
fn beta_reference_value() {
    assert!((beta(1, 0.1).unwrap() - common::BETA_1_0_1).abs() <= 1e-12);
}

#[test]
fn round_bound_scan_and_bisection_agree() {
    assert_eq!(common::round_bound_agreement(100).unwrap(), 100);
}

#[test]
fn round_bound_worked_value() {
    // H = 8, delta = 0.1, L = 2: first t with 1 + 64 beta(t, 0.025) <= t.
    let t = sample_complexity(8.0, 0.1, 2).unwrap();
    assert_eq!(t, sample_complexity_scan(8.0, 0.1, 2).unwrap());
    let holds = |t: u64| 1.0 + 64.0 * beta(t, 0.025).unwrap() <= t as f64;
    assert!(holds(t) && !holds(t - 1));
}

#[test]
fn round_bound_is_monotone() {
    let mut prev = 0;
    for h in [0.0, 0.5, 1.0, 4.0, 8.0, 20.0, 50.0] {
        let t = sample_complexity(h, 0.05, 4).unwrap();
        assert!(t >= prev);
        prev = t;
    }
    let mut prev = u64::MAX;
    for delta in [0.001, 0.01, 0.05, 0.1, 0.2] {
        let t = sample_complexity(8.0, delta, 2).unwrap();
        assert!(t <= prev);
        prev = t;
    }
}
