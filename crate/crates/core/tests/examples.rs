//! Every example runs and produces what it prints.

#![allow(dead_code)]

#[path = "../examples/certify_threshold.rs"]
mod certify_threshold;
#[path = "../examples/comparison.rs"]
mod comparison;
#[path = "../examples/fundamental_function.rs"]
mod fundamental_function;
#[path = "../examples/impulse_products.rs"]
mod impulse_products;
#[path = "../examples/model_and_validation.rs"]
mod model_and_validation;
#[path = "../examples/remove_impulses.rs"]
mod remove_impulses;
#[path = "../examples/simulate_impulsive.rs"]
mod simulate_impulsive;
#[path = "../examples/threshold_sweep.rs"]
mod threshold_sweep;

use impulsive_dde::criteria::Verdict;
use impulsive_dde::empirics::EmpiricalClass;

#[test]
fn certify_threshold_splits_at_inverse_e() {
    for (a, verdict) in certify_threshold::run().unwrap() {
        let expected = if a <= 1.0 / std::f64::consts::E {
            Verdict::NonOscillationCertified
        } else {
            Verdict::OscillationCertified
        };
        assert_eq!(verdict, expected, "A = {a}");
    }
}

#[test]
fn comparison_reports_the_violation() {
    assert!(comparison::run().unwrap());
}

#[test]
fn fundamental_function_matches_solver() {
    assert!(fundamental_function::run().unwrap() < 1e-4);
}

#[test]
fn impulse_products_halve_per_impulse() {
    assert_eq!(impulse_products::run().unwrap(), 0.5f64.powi(10));
}

#[test]
fn model_example_validates() {
    assert!(model_and_validation::run().unwrap());
}

#[test]
fn remove_impulses_agrees_with_conjugation() {
    assert!(remove_impulses::run().unwrap() < 1e-4);
}

#[test]
fn simulate_impulsive_oscillates() {
    assert!(simulate_impulsive::run().unwrap() >= 2);
}

#[test]
fn threshold_sweep_flips_between_three_and_four_tenths() {
    let rows = threshold_sweep::run().unwrap();
    for row in &rows {
        if row.value < 0.35 {
            assert_eq!(row.certified, Verdict::NonOscillationCertified);
            assert!(!row.all_seeds(EmpiricalClass::Oscillatory));
        } else {
            assert_eq!(row.certified, Verdict::OscillationCertified);
            assert!(row.all_seeds(EmpiricalClass::Oscillatory));
        }
    }
}
