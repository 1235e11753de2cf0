use std::f64::consts::E;

use proptest::prelude::*;

use impulsive_dde::criteria::{
    certify, corollary2, ComparisonWitness, CriteriaConfig, CriteriaError, Verdict,
};
use impulsive_dde::empirics::{
    classify, sweep, with_random_initial, EmpiricalClass, Knob, SweepSettings,
};
use impulsive_dde::integrator::solve;
use impulsive_dde::model::{DelayFn, ImpulseSchedule, Problem, ScalarFn};

fn unit_lag(a: f64, b: f64) -> Problem {
    Problem::builder()
        .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
        .schedule(ImpulseSchedule::periodic(1.0, 1.0, b).unwrap())
        .build()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // With unit lag and unit period the equation is equivalent to a constant
    // coefficient one with coefficient A/B, which oscillates iff A/B > 1/e.
    #[test]
    fn certificates_agree_with_the_exact_threshold(a in 0.05f64..1.5, b in 0.5f64..3.0) {
        let certification = certify(&unit_lag(a, b), 40.0, &CriteriaConfig::default()).unwrap();
        let ratio = a / b;
        match certification.decision.verdict {
            Verdict::NonOscillationCertified => prop_assert!(ratio <= 1.0 / E, "ratio {ratio}"),
            Verdict::OscillationCertified => prop_assert!(ratio > 1.0 / E, "ratio {ratio}"),
            Verdict::Inconclusive => {}
        }
    }

    #[test]
    fn impulses_above_one_keep_small_coefficients_non_oscillatory(
        a in 0.02f64..0.3,
        lag in 0.3f64..1.5,
        b in 1.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let p = Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(lag).unwrap())
            .schedule(ImpulseSchedule::periodic(0.5, 0.8, b).unwrap())
            .build()
            .unwrap();
        let report = corollary2(&p, 40.0, &CriteriaConfig::default()).unwrap();
        prop_assert_eq!(report.verdict, Verdict::NonOscillationCertified);
        let traj = solve(&with_random_initial(&p, seed), 40.0, 0.01).unwrap();
        prop_assert_ne!(classify(&traj, 10.0).class, EmpiricalClass::Oscillatory);
    }
}

#[test]
fn corollary2_covers_every_non_oscillatory_base() {
    for a in [0.05, 0.15, 0.3, 0.36] {
        for b in [1.0, 1.5, 4.0] {
            let p = unit_lag(a, b);
            let report = corollary2(&p, 40.0, &CriteriaConfig::default()).unwrap();
            assert_eq!(
                report.verdict,
                Verdict::NonOscillationCertified,
                "a {a} b {b}"
            );
        }
    }
    // Multipliers below one are outside its scope.
    let err = corollary2(&unit_lag(0.2, 0.5), 40.0, &CriteriaConfig::default()).unwrap_err();
    assert!(matches!(
        err,
        CriteriaError::HypothesisNotMet {
            witness: ComparisonWitness::Impulse { index: 0, .. },
            ..
        }
    ));
}

#[test]
fn sweeps_never_contradict_their_certificates() {
    let settings = SweepSettings {
        horizon: 60.0,
        seeds: 3,
        base_seed: 17,
        ..SweepSettings::default()
    };
    let coefficients: Vec<f64> = (1..=12).map(|i| 0.1 * i as f64).collect();
    let multipliers = [0.4, 0.7, 1.0, 1.5, 2.5, 4.0];
    for (knob, template, values) in [
        (
            Knob::CoefficientScale,
            unit_lag(1.0, 1.0),
            &coefficients[..],
        ),
        (
            Knob::ImpulseMultiplier,
            unit_lag(0.6, 1.0),
            &multipliers[..],
        ),
    ] {
        let rows = sweep(&template, knob, values, &settings).unwrap();
        assert_eq!(rows.len(), values.len());
        for row in &rows {
            match row.certified {
                Verdict::NonOscillationCertified => {
                    assert!(
                        !row.all_seeds(EmpiricalClass::Oscillatory),
                        "{knob} = {}",
                        row.value
                    )
                }
                Verdict::OscillationCertified => assert!(
                    row.empirical
                        .iter()
                        .all(|e| e.class == EmpiricalClass::Oscillatory),
                    "{knob} = {}",
                    row.value
                ),
                Verdict::Inconclusive => {}
            }
        }
        assert_eq!(rows, sweep(&template, knob, values, &settings).unwrap());
    }
}
