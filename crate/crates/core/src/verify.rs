//! Property suites run by `idde verify`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::criteria::{
    certify, compare, corollary2, CriteriaConfig, CriteriaError, TheoremId, Verdict,
};
use crate::empirics::{classify, random_initial_function, with_random_initial, EmpiricalClass};
use crate::integrator::{
    fundamental_grid, representation_eval, solve, solve_with_kicks, IntegratorError, Kick,
};
use crate::model::{DelayFn, Impulse, ImpulseSchedule, ModelError, Problem, ScalarFn};
use crate::transform::{conjugate, remove_impulses, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma1,
    TransformEquivalence,
    Threshold,
    Comparison,
    Corollary2,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma1,
        Suite::TransformEquivalence,
        Suite::Threshold,
        Suite::Comparison,
        Suite::Corollary2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::TransformEquivalence => "transform-equivalence",
            Suite::Threshold => "threshold",
            Suite::Comparison => "comparison",
            Suite::Corollary2 => "corollary2",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                format!("unknown suite {s}; expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
}

/// One checked property with its measured value and the bound it must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl PropertyResult {
    /// `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        PropertyResult {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
        }
    }

    /// `measured >= tolerance`.
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        PropertyResult {
            name: name.into(),
            passed: measured >= tolerance,
            measured,
            tolerance,
        }
    }

    /// A yes/no property, recorded as 1 or 0 against 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        PropertyResult {
            name: name.into(),
            passed: ok,
            measured: f64::from(u8::from(ok)),
            tolerance: 1.0,
        }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={:.6e} bound={:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    match suite {
        Suite::Lemma1 => lemma1(seed),
        Suite::TransformEquivalence => transform_equivalence(seed),
        Suite::Threshold => threshold(seed),
        Suite::Comparison => comparison(seed),
        Suite::Corollary2 => corollary2_suite(seed),
    }
}

fn unit_lag(a: f64) -> Problem {
    Problem::builder()
        .term(ScalarFn::Constant(a), DelayFn::ConstantLag(1.0))
        .build()
        .expect("constant problem is valid")
}

/// A forced problem with history, impulses and one additive kick, for
/// checking the variation-of-constants representation.
#[derive(Debug, Clone)]
pub struct RepresentationCase {
    pub problem: Problem,
    pub horizon: f64,
    pub kick: Kick,
}

/// Up to two terms with sinusoidal coefficients and constant lags, up to
/// four impulses, a sinusoidal forcing, a random trigonometric history and
/// an additive kick, on a horizon in `[4, 8]`.
pub fn random_representation_case(seed: u64) -> RepresentationCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = rng.gen_range(4.0..=8.0);
    let mut builder = Problem::builder();
    for _ in 0..rng.gen_range(1..=2) {
        let coefficient = ScalarFn::Sinusoid {
            amplitude: rng.gen_range(0.0..0.5),
            angular_freq: rng.gen_range(0.5..2.0),
            phase: rng.gen_range(0.0..TAU),
            offset: rng.gen_range(-0.5..1.0),
        };
        builder = builder.term(coefficient, DelayFn::ConstantLag(rng.gen_range(0.4..1.5)));
    }

    let mut times: Vec<f64> = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let t = rng.gen_range(0.2..horizon - 0.2);
        if times.iter().all(|&s| (s - t).abs() > 0.05) {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    let impulses: Vec<Impulse> = times
        .iter()
        .map(|&t| {
            let sign = if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
            Impulse::new(t, sign * rng.gen_range(0.4..2.0))
        })
        .collect();
    let kick_time = loop {
        let t = rng.gen_range(0.3..horizon - 0.3);
        if times.iter().all(|&s| (s - t).abs() > 0.05) {
            break t;
        }
    };
    let kick = Kick {
        time: kick_time,
        amount: rng.gen_range(0.2..1.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 },
    };
    let forcing = ScalarFn::Sinusoid {
        amplitude: rng.gen_range(0.2..1.0),
        angular_freq: rng.gen_range(0.5..3.0),
        phase: rng.gen_range(0.0..TAU),
        offset: rng.gen_range(-0.5..0.5),
    };
    let problem = builder
        .x0(rng.gen_range(-1.0..1.0))
        .phi(random_initial_function(rng.gen()))
        .forcing(forcing)
        .schedule(ImpulseSchedule::new(impulses, None).expect("finite non-zero multipliers"))
        .build()
        .expect("random problem is valid");
    RepresentationCase {
        problem,
        horizon,
        kick,
    }
}

/// Largest `|representation - solution|` over `samples` evenly spread times,
/// relative to the largest `|x|` on the span.
pub fn representation_residual(
    case: &RepresentationCase,
    step: f64,
    samples: usize,
) -> Result<f64, VerifyError> {
    let kicks = [case.kick];
    let traj = solve_with_kicks(&case.problem, case.horizon, step, &kicks)?;
    let slices = fundamental_grid(&case.problem, case.horizon, step, &[case.kick.time])?;
    let scale = traj
        .nodes()
        .iter()
        .map(|&(_, x)| x.abs())
        .fold(traj.final_value().abs(), f64::max)
        .max(f64::MIN_POSITIVE);
    let t0 = case.problem.t0();
    let mut worst = 0.0f64;
    for i in 1..=samples {
        let t = (t0 + (case.horizon - t0) * i as f64 / samples as f64).min(case.horizon);
        let rep = representation_eval(&case.problem, &slices, t, &kicks)?;
        let x = traj.value(t).expect("sample inside span");
        worst = worst.max((rep - x).abs() / scale);
    }
    Ok(worst)
}

fn lemma1(seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    (0..10u64)
        .map(|i| {
            let case = random_representation_case(seed.wrapping_mul(1000).wrapping_add(i));
            let residual = representation_residual(&case, 0.005, 20)?;
            Ok(PropertyResult::at_most(
                format!("lemma1.case{}.relative_residual", i + 1),
                residual,
                1e-4,
            ))
        })
        .collect()
}

fn transform_equivalence(seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 20.0;
    let step = 1e-3;
    let mut cases = vec![(
        "reference".to_string(),
        unit_lag(1.0).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0)?),
    )];
    for i in 1..=3 {
        let p = unit_lag(rng.gen_range(0.2..1.5)).with_schedule(ImpulseSchedule::periodic(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.5..2.5),
        )?);
        cases.push((format!("random{i}"), with_random_initial(&p, rng.gen())));
    }
    let mut results = Vec::new();
    for (name, problem) in cases {
        let traj = solve(&problem, horizon, step)?;
        let transformed = remove_impulses(&problem, horizon)?;
        let direct = solve(&transformed.base, horizon, step)?;
        let conjugated = conjugate(&traj, problem.schedule())?;
        let scale = direct
            .nodes()
            .iter()
            .map(|&(_, y)| y.abs())
            .fold(1.0, f64::max);
        results.push(PropertyResult::at_most(
            format!("transform.{name}.sup_distance"),
            conjugated.sup_distance(&direct) / scale,
            1e-4,
        ));
        let (a, b) = (
            conjugated.sign_changes(2.0).len(),
            direct.sign_changes(2.0).len(),
        );
        results.push(PropertyResult::at_most(
            format!("transform.{name}.sign_change_count_difference"),
            (a as f64 - b as f64).abs(),
            0.0,
        ));
    }
    Ok(results)
}

fn threshold(seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    let horizon = 200.0;
    let step = 1e-3;
    let config = CriteriaConfig::default();
    let mut results = Vec::new();
    let below = unit_lag(0.3);
    let above = unit_lag(0.4);
    results.push(PropertyResult::holds(
        "threshold.a0.30.non_oscillation_certified",
        certify(&below, horizon, &config)?.decision.verdict == Verdict::NonOscillationCertified,
    ));
    results.push(PropertyResult::holds(
        "threshold.a0.40.oscillation_certified",
        certify(&above, horizon, &config)?.decision.verdict == Verdict::OscillationCertified,
    ));
    let mut most_below = 0usize;
    let mut fewest_above = usize::MAX;
    for i in 0..5 {
        let s = seed.wrapping_add(i);
        let x = solve(&with_random_initial(&below, s), horizon, step)?;
        most_below = most_below.max(x.sign_changes(10.0).len());
        let x = solve(&with_random_initial(&above, s), horizon, step)?;
        fewest_above = fewest_above.min(x.sign_changes(0.0).len());
    }
    results.push(PropertyResult::at_most(
        "threshold.a0.30.max_sign_changes_after_10",
        most_below as f64,
        0.0,
    ));
    results.push(PropertyResult::at_least(
        "threshold.a0.40.min_sign_changes",
        fewest_above as f64,
        10.0,
    ));
    Ok(results)
}

fn comparison(seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 100.0;
    let config = CriteriaConfig::default();
    let base = unit_lag(0.3);
    let mut results = vec![PropertyResult::holds(
        "comparison.base_certified",
        certify(&base, horizon, &config)?.decision.verdict == Verdict::NonOscillationCertified,
    )];
    let unit = ImpulseSchedule::periodic(1.0, 1.0, 1.0)?;
    for (name, a) in [("fixed", 0.2), ("random", rng.gen_range(0.01..0.3))] {
        let r = compare(
            &base.with_schedule(unit.clone()),
            &unit_lag(a).with_schedule(unit.clone()),
            horizon,
            &config,
        )?;
        results.push(PropertyResult::holds(
            format!("comparison.{name}.transferred"),
            r.verdict == Verdict::NonOscillationCertified && r.theorem == TheoremId::T4,
        ));
    }
    let violating = compare(&base, &unit_lag(0.4), horizon, &config);
    results.push(PropertyResult::holds(
        "comparison.violation_has_witness",
        matches!(violating, Err(CriteriaError::HypothesisNotMet { .. })),
    ));
    Ok(results)
}

fn corollary2_suite(seed: u64) -> Result<Vec<PropertyResult>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 60.0;
    let step = 0.01;
    let config = CriteriaConfig::default();
    let mut results = Vec::new();
    for i in 1..=4 {
        let base = Problem::builder()
            .term(
                ScalarFn::Constant(rng.gen_range(0.05..0.3)),
                DelayFn::ConstantLag(rng.gen_range(0.5..1.2)),
            )
            .build()?;
        let impulsive = base.with_schedule(ImpulseSchedule::periodic(
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(1.0..3.0),
        )?);
        let report = corollary2(&impulsive, horizon, &config)?;
        results.push(PropertyResult::holds(
            format!("corollary2.case{i}.certified"),
            report.verdict == Verdict::NonOscillationCertified,
        ));
        let mut base_settles = true;
        let mut all_oscillatory = true;
        for _ in 0..3 {
            let s = rng.gen();
            let base_class =
                classify(&solve(&with_random_initial(&base, s), horizon, step)?, 10.0).class;
            let class = classify(
                &solve(&with_random_initial(&impulsive, s), horizon, step)?,
                10.0,
            )
            .class;
            base_settles &= base_class != EmpiricalClass::Oscillatory;
            all_oscillatory &= class == EmpiricalClass::Oscillatory;
        }
        results.push(PropertyResult::holds(
            format!("corollary2.case{i}.impulses_keep_non_oscillation"),
            !(base_settles && all_oscillatory),
        ));
    }
    Ok(results)
}
