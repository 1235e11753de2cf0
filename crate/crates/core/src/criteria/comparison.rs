use std::fmt;

use super::{
    certify_by_inequality, check_theorem3, positive_index, CriteriaConfig, CriteriaError,
    CriterionReport, TheoremId, Verdict,
};
use crate::model::{DelayFn, Problem, ScalarFn, Term};

/// Where a comparison hypothesis fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComparisonWitness {
    Time(f64),
    /// Zero-based index in the merged impulse times of both problems, and the time.
    Impulse {
        index: usize,
        time: f64,
    },
}

impl fmt::Display for ComparisonWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparisonWitness::Time(t) => write!(f, "t = {t}"),
            ComparisonWitness::Impulse { index, time } => {
                write!(f, "impulse {index} at t = {time}")
            }
        }
    }
}

fn not_met(condition: impl Into<String>, witness: ComparisonWitness) -> CriteriaError {
    CriteriaError::HypothesisNotMet {
        condition: condition.into(),
        witness,
    }
}

/// Transfer a non-oscillation certificate from `problem` to `tilde`.
///
/// Requires `A_k >= Ã_k >= 0` on the grid, `0 < B_j <= B̃_j` at every impulse
/// of either problem (an impulse missing on one side counts as multiplier 1),
/// and either `h_k = h̃_k` or `h_k <= h̃_k` with all `B̃_j <= 1`.
/// `problem` itself is certified by the characteristic inequality or the
/// explicit tests; the returned report names the one used in `via`.
pub fn compare(
    problem: &Problem,
    tilde: &Problem,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    config.check()?;
    let t0 = problem.t0();
    if problem.terms().len() != tilde.terms().len() {
        return Err(not_met(
            "both problems have the same number of terms",
            ComparisonWitness::Time(t0),
        ));
    }
    let index = positive_index(problem, horizon)?;
    let tilde_index = positive_index(tilde, horizon)?;
    // Merge both schedules; a time missing from one side carries multiplier 1 there.
    let mut impulses: Vec<(f64, f64, f64)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (times, tilde_times) = (index.times(), tilde_index.times());
    while i < times.len() || j < tilde_times.len() {
        let a = times.get(i).copied().unwrap_or(f64::INFINITY);
        let b = tilde_times.get(j).copied().unwrap_or(f64::INFINITY);
        let time = a.min(b);
        let mult = if a == time {
            i += 1;
            index.multipliers()[i - 1]
        } else {
            1.0
        };
        let tilde_mult = if b == time {
            j += 1;
            tilde_index.multipliers()[j - 1]
        } else {
            1.0
        };
        impulses.push((time, mult, tilde_mult));
    }
    for (n, &(time, b, b_tilde)) in impulses.iter().enumerate() {
        if b > b_tilde {
            return Err(not_met(
                "B_j <= B~_j",
                ComparisonWitness::Impulse { index: n, time },
            ));
        }
    }

    let n = config.grid_n;
    let grid: Vec<f64> = (0..=n)
        .map(|i| t0 + (horizon - t0) * i as f64 / n as f64)
        .collect();
    let mut identical_delays = true;
    let mut first_advanced: Option<f64> = None;
    for &t in &grid {
        for (term, tilde_term) in problem.terms().iter().zip(tilde.terms()) {
            let a = term.coefficient.eval(t);
            let a_tilde = tilde_term.coefficient.eval(t);
            if a_tilde < 0.0 {
                return Err(not_met("A~_k(t) >= 0", ComparisonWitness::Time(t)));
            }
            if a < a_tilde {
                return Err(not_met("A_k(t) >= A~_k(t)", ComparisonWitness::Time(t)));
            }
            let (h, h_tilde) = (term.delay.eval(t), tilde_term.delay.eval(t));
            if h != h_tilde {
                identical_delays = false;
            }
            if h > h_tilde && first_advanced.is_none() {
                first_advanced = Some(t);
            }
        }
    }
    if !identical_delays {
        if let Some(t) = first_advanced {
            return Err(not_met(
                "h_k(t) <= h~_k(t) or identical delays",
                ComparisonWitness::Time(t),
            ));
        }
        if let Some(n) = impulses.iter().position(|&(_, _, b_tilde)| b_tilde > 1.0) {
            return Err(not_met(
                "B~_j <= 1 when delays differ",
                ComparisonWitness::Impulse {
                    index: n,
                    time: impulses[n].0,
                },
            ));
        }
    }

    let by_inequality = certify_by_inequality(problem, t0, horizon, config)?;
    let base = if by_inequality.verdict == Verdict::NonOscillationCertified {
        by_inequality
    } else {
        check_theorem3(problem, t0, horizon, config)?
    };
    let mut report = if base.verdict == Verdict::NonOscillationCertified {
        let mut r = CriterionReport::new(Verdict::NonOscillationCertified, TheoremId::T4);
        r.via = Some(base.theorem);
        r
    } else {
        CriterionReport::inconclusive(TheoremId::T4)
    };
    report.evidence = base.evidence;
    report.evidence.push((
        "identical_delays".into(),
        f64::from(u8::from(identical_delays)),
    ));
    report.parameters = base.parameters;
    Ok(report)
}

/// Comparison with the constant problem `x' + sum_k A_k x(t - h_k) = 0`
/// carrying the same impulses, given bounds `(A_k, h_k)` with
/// `0 <= A_k(t) <= A_k`, `t - h_k(t) <= h_k` and `B_j <= 1`.
pub fn corollary1(
    problem: &Problem,
    bounds: &[(f64, f64)],
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    let terms = bounds
        .iter()
        .map(|&(a, lag)| {
            DelayFn::constant_lag(lag)
                .map(|delay| Term::new(ScalarFn::Constant(a), delay))
                .map_err(|e| CriteriaError::InvalidInput(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let base = problem
        .with_terms(terms)
        .map_err(|e| CriteriaError::InvalidInput(e.to_string()))?;
    compare(&base, problem, horizon, config)
}

/// Comparison with the same equation without impulses, for `A_k >= 0` and
/// all `B_j >= 1`.
pub fn corollary2(
    problem: &Problem,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    let unit = problem
        .schedule()
        .with_multiplier(1.0)
        .map_err(|e| CriteriaError::InvalidInput(e.to_string()))?;
    compare(&problem.with_schedule(unit), problem, horizon, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ImpulseSchedule;

    fn unit_lag(a: f64, b: f64) -> Problem {
        Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
            .schedule(ImpulseSchedule::periodic(1.0, 1.0, b).unwrap())
            .build()
            .unwrap()
    }

    fn cfg() -> CriteriaConfig {
        CriteriaConfig::default()
    }

    #[test]
    fn reflexive_comparison() {
        let p = unit_lag(0.2, 1.0);
        let r = compare(&p, &p, 40.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);
        assert_eq!(r.theorem, TheoremId::T4);
    }

    #[test]
    fn smaller_coefficient_inherits_certificate() {
        let r = compare(&unit_lag(0.3, 0.95), &unit_lag(0.2, 0.95), 40.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);
        assert!(r.via.is_some());
    }

    #[test]
    fn larger_coefficient_is_a_violation() {
        let err = compare(&unit_lag(0.3, 0.95), &unit_lag(0.4, 1.0), 40.0, &cfg()).unwrap_err();
        match err {
            CriteriaError::HypothesisNotMet { condition, witness } => {
                assert_eq!(condition, "A_k(t) >= A~_k(t)");
                assert_eq!(witness, ComparisonWitness::Time(0.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiplier_and_time_mismatches_name_the_impulse() {
        let err = compare(&unit_lag(0.3, 1.0), &unit_lag(0.2, 0.9), 10.0, &cfg()).unwrap_err();
        assert!(matches!(
            err,
            CriteriaError::HypothesisNotMet {
                witness: ComparisonWitness::Impulse { index: 0, .. },
                ..
            }
        ));
        let shifted =
            unit_lag(0.2, 1.0).with_schedule(ImpulseSchedule::periodic(1.5, 1.0, 0.9).unwrap());
        match compare(&unit_lag(0.3, 1.0), &shifted, 10.0, &cfg()) {
            Err(CriteriaError::HypothesisNotMet {
                witness: ComparisonWitness::Impulse { index, time },
                ..
            }) => assert_eq!((index, time), (1, 1.5)),
            other => panic!("{other:?}"),
        }
        let unit =
            unit_lag(0.2, 1.0).with_schedule(ImpulseSchedule::periodic(1.5, 1.0, 1.0).unwrap());
        assert!(compare(&unit_lag(0.3, 1.0), &unit, 10.0, &cfg()).is_ok());
    }

    #[test]
    fn longer_delay_needs_small_multipliers() {
        let base = unit_lag(0.2, 0.9);
        let tilde = Problem::builder()
            .term(ScalarFn::Constant(0.2), DelayFn::constant_lag(0.5).unwrap())
            .schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.95).unwrap())
            .build()
            .unwrap();
        assert_eq!(
            compare(&base, &tilde, 20.0, &cfg()).unwrap().verdict,
            Verdict::NonOscillationCertified
        );
        let tilde_big = tilde.with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 1.5).unwrap());
        let base_big = base.with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 1.2).unwrap());
        assert!(matches!(
            compare(&base_big, &tilde_big, 20.0, &cfg()),
            Err(CriteriaError::HypothesisNotMet {
                witness: ComparisonWitness::Impulse { .. },
                ..
            })
        ));
    }

    #[test]
    fn corollaries() {
        let p = Problem::builder()
            .term(
                ScalarFn::parse("0.15 + 0.1*sin(t)").unwrap(),
                DelayFn::parse("t - 0.8 - 0.2*cos(t)").unwrap(),
            )
            .schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.9).unwrap())
            .build()
            .unwrap();
        let r = corollary1(&p, &[(0.25, 1.0)], 30.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);

        let q = unit_lag(0.3, 2.0);
        let r = corollary2(&q, 30.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);
        assert!(corollary2(&unit_lag(0.3, 0.5), 30.0, &cfg()).is_err());
    }
}
