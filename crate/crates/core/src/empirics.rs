//! Empirical oscillation classification and parameter sweeps.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::criteria::{certify, CriteriaConfig, CriteriaError, TheoremId, Verdict};
use crate::integrator::{fmt17, solve, IntegratorError, Trajectory};
use crate::model::{DelayFn, ImpulseSchedule, ModelError, PeriodicTail, Problem, ScalarFn, Term};

/// Share of the span at the end used for the tail sign.
const TAIL_SHARE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmpiricalClass {
    EventuallyPositive,
    EventuallyNegative,
    Oscillatory,
    Undetermined,
}

impl fmt::Display for EmpiricalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmpiricalClass::EventuallyPositive => "EventuallyPositive",
            EmpiricalClass::EventuallyNegative => "EventuallyNegative",
            EmpiricalClass::Oscillatory => "Oscillatory",
            EmpiricalClass::Undetermined => "Undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVerdict {
    pub class: EmpiricalClass,
    /// Sign changes after `transient_cut`.
    pub sign_change_count: usize,
    pub last_crossing: Option<f64>,
    pub transient_cut: f64,
}

/// Classify a simulated solution by its sign changes after `transient_cut`.
///
/// Two or more crossings mean `Oscillatory`. With no crossing and one strict
/// sign over the last tenth of the span the solution is eventually of that
/// sign. A single crossing, a crossing inside the final tenth, or a tail
/// that touches zero gives `Undetermined`. The cut is clamped into the span.
pub fn classify(traj: &Trajectory, transient_cut: f64) -> EmpiricalVerdict {
    let (t0, t_end) = traj.span();
    let cut = transient_cut.clamp(t0, t_end);
    let crossings = traj.sign_changes(cut);
    let last_crossing = crossings.last().copied();
    let tail_start = t_end - TAIL_SHARE * (t_end - t0);
    let class = if crossings.len() >= 2 {
        EmpiricalClass::Oscillatory
    } else if !crossings.is_empty() {
        EmpiricalClass::Undetermined
    } else {
        tail_sign(traj, tail_start.max(cut))
    };
    EmpiricalVerdict {
        class,
        sign_change_count: crossings.len(),
        last_crossing,
        transient_cut: cut,
    }
}

fn tail_sign(traj: &Trajectory, from: f64) -> EmpiricalClass {
    let values: Vec<f64> = traj
        .nodes()
        .into_iter()
        .filter(|&(t, _)| t >= from)
        .map(|(_, x)| x)
        .chain(std::iter::once(traj.final_value()))
        .collect();
    if values.iter().all(|&x| x > 0.0) {
        EmpiricalClass::EventuallyPositive
    } else if values.iter().all(|&x| x < 0.0) {
        EmpiricalClass::EventuallyNegative
    } else {
        EmpiricalClass::Undetermined
    }
}

/// Trigonometric polynomial of degree 3 with coefficients uniform in `[-1, 1]`,
/// as an expression so it can be printed and reparsed.
pub fn random_initial_function(seed: u64) -> ScalarFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = format!("{:e}", rng.gen_range(-1.0..=1.0));
    for k in 1..=3 {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        text.push_str(&format!(" + ({a:e})*cos({k}*t) + ({b:e})*sin({k}*t)"));
    }
    ScalarFn::parse(&text).expect("generated expression parses")
}

/// `problem` restarted from a continuous random initial function.
pub fn with_random_initial(problem: &Problem, seed: u64) -> Problem {
    let phi = random_initial_function(seed);
    let x0 = phi.eval(problem.t0());
    problem.with_initial(problem.t0(), x0, phi)
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knob {
    /// Multiplies every coefficient.
    CoefficientScale,
    /// Replaces every delay by `t - value`.
    DelayLag,
    /// Sets every impulse multiplier.
    ImpulseMultiplier,
    /// Sets the period of the periodic impulse tail.
    ImpulsePeriod,
}

impl FromStr for Knob {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "coefficient_scale" => Knob::CoefficientScale,
            "delay_lag" => Knob::DelayLag,
            "impulse_multiplier" => Knob::ImpulseMultiplier,
            "impulse_period" => Knob::ImpulsePeriod,
            other => return Err(format!("unknown sweep knob {other}")),
        })
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Knob::CoefficientScale => "coefficient_scale",
            Knob::DelayLag => "delay_lag",
            Knob::ImpulseMultiplier => "impulse_multiplier",
            Knob::ImpulsePeriod => "impulse_period",
        })
    }
}

impl Knob {
    /// The template with this knob set to `value`.
    pub fn apply(self, template: &Problem, value: f64) -> Result<Problem, SweepError> {
        match self {
            Knob::CoefficientScale => {
                let terms = template
                    .terms()
                    .iter()
                    .map(|term| Term::new(term.coefficient.scaled(value), term.delay.clone()))
                    .collect();
                Ok(template.with_terms(terms)?)
            }
            Knob::DelayLag => {
                let delay = DelayFn::constant_lag(value)?;
                let terms = template
                    .terms()
                    .iter()
                    .map(|term| Term::new(term.coefficient.clone(), delay.clone()))
                    .collect();
                Ok(template.with_terms(terms)?)
            }
            Knob::ImpulseMultiplier => {
                Ok(template.with_schedule(template.schedule().with_multiplier(value)?))
            }
            Knob::ImpulsePeriod => {
                let schedule = template.schedule();
                let tail = schedule.tail().ok_or_else(|| {
                    SweepError::InvalidInput(
                        "impulse_period needs a periodic impulse schedule".into(),
                    )
                })?;
                let tail = PeriodicTail {
                    period: value,
                    ..*tail
                };
                Ok(template.with_schedule(ImpulseSchedule::new(
                    schedule.explicit().to_vec(),
                    Some(tail),
                )?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub horizon: f64,
    pub step: f64,
    pub seeds: usize,
    /// First seed; seed `i` uses `base_seed + i`.
    pub base_seed: u64,
    pub transient_cut: f64,
    pub criteria: CriteriaConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            horizon: 100.0,
            step: 0.01,
            seeds: 5,
            base_seed: 0,
            transient_cut: 10.0,
            criteria: CriteriaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub certified: Verdict,
    pub certified_theorem: TheoremId,
    pub empirical: Vec<EmpiricalVerdict>,
}

impl SweepRow {
    pub fn all_seeds(&self, class: EmpiricalClass) -> bool {
        !self.empirical.is_empty() && self.empirical.iter().all(|e| e.class == class)
    }
}

/// Certify and simulate the template at every knob value. Rows run in
/// parallel and come back in input order.
pub fn sweep(
    template: &Problem,
    knob: Knob,
    values: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>, SweepError> {
    if !(settings.horizon > template.t0()) || !(settings.step > 0.0) {
        return Err(SweepError::InvalidInput(format!(
            "need horizon > t0 and a positive step, got horizon {} step {}",
            settings.horizon, settings.step
        )));
    }
    values
        .par_iter()
        .map(|&value| sweep_row(template, knob, value, settings))
        .collect()
}

fn sweep_row(
    template: &Problem,
    knob: Knob,
    value: f64,
    settings: &SweepSettings,
) -> Result<SweepRow, SweepError> {
    let problem = knob.apply(template, value)?;
    let decision = certify(&problem, settings.horizon, &settings.criteria)?.decision;
    let empirical = (0..settings.seeds as u64)
        .map(|i| {
            let run = with_random_initial(&problem, settings.base_seed + i);
            let traj = solve(&run, settings.horizon, settings.step)?;
            Ok(classify(&traj, settings.transient_cut))
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepRow {
        value,
        certified: decision.verdict,
        certified_theorem: decision.theorem,
        empirical,
    })
}

/// Header and one line per row: `value,certified,certified_theorem,empirical_seed_1..N`.
pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow], seeds: usize) -> io::Result<()> {
    let mut header = String::from("value,certified,certified_theorem");
    for i in 1..=seeds {
        header.push_str(&format!(",empirical_seed_{i}"));
    }
    writeln!(out, "{header}")?;
    for row in rows {
        let mut line = format!(
            "{},{},{}",
            fmt17(row.value),
            row.certified,
            row.certified_theorem
        );
        for e in &row.empirical {
            line.push_str(&format!(",{}", e.class));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_lag(a: f64) -> Problem {
        Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
            .build()
            .unwrap()
    }

    #[test]
    fn decaying_exponential_is_eventually_positive() {
        let p = Problem::builder()
            .term(ScalarFn::Constant(1.0), DelayFn::constant_lag(0.0).unwrap())
            .build()
            .unwrap();
        let v = classify(&solve(&p, 10.0, 0.01).unwrap(), 1.0);
        assert_eq!(v.class, EmpiricalClass::EventuallyPositive);
        assert_eq!(v.sign_change_count, 0);
        assert_eq!(v.last_crossing, None);
    }

    #[test]
    fn classical_threshold_sides() {
        let v = classify(&solve(&unit_lag(2.0), 50.0, 0.01).unwrap(), 10.0);
        assert_eq!(v.class, EmpiricalClass::Oscillatory);
        assert!(v.sign_change_count > 2);
        let v = classify(&solve(&unit_lag(0.2), 50.0, 0.01).unwrap(), 10.0);
        assert_eq!(v.class, EmpiricalClass::EventuallyPositive);
        let negative = unit_lag(0.2).with_initial(0.0, -1.0, ScalarFn::Constant(-1.0));
        let v = classify(&solve(&negative, 50.0, 0.01).unwrap(), 10.0);
        assert_eq!(v.class, EmpiricalClass::EventuallyNegative);
    }

    #[test]
    fn single_late_crossing_is_undetermined() {
        // x' = -1 from x(0) = 9 crosses zero at t = 9, inside the last tenth of [0, 10].
        let p = Problem::builder()
            .term(ScalarFn::zero(), DelayFn::constant_lag(1.0).unwrap())
            .x0(9.0)
            .phi(ScalarFn::Constant(9.0))
            .forcing(ScalarFn::Constant(-1.0))
            .build()
            .unwrap();
        let v = classify(&solve(&p, 10.0, 0.01).unwrap(), 0.0);
        assert_eq!(v.class, EmpiricalClass::Undetermined);
        assert_eq!(v.sign_change_count, 1);
        assert!((v.last_crossing.unwrap() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn random_initial_functions_are_deterministic_and_bounded() {
        let f = random_initial_function(7);
        let g = random_initial_function(7);
        let h = random_initial_function(8);
        let mut differs = false;
        for i in 0..100 {
            let t = -1.0 + 0.01 * i as f64;
            assert_eq!(f.eval(t), g.eval(t));
            assert!(f.eval(t).abs() <= 7.0);
            differs |= f.eval(t) != h.eval(t);
        }
        assert!(differs);
    }

    #[test]
    fn knobs_modify_the_template() {
        let template =
            unit_lag(1.0).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 1.0).unwrap());
        let p = Knob::CoefficientScale.apply(&template, 0.3).unwrap();
        assert_eq!(p.terms()[0].coefficient.eval(5.0), 0.3);
        let p = Knob::DelayLag.apply(&template, 0.5).unwrap();
        assert_eq!(p.terms()[0].delay.eval(5.0), 4.5);
        let p = Knob::ImpulseMultiplier.apply(&template, 2.0).unwrap();
        assert!(p
            .schedule()
            .materialize(5.0)
            .iter()
            .all(|i| i.multiplier == 2.0));
        let p = Knob::ImpulsePeriod.apply(&template, 2.5).unwrap();
        let times: Vec<f64> = p
            .schedule()
            .materialize(7.0)
            .iter()
            .map(|i| i.time)
            .collect();
        assert_eq!(times, vec![1.0, 3.5, 6.0]);
        assert!(Knob::ImpulsePeriod.apply(&unit_lag(1.0), 2.0).is_err());
        assert_eq!("delay_lag".parse::<Knob>().unwrap(), Knob::DelayLag);
    }

    #[test]
    fn empty_sweep_gives_header_only() {
        let rows = sweep(
            &unit_lag(1.0),
            Knob::CoefficientScale,
            &[],
            &SweepSettings::default(),
        )
        .unwrap();
        assert!(rows.is_empty());
        let mut out = Vec::new();
        write_sweep_csv(&mut out, &rows, 2).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "value,certified,certified_theorem,empirical_seed_1,empirical_seed_2\n"
        );
    }
}
