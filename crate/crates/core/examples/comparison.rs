//! Transfer a non-oscillation certificate to a problem with smaller
//! coefficients, and see a violated hypothesis reported with its witness.

use std::error::Error;

use impulsive_dde::criteria::{compare, corollary1, CriteriaConfig, CriteriaError};
use impulsive_dde::model::{DelayFn, ImpulseSchedule, Problem, ScalarFn};

pub fn run() -> Result<bool, Box<dyn Error>> {
    let config = CriteriaConfig::default();
    let unit = ImpulseSchedule::periodic(1.0, 1.0, 1.0)?;
    let problem = |a: f64| -> Result<Problem, Box<dyn Error>> {
        Ok(Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0)?)
            .schedule(unit.clone())
            .build()?)
    };
    let report = compare(&problem(0.3)?, &problem(0.2)?, 100.0, &config)?;
    let via = report.via.map_or("-".to_string(), |v| v.to_string());
    println!(
        "A~ = 0.2: {} by {} via {via}",
        report.verdict, report.theorem
    );

    let violated = match compare(&problem(0.3)?, &problem(0.4)?, 100.0, &config) {
        Err(CriteriaError::HypothesisNotMet { condition, witness }) => {
            println!("A~ = 0.4: {condition} fails at {witness}");
            true
        }
        other => {
            println!("A~ = 0.4: {other:?}");
            false
        }
    };

    let varying = Problem::builder()
        .term(
            ScalarFn::parse("0.2 + 0.1*sin(t)")?,
            DelayFn::parse("t - 0.9 - 0.1*cos(t)")?,
        )
        .schedule(ImpulseSchedule::periodic(0.5, 1.0, 0.9)?)
        .build()?;
    let bounded = corollary1(&varying, &[(0.3, 1.0)], 60.0, &config)?;
    println!(
        "bounded by A = 0.3, lag 1: {} by {}",
        bounded.verdict, bounded.theorem
    );
    Ok(violated)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
