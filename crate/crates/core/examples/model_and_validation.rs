//! Build a problem from expressions and check the standing hypotheses.

use std::error::Error;

use impulsive_dde::model::{validate, CheckStatus, DelayFn, ImpulseSchedule, Problem, ScalarFn};

pub fn run() -> Result<bool, Box<dyn Error>> {
    let problem = Problem::builder()
        .term(
            ScalarFn::parse("0.2 + 0.1*cos(t)")?,
            DelayFn::parse("t - 1 - 0.25*sin(t)*sin(t)")?,
        )
        .term(ScalarFn::Constant(0.05), DelayFn::proportional(0.5)?)
        .schedule(ImpulseSchedule::from_pairs(&[(1.5, 0.8), (3.0, 1.2)])?)
        .build()?;
    let report = validate(&problem, 20.0);
    for check in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Undecided => "undecided",
        };
        println!("{}: {status} {}", check.hypothesis, check.note);
    }
    match ScalarFn::parse("0.2 + * t") {
        Err(e) => println!("rejected expression at byte {}", e.offset()),
        Ok(_) => println!("unexpectedly parsed"),
    }
    Ok(report.all_passed())
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
