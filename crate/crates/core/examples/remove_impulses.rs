//! Replace jumps by modified coefficients and compare the conjugated
//! impulsive solution with the impulse-free one.

use std::error::Error;

use impulsive_dde::integrator::solve;
use impulsive_dde::model::{DelayFn, ImpulseSchedule, Problem, ScalarFn};
use impulsive_dde::transform::{conjugate, remove_impulses};

pub fn run() -> Result<f64, Box<dyn Error>> {
    let problem = Problem::builder()
        .term(ScalarFn::Constant(1.0), DelayFn::constant_lag(1.0)?)
        .schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0)?)
        .build()?;
    let horizon = 20.0;
    let transformed = remove_impulses(&problem, horizon)?;
    for t in [0.5, 1.5, 2.5] {
        println!("a(t = {t}) = {}", transformed.coefficient(0, t)?);
    }
    let impulsive = solve(&problem, horizon, 0.001)?;
    let smooth = solve(&transformed.base, horizon, 0.001)?;
    let y = conjugate(&impulsive, problem.schedule())?;
    let distance = y.sup_distance(&smooth);
    println!("sup |y - z| = {distance:.2e}");
    println!(
        "sign changes after t = 2: {} conjugated, {} transformed",
        y.sign_changes(2.0).len(),
        smooth.sign_changes(2.0).len()
    );
    Ok(distance)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
