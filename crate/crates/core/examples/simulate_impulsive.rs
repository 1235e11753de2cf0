//! Solve `x' + 0.3 x(t - 1) = 0` with jumps `x(j) = 0.5 x(j - 0)` and print
//! the jumps and sign changes.

use std::error::Error;

use impulsive_dde::integrator::solve;
use impulsive_dde::model::{DelayFn, ImpulseSchedule, Problem, ScalarFn};

pub fn run() -> Result<usize, Box<dyn Error>> {
    let problem = Problem::builder()
        .term(ScalarFn::Constant(0.3), DelayFn::constant_lag(1.0)?)
        .schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.5)?)
        .phi(ScalarFn::parse("1 + 0.5*sin(3*t)")?)
        .x0(1.0)
        .build()?;
    let traj = solve(&problem, 30.0, 0.001)?;
    for jump in traj.jumps().iter().take(3) {
        println!(
            "jump at t = {}: {:.6} -> {:.6}",
            jump.time, jump.left, jump.right
        );
    }
    let crossings = traj.sign_changes(0.0);
    println!(
        "{} sign changes on [0, 30], x(30) = {:.6e}",
        crossings.len(),
        traj.final_value()
    );
    Ok(crossings.len())
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
