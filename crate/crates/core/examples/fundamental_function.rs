//! Fundamental function `X(t, s)` and the variation-of-constants
//! representation checked against a direct solve.

use std::error::Error;

use impulsive_dde::integrator::{
    fundamental, fundamental_grid, representation_eval, solve_with_kicks, Kick,
};
use impulsive_dde::model::{DelayFn, ImpulseSchedule, Problem, ScalarFn};

pub fn run() -> Result<f64, Box<dyn Error>> {
    let problem = Problem::builder()
        .term(ScalarFn::Constant(0.4), DelayFn::constant_lag(0.7)?)
        .schedule(ImpulseSchedule::from_pairs(&[(1.3, 1.5), (2.2, 0.6)])?)
        .x0(0.5)
        .phi(ScalarFn::parse("cos(2*t)")?)
        .forcing(ScalarFn::parse("0.3*sin(t)")?)
        .build()?;
    let horizon = 4.0;
    let step = 0.005;

    let x = fundamental(&problem, 1.0, horizon, step)?;
    println!(
        "X(2, 1) = {:.8}, X(4, 1) = {:.8}",
        x.value(2.0).unwrap(),
        x.value(4.0).unwrap()
    );

    let kicks = [Kick {
        time: 0.9,
        amount: -0.4,
    }];
    let traj = solve_with_kicks(&problem, horizon, step, &kicks)?;
    let slices = fundamental_grid(&problem, horizon, step, &[0.9])?;
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let rep = representation_eval(&problem, &slices, t, &kicks)?;
        let direct = traj.value(t).unwrap();
        println!("t = {t}: representation {rep:.8}, solver {direct:.8}");
        worst = worst.max((rep - direct).abs());
    }
    println!("largest difference {worst:.2e}");
    Ok(worst)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
