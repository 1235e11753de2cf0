//! Sweep the coefficient of `x' + A x(t - 1) = 0` across `1/e`, certifying
//! each value and simulating from random initial functions.

use std::error::Error;

use impulsive_dde::empirics::{sweep, write_sweep_csv, Knob, SweepRow, SweepSettings};
use impulsive_dde::model::{DelayFn, Problem, ScalarFn};

pub fn run() -> Result<Vec<SweepRow>, Box<dyn Error>> {
    let template = Problem::builder()
        .term(ScalarFn::Constant(1.0), DelayFn::constant_lag(1.0)?)
        .build()?;
    let settings = SweepSettings {
        horizon: 80.0,
        seeds: 3,
        ..SweepSettings::default()
    };
    let values = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let rows = sweep(&template, Knob::CoefficientScale, &values, &settings)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows, settings.seeds)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(rows)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
