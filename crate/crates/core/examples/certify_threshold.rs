//! Certificates on both sides of the `1/e` threshold for `x' + A x(t - 1) = 0`.

use std::error::Error;

use impulsive_dde::criteria::{certify, CriteriaConfig, Verdict};
use impulsive_dde::model::{DelayFn, Problem, ScalarFn};

pub fn run() -> Result<Vec<(f64, Verdict)>, Box<dyn Error>> {
    let config = CriteriaConfig::default();
    let mut out = Vec::new();
    for a in [0.2, 0.3, 0.365, 0.37, 0.4, 0.5] {
        let problem = Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0)?)
            .build()?;
        let decision = certify(&problem, 100.0, &config)?.decision;
        println!("A = {a}: {} by {}", decision.verdict, decision.theorem);
        out.push((a, decision.verdict));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
