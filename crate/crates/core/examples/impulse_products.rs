//! Products of jump multipliers over windows `(a, b]` from a prefix index.

use std::error::Error;

use impulsive_dde::impulse_algebra::ImpulseProductIndex;
use impulsive_dde::model::ImpulseSchedule;

pub fn run() -> Result<f64, Box<dyn Error>> {
    let schedule = ImpulseSchedule::periodic(1.0, 1.0, 0.5)?;
    let index = ImpulseProductIndex::build(&schedule, 100.0)?;
    let p = index.product(0.0, 10.0)?;
    println!("{} impulses up to t = 100", index.len());
    println!("product over (0, 10] = {p:e}");
    println!(
        "inverse product over (2.5, 5] = {}",
        index.inverse_product(2.5, 5.0)?
    );
    println!("product over (4, 5) = {}", index.product_open(4.0, 5.0)?);
    println!("impulses in (0.5, 7.5] = {}", index.count(0.5, 7.5)?);
    Ok(p)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
