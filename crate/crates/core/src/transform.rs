//! Impulse-free equivalent equation and the conjugation map between solutions.
//!
//! With all `B_j > 0`, `y(t) = x(t) prod_{t0 < tau_j <= t} B_j^{-1}` turns a
//! solution of the impulsive equation into a solution of
//!
//! ```text
//! y'(t) + sum_k A_k(t) prod_{max(h_k(t), c) < tau_j <= t} B_j^{-1} y[h_k(t)] = f(t) prod_{c < tau_j <= t} B_j^{-1}
//! ```
//!
//! where `c` is the cutoff point (by default `t0`). The map is continuous at
//! every impulse time and never changes sign.

use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::impulse_algebra::{AlgebraError, ImpulseProductIndex};
use crate::integrator::{fmt17, Trajectory};
use crate::model::{CustomFn, DelayFn, ImpulseSchedule, Problem, ScalarFn, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("impulse multiplier {multiplier} at t = {time} is not positive")]
    NonPositiveMultiplier { time: f64, multiplier: f64 },
    #[error("t = {requested} lies beyond the transform horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },
    #[error("term index {0} out of range")]
    NoSuchTerm(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Impulse-free problem together with the data it came from.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub base: Problem,
    pub provenance: Problem,
    pub index: Arc<ImpulseProductIndex>,
    pub cutoff: f64,
}

/// Transform with the window cut off at the problem's `t0`.
pub fn remove_impulses(
    problem: &Problem,
    horizon: f64,
) -> Result<TransformedProblem, TransformError> {
    remove_impulses_with_cutoff(problem, horizon, problem.t0())
}

/// Transform counting only impulses after `cutoff` in every window.
pub fn remove_impulses_with_cutoff(
    problem: &Problem,
    horizon: f64,
    cutoff: f64,
) -> Result<TransformedProblem, TransformError> {
    let index = Arc::new(positive_index(problem.schedule(), horizon)?);
    let lags: Vec<f64> = problem
        .terms()
        .iter()
        .filter_map(|term| term.delay.fixed_lag())
        .collect();
    let mut jump_points: Vec<f64> = index
        .times()
        .iter()
        .copied()
        .filter(|&t| t > cutoff)
        .collect();
    let shifted: Vec<f64> = jump_points
        .iter()
        .flat_map(|&tau| lags.iter().map(move |&lag| window_exit(tau, lag)))
        .filter(|&t| t <= horizon)
        .collect();
    jump_points.extend(shifted);

    let terms: Vec<Term> = problem
        .terms()
        .iter()
        .enumerate()
        .map(|(k, term)| {
            let coefficient = term.coefficient.clone();
            let delay = term.delay.clone();
            let idx = Arc::clone(&index);
            let mut disc = coefficient.discontinuities();
            disc.extend_from_slice(&jump_points);
            let func = CustomFn::new(format!("a_{}", k + 1), disc, move |t| {
                transformed_coefficient(&coefficient, &delay, &idx, cutoff, t).unwrap_or(f64::NAN)
            });
            Term::new(ScalarFn::Custom(func), term.delay.clone())
        })
        .collect();

    let forcing = match problem.forcing() {
        ScalarFn::Constant(c) if *c == 0.0 => ScalarFn::zero(),
        f => {
            let f = f.clone();
            let idx = Arc::clone(&index);
            let mut disc = f.discontinuities();
            disc.extend(index.times().iter().copied().filter(|&t| t > cutoff));
            ScalarFn::Custom(CustomFn::new("g", disc, move |t| {
                if t <= cutoff {
                    return f.eval(t);
                }
                idx.inverse_product(cutoff, t)
                    .map_or(f64::NAN, |p| f.eval(t) * p)
            }))
        }
    };

    let base = problem
        .with_terms(terms)
        .expect("term count is unchanged")
        .with_schedule(ImpulseSchedule::empty())
        .with_forcing(forcing);
    Ok(TransformedProblem {
        base,
        provenance: problem.clone(),
        index,
        cutoff,
    })
}

fn positive_index(
    schedule: &ImpulseSchedule,
    horizon: f64,
) -> Result<ImpulseProductIndex, TransformError> {
    if let Some(imp) = schedule.first_non_positive(horizon) {
        return Err(TransformError::NonPositiveMultiplier {
            time: imp.time,
            multiplier: imp.multiplier,
        });
    }
    Ok(ImpulseProductIndex::build(schedule, horizon)?)
}

/// First `t` with `t - lag >= tau` in floating point, where `tau` leaves the window.
fn window_exit(tau: f64, lag: f64) -> f64 {
    let mut t = tau + lag;
    while t - lag < tau {
        t = t.next_up();
    }
    while t.next_down() - lag >= tau {
        t = t.next_down();
    }
    t
}

fn transformed_coefficient(
    coefficient: &ScalarFn,
    delay: &DelayFn,
    index: &ImpulseProductIndex,
    cutoff: f64,
    t: f64,
) -> Result<f64, TransformError> {
    if t > index.horizon() {
        return Err(TransformError::HorizonExceeded {
            requested: t,
            horizon: index.horizon(),
        });
    }
    let a = coefficient.eval(t);
    let lower = delay.eval(t).max(cutoff);
    if lower >= t || a == 0.0 {
        return Ok(a);
    }
    Ok(a * index.inverse_product(lower, t)?)
}

impl TransformedProblem {
    /// Coefficient of term `k` (zero-based) at `t`.
    pub fn coefficient(&self, k: usize, t: f64) -> Result<f64, TransformError> {
        let term = self
            .provenance
            .terms()
            .get(k)
            .ok_or(TransformError::NoSuchTerm(k))?;
        transformed_coefficient(&term.coefficient, &term.delay, &self.index, self.cutoff, t)
    }

    /// Samples `t, a_1(t), ..., a_m(t)` on `samples + 1` equally spaced points.
    pub fn write_coefficients_csv<W: Write>(
        &self,
        mut out: W,
        t_from: f64,
        t_to: f64,
        samples: usize,
    ) -> io::Result<()> {
        let m = self.provenance.terms().len();
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=m).map(|k| format!("a_{k}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        let n = samples.max(1);
        for i in 0..=n {
            let t = (t_from + (t_to - t_from) * i as f64 / n as f64).min(t_to);
            let mut row = vec![fmt17(t)];
            for k in 0..m {
                let a = self
                    .coefficient(k, t)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
                row.push(fmt17(a));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `y(t) = x(t) prod_{t0 < tau_j <= t} B_j^{-1}` over a trajectory.
#[derive(Debug, Clone)]
pub struct Conjugated<'a> {
    trajectory: &'a Trajectory,
    index: ImpulseProductIndex,
}

pub fn conjugate<'a>(
    trajectory: &'a Trajectory,
    schedule: &ImpulseSchedule,
) -> Result<Conjugated<'a>, TransformError> {
    let index = positive_index(schedule, trajectory.t_end())?;
    Ok(Conjugated { trajectory, index })
}

impl Conjugated<'_> {
    pub fn trajectory(&self) -> &Trajectory {
        self.trajectory
    }

    pub fn value(&self, t: f64) -> Option<f64> {
        let x = self.trajectory.value(t)?;
        let p = self.index.inverse_product(self.trajectory.t0(), t).ok()?;
        Some(x * p)
    }

    pub fn left_limit(&self, t: f64) -> Option<f64> {
        let t0 = self.trajectory.t0();
        let x = self.trajectory.left_limit(t)?;
        if t <= t0 {
            return Some(x);
        }
        let p = self.index.product_open(t0, t).ok()?;
        Some(x / p)
    }

    /// Sign changes after `t_from`. The factor is positive, so these are the
    /// sign changes of the underlying trajectory.
    pub fn sign_changes(&self, t_from: f64) -> Vec<f64> {
        self.trajectory.sign_changes(t_from)
    }

    /// Largest `|y(t) - other(t)|` over the step boundaries of both
    /// trajectories inside their common span.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        let lo = self.trajectory.t0().max(other.t0());
        let hi = self.trajectory.t_end().min(other.t_end());
        let mut times = self.trajectory.breakpoints();
        times.extend(other.breakpoints());
        times
            .into_iter()
            .filter(|&t| t >= lo && t <= hi)
            .filter_map(|t| Some((self.value(t)? - other.value(t)?).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|y(tau - 0) - y(tau)|` over the recorded jumps, relative to `1 + |y(tau)|`.
    pub fn max_jump_mismatch(&self) -> f64 {
        self.trajectory
            .jumps()
            .iter()
            .filter_map(|jump| {
                let right = self.value(jump.time)?;
                let left = self.left_limit(jump.time)?;
                Some((left - right).abs() / (1.0 + right.abs()))
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::solve;

    fn unit_lag(a: f64) -> Problem {
        Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
            .build()
            .unwrap()
    }

    #[test]
    fn empty_schedule_leaves_coefficients_alone() {
        let p = Problem::builder()
            .term(
                ScalarFn::parse("1 + sin(t)").unwrap(),
                DelayFn::constant_lag(0.7).unwrap(),
            )
            .build()
            .unwrap();
        let tp = remove_impulses(&p, 50.0).unwrap();
        assert!(tp.base.schedule().is_empty());
        for i in 0..100 {
            let t = 0.5 * i as f64;
            let a = tp.base.terms()[0].coefficient.eval(t);
            assert_eq!(a, p.terms()[0].coefficient.eval(t));
        }
    }

    #[test]
    fn window_membership() {
        let p = unit_lag(1.0).with_schedule(ImpulseSchedule::from_pairs(&[(1.5, 2.0)]).unwrap());
        let tp = remove_impulses(&p, 10.0).unwrap();
        assert!((tp.coefficient(0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tp.coefficient(0, 1.2).unwrap(), 1.0);
        assert_eq!(tp.coefficient(0, 1.5).unwrap(), 0.5);
        assert_eq!(tp.coefficient(0, 2.5).unwrap(), 1.0);
        assert_eq!(
            tp.base.terms()[0].coefficient.eval(2.0),
            tp.coefficient(0, 2.0).unwrap()
        );
        assert!(matches!(
            tp.coefficient(0, 11.0),
            Err(TransformError::HorizonExceeded { .. })
        ));
        assert!(tp.base.terms()[0].coefficient.eval(11.0).is_nan());
    }

    #[test]
    fn non_positive_multiplier_rejected() {
        let p = unit_lag(1.0).with_schedule(ImpulseSchedule::from_pairs(&[(1.0, -1.0)]).unwrap());
        assert_eq!(
            remove_impulses(&p, 5.0).unwrap_err(),
            TransformError::NonPositiveMultiplier {
                time: 1.0,
                multiplier: -1.0
            }
        );
    }

    #[test]
    fn conjugate_is_continuous_and_matches_direct_solution() {
        let p = unit_lag(1.0).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0).unwrap());
        let x = solve(&p, 8.0, 1e-3).unwrap();
        let y = conjugate(&x, p.schedule()).unwrap();
        assert!(y.max_jump_mismatch() < 1e-10);
        let tp = remove_impulses(&p, 8.0).unwrap();
        let direct = solve(&tp.base, 8.0, 1e-3).unwrap();
        assert!(y.sup_distance(&direct) < 1e-4);
        assert_eq!(y.sign_changes(2.0).len(), direct.sign_changes(2.0).len());
    }

    #[test]
    fn forcing_is_carried_through() {
        let p = unit_lag(0.6)
            .with_schedule(ImpulseSchedule::from_pairs(&[(0.8, 0.5), (2.3, 3.0)]).unwrap())
            .with_forcing(ScalarFn::parse("cos(t)").unwrap());
        let x = solve(&p, 5.0, 1e-3).unwrap();
        let y = conjugate(&x, p.schedule()).unwrap();
        let direct = solve(&remove_impulses(&p, 5.0).unwrap().base, 5.0, 1e-3).unwrap();
        assert!(y.sup_distance(&direct) < 1e-6);
    }

    #[test]
    fn csv_has_one_column_per_term() {
        let p = unit_lag(1.0).with_schedule(ImpulseSchedule::from_pairs(&[(1.5, 2.0)]).unwrap());
        let tp = remove_impulses(&p, 4.0).unwrap();
        let mut buf = Vec::new();
        tp.write_coefficients_csv(&mut buf, 0.0, 4.0, 8).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,a_1");
        assert_eq!(lines.len(), 10);
        assert!(lines[5].ends_with("5.0000000000000000e-1"));
    }
}
