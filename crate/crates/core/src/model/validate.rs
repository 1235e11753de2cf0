//! Grid-sampled checks of the standing hypotheses (a1)-(a5).

use std::fmt;

use super::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    /// Impulse times strictly increase from 0 and tend to infinity.
    A1,
    /// Coefficients and forcing are finite (bounded) on the horizon.
    A2,
    /// `h_k(t) <= t`.
    A3,
    /// The initial function is finite on `[mu, t0)`.
    A4,
    /// Delays are bounded and eventually reach past `t0`.
    A5,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = match self {
            Hypothesis::A1 => "a1",
            Hypothesis::A2 => "a2",
            Hypothesis::A3 => "a3",
            Hypothesis::A4 => "a4",
            Hypothesis::A5 => "a5",
        };
        f.write_str(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Could not be decided within the sampled horizon.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub hypothesis: Hypothesis,
    pub status: CheckStatus,
    pub witness: Option<Witness>,
    pub note: String,
}

impl Check {
    fn pass(hypothesis: Hypothesis, note: impl Into<String>) -> Self {
        Check {
            hypothesis,
            status: CheckStatus::Pass,
            witness: None,
            note: note.into(),
        }
    }

    fn fail(hypothesis: Hypothesis, t: f64, value: f64, note: impl Into<String>) -> Self {
        Check {
            hypothesis,
            status: CheckStatus::Fail,
            witness: Some(Witness { t, value }),
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub horizon: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, hypothesis: Hypothesis) -> &Check {
        self.checks
            .iter()
            .find(|c| c.hypothesis == hypothesis)
            .expect("every hypothesis is checked")
    }

    pub fn passed(&self, hypothesis: Hypothesis) -> bool {
        self.check(hypothesis).status != CheckStatus::Fail
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.status == CheckStatus::Fail)
    }

    pub fn all_passed(&self) -> bool {
        self.first_failure().is_none()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// Sampling intervals over `[t0, horizon]`.
    pub samples: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { samples: 10_000 }
    }
}

pub fn validate(problem: &Problem, horizon: f64) -> ValidationReport {
    validate_with(problem, horizon, &ValidationOptions::default())
}

pub fn validate_with(
    problem: &Problem,
    horizon: f64,
    options: &ValidationOptions,
) -> ValidationReport {
    let n = options.samples.max(1);
    let t0 = problem.t0();
    let grid: Vec<f64> = (0..=n)
        .map(|i| t0 + (horizon - t0) * i as f64 / n as f64)
        .collect();
    let mu = problem.history_start(horizon, n);
    ValidationReport {
        horizon,
        checks: vec![
            check_a1(problem, horizon),
            check_a2(problem, &grid),
            check_a3(problem, &grid),
            check_a4(problem, mu, n),
            check_a5(problem, &grid, mu),
        ],
    }
}

fn check_a1(problem: &Problem, horizon: f64) -> Check {
    let impulses = problem.schedule().materialize(horizon);
    let mut previous = 0.0;
    for imp in &impulses {
        if imp.time <= previous {
            return Check::fail(
                Hypothesis::A1,
                imp.time,
                previous,
                "impulse times must increase strictly from 0",
            );
        }
        previous = imp.time;
    }
    Check::pass(
        Hypothesis::A1,
        format!("{} impulse(s) up to the horizon", impulses.len()),
    )
}

fn check_a2(problem: &Problem, grid: &[f64]) -> Check {
    for &t in grid {
        for (k, term) in problem.terms().iter().enumerate() {
            let a = term.coefficient.eval(t);
            if !a.is_finite() {
                return Check::fail(
                    Hypothesis::A2,
                    t,
                    a,
                    format!("coefficient {} not finite", k + 1),
                );
            }
        }
        let f = problem.forcing().eval(t);
        if !f.is_finite() {
            return Check::fail(Hypothesis::A2, t, f, "forcing not finite");
        }
    }
    Check::pass(
        Hypothesis::A2,
        "coefficients and forcing finite on the grid",
    )
}

fn check_a3(problem: &Problem, grid: &[f64]) -> Check {
    for &t in grid {
        for (k, term) in problem.terms().iter().enumerate() {
            let h = term.delay.eval(t);
            if h.is_nan() || h > t {
                return Check::fail(
                    Hypothesis::A3,
                    t,
                    h,
                    format!("delay {} advances past t", k + 1),
                );
            }
        }
    }
    Check::pass(Hypothesis::A3, "h_k(t) <= t on the grid")
}

fn check_a4(problem: &Problem, mu: f64, n: usize) -> Check {
    let t0 = problem.t0();
    if !mu.is_finite() {
        return Check::pass(Hypothesis::A4, "history interval unbounded; see a5");
    }
    if mu >= t0 {
        return Check::pass(Hypothesis::A4, "no history needed");
    }
    // [mu, t0): the right end is excluded.
    for i in 0..n {
        let t = mu + (t0 - mu) * i as f64 / n as f64;
        let v = problem.phi().eval(t);
        if !v.is_finite() {
            return Check::fail(Hypothesis::A4, t, v, "initial function not finite");
        }
    }
    Check::pass(
        Hypothesis::A4,
        format!("initial function finite on [{mu}, {t0})"),
    )
}

fn check_a5(problem: &Problem, grid: &[f64], mu: f64) -> Check {
    let t0 = problem.t0();
    if !mu.is_finite() {
        let t = grid
            .iter()
            .copied()
            .find(|&t| !problem.min_delay(t).is_finite())
            .unwrap_or(t0);
        return Check::fail(Hypothesis::A5, t, mu, "delayed argument unbounded below");
    }
    let last_behind = grid.iter().rposition(|&t| problem.min_delay(t) < t0);
    match last_behind {
        None => Check::pass(Hypothesis::A5, format!("mu = {mu}; s' = {t0}")),
        Some(i) if i + 1 < grid.len() => {
            Check::pass(Hypothesis::A5, format!("mu = {mu}; s' = {}", grid[i + 1]))
        }
        Some(_) => Check {
            hypothesis: Hypothesis::A5,
            status: CheckStatus::Undecided,
            witness: None,
            note: format!("mu = {mu}; s' not found within horizon"),
        },
    }
}
