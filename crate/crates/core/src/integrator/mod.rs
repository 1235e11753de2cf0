//! Method-of-steps RK4 solver with Hermite dense output, fundamental
//! functions and the variation-of-constants representation.

mod fundamental;
mod trajectory;

use thiserror::Error;

use crate::model::{DelayFn, Impulse, Problem};

pub use fundamental::{fundamental, fundamental_grid, representation_eval, FundamentalSlice};
pub use trajectory::{fmt17, Jump, Segment, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step {step} exceeds the smallest delay lag {min_lag}")]
    StepTooLarge { step: f64, min_lag: f64 },
    #[error("solution is not finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("delayed argument h({t}) = {value} lies ahead of t")]
    AdvancedArgument { t: f64, value: f64 },
    #[error("impulse times are not strictly increasing at t = {time}")]
    UnorderedSchedule { time: f64 },
    #[error("no fundamental slice for s = {s}")]
    MissingSlice { s: f64 },
}

/// Additive impulse: `x(time) = B x(time - 0) + amount`, with `B = 1` when
/// no scheduled impulse falls at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    pub time: f64,
    pub amount: f64,
}

/// Lags below this count as vanishing: they only trigger a warning.
const VANISHING_LAG: f64 = 1e-9;
/// Depth of lag propagation when placing breakpoints.
const PROPAGATION_DEPTH: usize = 4;
const MAX_SOFT_NODES: usize = 200_000;

pub fn solve(problem: &Problem, t_end: f64, step: f64) -> Result<Trajectory, IntegratorError> {
    solve_with_kicks(problem, t_end, step, &[])
}

pub fn solve_with_kicks(
    problem: &Problem,
    t_end: f64,
    step: f64,
    kicks: &[Kick],
) -> Result<Trajectory, IntegratorError> {
    let grid = step_grid(problem, t_end, step, kicks)?;
    check_lags(problem, t_end, step)?;
    let impulses = scheduled_impulses(problem, t_end)?;
    Solver::new(problem, grid.len()).run(&grid, &impulses, kicks)
}

/// Constant lag of a delay, looking through a cutoff clamp.
fn constant_lag(delay: &DelayFn) -> Option<f64> {
    match delay {
        DelayFn::ConstantLag(lag) => Some(*lag),
        DelayFn::Clamped { inner, .. } => constant_lag(inner),
        _ => None,
    }
}

fn check_input(problem: &Problem, t_end: f64, step: f64) -> Result<(), IntegratorError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(IntegratorError::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    if !t_end.is_finite() || t_end < problem.t0() {
        return Err(IntegratorError::InvalidInput(format!(
            "end time {t_end} precedes t0 = {}",
            problem.t0()
        )));
    }
    Ok(())
}

fn scheduled_impulses(problem: &Problem, t_end: f64) -> Result<Vec<Impulse>, IntegratorError> {
    let t0 = problem.t0();
    let all = problem.schedule().materialize(t_end);
    for pair in all.windows(2) {
        if pair[1].time <= pair[0].time {
            return Err(IntegratorError::UnorderedSchedule { time: pair[1].time });
        }
    }
    Ok(all.into_iter().filter(|imp| imp.time > t0).collect())
}

fn check_lags(problem: &Problem, t_end: f64, step: f64) -> Result<(), IntegratorError> {
    let t0 = problem.t0();
    let samples = 1000;
    let mut min_lag = f64::INFINITY;
    for term in problem.terms() {
        let lag = match constant_lag(&term.delay) {
            Some(lag) => lag,
            None => (0..=samples)
                .map(|i| t0 + (t_end - t0) * i as f64 / samples as f64)
                .map(|t| term.delay.lag_at(t))
                .fold(f64::INFINITY, f64::min),
        };
        min_lag = min_lag.min(lag);
    }
    if min_lag < VANISHING_LAG {
        log::warn!("delay lag vanishes (min {min_lag:e}); lookups near t use the current step");
        return Ok(());
    }
    if min_lag < step {
        return Err(IntegratorError::StepTooLarge { step, min_lag });
    }
    Ok(())
}

/// Step boundaries used by [`solve_with_kicks`].
///
/// Every impulse, kick and data discontinuity is a node, as are those
/// points shifted forward by constant lags (where the delayed argument meets
/// them). Each interval between nodes is split into equal substeps no longer
/// than `step`.
pub fn step_grid(
    problem: &Problem,
    t_end: f64,
    step: f64,
    kicks: &[Kick],
) -> Result<Vec<f64>, IntegratorError> {
    check_input(problem, t_end, step)?;
    let t0 = problem.t0();
    if t_end == t0 {
        return Ok(vec![t0]);
    }
    let inside = |t: f64| t > t0 && t < t_end;

    let mut hard = vec![t0, t_end];
    hard.extend(
        problem
            .schedule()
            .materialize(t_end)
            .iter()
            .map(|imp| imp.time)
            .filter(|&t| inside(t)),
    );
    for kick in kicks {
        if !(kick.time > t0 && kick.time <= t_end) {
            return Err(IntegratorError::InvalidInput(format!(
                "kick at {} outside ({t0}, {t_end}]",
                kick.time
            )));
        }
        hard.push(kick.time);
    }
    hard.extend(
        problem
            .data_discontinuities()
            .into_iter()
            .filter(|&t| inside(t)),
    );
    hard.sort_by(f64::total_cmp);
    hard.dedup();

    let mut lags: Vec<f64> = problem
        .terms()
        .iter()
        .filter_map(|term| constant_lag(&term.delay))
        .filter(|&lag| lag > VANISHING_LAG)
        .collect();
    lags.sort_by(f64::total_cmp);
    lags.dedup();

    let mut soft: Vec<f64> = Vec::new();
    let mut frontier: Vec<f64> = hard[..hard.len() - 1].to_vec();
    for _ in 0..PROPAGATION_DEPTH {
        let mut next: Vec<f64> = frontier
            .iter()
            .flat_map(|&d| lags.iter().map(move |&lag| d + lag))
            .filter(|&t| inside(t))
            .collect();
        next.sort_by(f64::total_cmp);
        next.dedup();
        if next.is_empty() || soft.len() + next.len() > MAX_SOFT_NODES {
            break;
        }
        soft.extend_from_slice(&next);
        frontier = next;
    }

    let merge_tol = step * 1e-6;
    let near_hard = |t: f64| {
        let i = hard.partition_point(|&h| h < t);
        (i < hard.len() && hard[i] - t <= merge_tol) || (i > 0 && t - hard[i - 1] <= merge_tol)
    };
    soft.retain(|&t| !near_hard(t));
    let mut nodes: Vec<(f64, bool)> = hard.iter().map(|&t| (t, true)).collect();
    nodes.extend(soft.iter().map(|&t| (t, false)));
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut kept: Vec<f64> = Vec::with_capacity(nodes.len());
    for (t, is_hard) in nodes {
        match kept.last() {
            Some(&last) if !is_hard && t - last <= merge_tol => {}
            Some(&last) if is_hard && t == last => {}
            _ => kept.push(t),
        }
    }

    let mut grid = Vec::with_capacity(((t_end - t0) / step) as usize + kept.len() + 1);
    grid.push(t0);
    for pair in kept.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let n = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for i in 1..n {
            grid.push(a + h * i as f64);
        }
        grid.push(b);
    }
    Ok(grid)
}

/// Which one-sided limit a stage evaluation sits on.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    /// Just after the step start.
    Right,
    /// Strictly inside the step.
    Interior,
    /// Just before the step end.
    Left,
}

struct Solver<'a> {
    problem: &'a Problem,
    segments: Vec<Segment>,
    jumps: Vec<Jump>,
    t_n: f64,
    x_n: f64,
    /// The last segment ends at `t_n` with no jump there.
    contiguous: bool,
    extrapolated: usize,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a Problem, capacity: usize) -> Self {
        Solver {
            problem,
            segments: Vec::with_capacity(capacity),
            jumps: Vec::new(),
            t_n: problem.t0(),
            x_n: problem.x0(),
            contiguous: false,
            extrapolated: 0,
        }
    }

    fn run(
        mut self,
        grid: &[f64],
        impulses: &[Impulse],
        kicks: &[Kick],
    ) -> Result<Trajectory, IntegratorError> {
        let t0 = self.problem.t0();
        let mut next_impulse = 0;
        for pair in grid.windows(2) {
            let (t_a, t_b) = (pair[0], pair[1]);
            let segment = self.step(t_a, t_b)?;
            self.segments.push(segment);
            self.t_n = t_b;
            self.x_n = segment.x_end;
            self.contiguous = true;

            while next_impulse < impulses.len() && impulses[next_impulse].time < t_b {
                next_impulse += 1;
            }
            let impulse = impulses.get(next_impulse).filter(|imp| imp.time == t_b);
            let multiplier = impulse.map_or(1.0, |imp| imp.multiplier);
            let kicked = kicks.iter().any(|k| k.time == t_b);
            let kick: f64 = kicks
                .iter()
                .filter(|k| k.time == t_b)
                .map(|k| k.amount)
                .sum();
            if impulse.is_some() || kicked {
                let left = self.x_n;
                let right = multiplier * left + kick;
                self.jumps.push(Jump {
                    time: t_b,
                    left,
                    right,
                    multiplier,
                    kick,
                });
                self.x_n = right;
                self.contiguous = false;
            }
            if !self.x_n.is_finite() {
                return Err(IntegratorError::NonFiniteState { t: t_b });
            }
        }
        if self.extrapolated > 0 {
            log::warn!(
                "{} delayed lookup(s) fell inside the current step and were extrapolated",
                self.extrapolated
            );
        }
        let t_end = *grid.last().unwrap_or(&t0);
        Ok(Trajectory::new(
            t0,
            self.problem.x0(),
            t_end,
            self.x_n,
            self.segments,
            self.jumps,
            self.extrapolated,
        ))
    }

    fn step(&mut self, t_a: f64, t_b: f64) -> Result<Segment, IntegratorError> {
        let h = t_b - t_a;
        let t_m = t_a + 0.5 * h;
        let x = self.x_n;
        let k1 = self.rhs(t_a, x, Side::Right, None)?;
        let k2 = self.rhs(t_m, x + 0.5 * h * k1, Side::Interior, Some(k1))?;
        let k3 = self.rhs(t_m, x + 0.5 * h * k2, Side::Interior, Some(k1))?;
        let k4 = self.rhs(t_b, x + h * k3, Side::Left, Some(k1))?;
        let x_end = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !x_end.is_finite() {
            return Err(IntegratorError::NonFiniteState { t: t_b });
        }
        let dx_end = self.rhs(t_b, x_end, Side::Left, Some(k1))?;
        Ok(Segment {
            t_start: t_a,
            t_end: t_b,
            x_start: x,
            x_end,
            dx_start: k1,
            dx_end,
        })
    }

    /// `f(t) - sum_k A_k(t) x[h_k(t)]` with `x(t) = stage_x`.
    fn rhs(
        &mut self,
        t: f64,
        stage_x: f64,
        side: Side,
        k1: Option<f64>,
    ) -> Result<f64, IntegratorError> {
        let data_t = match side {
            Side::Left => t - nudge(t),
            _ => t,
        };
        let mut value = self.problem.forcing().eval(data_t);
        for term in self.problem.terms() {
            let a = term.coefficient.eval(data_t);
            if a == 0.0 {
                continue;
            }
            let h = term.delay.eval(t);
            value -= a * self.lookup(t, h, stage_x, side, k1)?;
        }
        Ok(value)
    }

    fn lookup(
        &mut self,
        t: f64,
        h: f64,
        stage_x: f64,
        side: Side,
        k1: Option<f64>,
    ) -> Result<f64, IntegratorError> {
        let tol = nudge(t);
        if h.is_nan() || h > t + tol {
            return Err(IntegratorError::AdvancedArgument { t, value: h });
        }
        if h >= t - tol {
            return Ok(stage_x);
        }
        let t0 = self.problem.t0();
        let near_t0 = (h - t0).abs() <= tol;
        if h < t0 && !(near_t0 && side == Side::Right) {
            return Ok(self.problem.phi().eval(h.min(t0 - nudge(t0))));
        }
        if near_t0 && side == Side::Left {
            return Ok(self.problem.phi().eval(t0 - nudge(t0)));
        }
        if h <= self.t_n + tol {
            return Ok(self.history(h, side, tol));
        }
        // Inside the current step: the lag is shorter than the step.
        self.extrapolated += 1;
        match (self.contiguous, self.segments.last()) {
            (true, Some(prev)) => Ok(prev.eval(h)),
            _ => Ok(self.x_n + (h - self.t_n) * k1.unwrap_or(0.0)),
        }
    }

    /// Stored solution at `h` in `[t0, t_n]`, snapping to the requested
    /// one-sided limit when `h` sits on a step boundary.
    fn history(&self, h: f64, side: Side, tol: f64) -> f64 {
        if (h - self.t_n).abs() <= tol {
            return match (side, self.segments.last()) {
                (Side::Left, Some(last)) => last.x_end,
                _ => self.x_n,
            };
        }
        let segments = &self.segments;
        let i = segments
            .partition_point(|seg| seg.t_start <= h)
            .saturating_sub(1);
        let seg = &segments[i];
        if (h - seg.t_start).abs() <= tol {
            return match side {
                Side::Left if i > 0 => segments[i - 1].x_end,
                _ => seg.x_start,
            };
        }
        if (seg.t_end - h).abs() <= tol {
            return match side {
                Side::Left => seg.x_end,
                _ if i + 1 < segments.len() => segments[i + 1].x_start,
                _ => self.x_n,
            };
        }
        seg.eval(h)
    }
}

/// Tolerance for matching times that should coincide up to rounding.
fn nudge(t: f64) -> f64 {
    1e-12 * (1.0 + t.abs())
}
