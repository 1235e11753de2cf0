use rayon::prelude::*;

use super::{nudge, solve, step_grid, IntegratorError, Kick, Trajectory};
use crate::model::{Problem, ScalarFn};

/// `t -> X(t, s)` for one fixed `s`.
#[derive(Debug, Clone)]
pub struct FundamentalSlice {
    pub s: f64,
    pub trajectory: Trajectory,
}

impl FundamentalSlice {
    /// `X(t, s)`, zero for `t < s`; `None` past the computed span.
    pub fn value(&self, t: f64) -> Option<f64> {
        if t < self.s {
            Some(0.0)
        } else {
            self.trajectory.value(t)
        }
    }

    /// `X(t - 0, s)`.
    pub fn left_limit(&self, t: f64) -> Option<f64> {
        if t <= self.s {
            Some(0.0)
        } else {
            self.trajectory.left_limit(t)
        }
    }
}

/// Solution started at `s` with value 1, zero history and no forcing; only
/// impulses after `s` act.
pub fn fundamental(
    problem: &Problem,
    s: f64,
    t_end: f64,
    step: f64,
) -> Result<FundamentalSlice, IntegratorError> {
    if s < problem.t0() {
        return Err(IntegratorError::InvalidInput(format!(
            "fundamental start {s} precedes t0 = {}",
            problem.t0()
        )));
    }
    let shifted = problem
        .with_initial(s, 1.0, ScalarFn::zero())
        .with_forcing(ScalarFn::zero());
    let trajectory = solve(&shifted, t_end, step)?;
    Ok(FundamentalSlice { s, trajectory })
}

/// Slices at every node of the solve grid on `[t0, t_end]` plus `extra_nodes`,
/// sorted by `s`. Slices are computed in parallel.
pub fn fundamental_grid(
    problem: &Problem,
    t_end: f64,
    step: f64,
    extra_nodes: &[f64],
) -> Result<Vec<FundamentalSlice>, IntegratorError> {
    let mut nodes = step_grid(problem, t_end, step, &[])?;
    nodes.extend(
        extra_nodes
            .iter()
            .copied()
            .filter(|&s| s >= problem.t0() && s <= t_end),
    );
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
        .par_iter()
        .map(|&s| fundamental(problem, s, t_end, step))
        .collect()
}

/// Right-hand side of the variation-of-constants formula at `t`:
///
/// ```text
/// X(t,t0) x0 + int_{t0}^t X(t,s) f(s) ds
///   - sum_k int_{t0}^t X(t,s) A_k(s) phi(h_k(s)) [h_k(s) < t0] ds
///   + sum_{t0 < tau <= t} X(t,tau) alpha
/// ```
///
/// The integrals use the composite trapezoid rule with the slice points as
/// nodes. Across a node where the integrand jumps each side uses its own
/// one-sided limit, so impulse times and the point where `h_k` passes `t0`
/// contribute no first-order error.
pub fn representation_eval(
    problem: &Problem,
    slices: &[FundamentalSlice],
    t: f64,
    alphas: &[Kick],
) -> Result<f64, IntegratorError> {
    let t0 = problem.t0();
    let mut nodes: Vec<&FundamentalSlice> =
        slices.iter().filter(|sl| sl.s >= t0 && sl.s <= t).collect();
    nodes.sort_by(|a, b| a.s.total_cmp(&b.s));
    if nodes.first().map(|sl| sl.s) != Some(t0) {
        return Err(IntegratorError::MissingSlice { s: t0 });
    }
    let slice_at = |s: f64| -> Result<&FundamentalSlice, IntegratorError> {
        let i = nodes.partition_point(|sl| sl.s < s);
        match nodes.get(i) {
            Some(sl) if sl.s == s => Ok(sl),
            _ => Err(IntegratorError::MissingSlice { s }),
        }
    };
    let x_at = |sl: &FundamentalSlice| -> Result<f64, IntegratorError> {
        sl.value(t).ok_or_else(|| {
            IntegratorError::InvalidInput(format!("slice at s = {} ends before t = {t}", sl.s))
        })
    };

    let impulses: Vec<(f64, f64)> = problem
        .schedule()
        .materialize(t)
        .into_iter()
        .filter(|imp| imp.time > t0)
        .map(|imp| (imp.time, imp.multiplier))
        .collect();
    for &(tau, _) in &impulses {
        slice_at(tau)?;
    }
    let multiplier_at = |s: f64| {
        impulses
            .binary_search_by(|(tau, _)| tau.total_cmp(&s))
            .map_or(1.0, |i| impulses[i].1)
    };

    // (s, X(t, s)) with X(t, t) = 1 appended when t is not a slice point.
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(nodes.len() + 1);
    for sl in &nodes {
        points.push((sl.s, x_at(sl)?));
    }
    if points.last().map(|p| p.0) != Some(t) {
        points.push((t, 1.0));
    }

    let phi = problem.phi();
    let forcing = problem.forcing();
    let integrand = |s: f64, data_s: f64, x: f64, branch_s: f64| -> f64 {
        let mut g = forcing.eval(data_s);
        for term in problem.terms() {
            if term.delay.eval(branch_s) < t0 {
                let h = term.delay.eval(s).min(t0 - nudge(t0));
                g -= term.coefficient.eval(data_s) * phi.eval(h);
            }
        }
        x * g
    };

    let mut integral = 0.0;
    for pair in points.windows(2) {
        let ((a, x_a), (b, x_b)) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let x_b_left = x_b * multiplier_at(b);
        let g_a = integrand(a, a, x_a, mid);
        let g_b = integrand(b, b - nudge(b), x_b_left, mid);
        integral += 0.5 * (b - a) * (g_a + g_b);
    }

    let mut value = points[0].1 * problem.x0() + integral;
    for kick in alphas {
        if kick.time > t0 && kick.time <= t {
            value += x_at(slice_at(kick.time)?)? * kick.amount;
        }
    }
    Ok(value)
}
